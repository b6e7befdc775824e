#include <doctest.h>

#include <cmath>
#include <random>

#include "superrep/construction.hpp"
#include "superrep/pricer.hpp"

using namespace superrep;

namespace {

MarketSpec d1_market(int n, double sigma, double kp, double km) {
  return make_simplex_market(1, n, Eigen::MatrixXd::Constant(1, 1, sigma),
                             Eigen::VectorXd::Ones(1), Eigen::VectorXd::Constant(1, kp),
                             Eigen::VectorXd::Constant(1, km));
}

MarketSpec d2_market(int n, double sigma, double kp, double km) {
  return make_simplex_market(2, n, sigma * Eigen::MatrixXd::Identity(2, 2),
                             Eigen::VectorXd::Ones(2), Eigen::VectorXd::Constant(2, kp),
                             Eigen::VectorXd::Constant(2, km));
}

PathIndex random_path(const MarketSpec& spec, std::mt19937_64& rng) {
  PathIndex path(spec.n);
  for (int k = 0; k < spec.n; ++k) path[k] = static_cast<int32_t>(rng() % spec.branch_count());
  return path;
}

Payoff call_d1(double strike) {
  Eigen::VectorXd w(1);
  w << 1.0;
  return Payoff::basket_call(w, strike);
}

}  // namespace

TEST_CASE("construction: zero costs freeze the perturbation") {
  const auto spec = d1_market(16, 0.5, 0.0, 0.0);
  const auto control = PiecewiseVolControl::constant(Eigen::MatrixXd::Constant(1, 1, 0.25));
  std::mt19937_64 rng(1);
  const auto path = random_path(spec, rng);
  const auto proc = build_A_process(spec, control, path);
  CHECK(proc.perturbation.cwiseAbs().maxCoeff() == 0.0);
  CHECK((proc.shadow - path_prices(spec, path)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("construction: d=1 plateau values match the closed form") {
  const double sigma = 0.5, kp = 0.3, km = 0.1;
  const int n = 36;  // ramp length 6
  const auto spec = d1_market(n, sigma, kp, km);
  // Corridor top: variance sigma^2 + sigma (kp + km).
  const double top = sigma * sigma + sigma * (kp + km);
  const auto control = PiecewiseVolControl::constant(Eigen::MatrixXd::Constant(1, 1, top));
  std::mt19937_64 rng(2);
  const auto path = random_path(spec, rng);
  const auto proc = build_A_process(spec, control, path);

  const double c = 0.5 * (kp + km);        // Psi at the top edge
  const double shift = 0.5 * (kp - km);    // Phi of that beta
  const double root_n = std::sqrt(static_cast<double>(n));
  const int ramp = static_cast<int>(std::floor(root_n));
  for (int k = 1; k <= n; ++k) {
    const double xi = spec.basis->vertex(path[k - 1])(0);
    const double plateau = (xi * c + shift) / root_n;
    const double expected = (k <= ramp) ? plateau * k / ramp : plateau;
    CHECK(proc.perturbation(k, 0) == doctest::Approx(expected).epsilon(1e-10));
    // Band with equality at the extremes.
    CHECK(proc.perturbation(k, 0) <= kp / root_n + 1e-12);
    CHECK(proc.perturbation(k, 0) >= -km / root_n - 1e-12);
  }
}

TEST_CASE("construction: process identities hold on random paths and controls") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const bool two_assets = trial % 2 == 0;
    const double kp = 0.05 + 0.2 * unif(rng);
    const double km = 0.05 + 0.2 * unif(rng);
    const int n = 25 + static_cast<int>(rng() % 40);
    const auto spec = two_assets ? d2_market(n, 0.6, kp, km) : d1_market(n, 0.6, kp, km);
    const auto corr = make_corridor(spec);

    // Random corridor member as the variance target.
    Eigen::MatrixXd w(spec.d + 1, spec.d);
    for (int j = 0; j < w.rows(); ++j)
      for (int k = 0; k < w.cols(); ++k) w(j, k) = corr.box_upper(k) * unif(rng);
    auto control = PiecewiseVolControl::constant(gamma_from_beta(corr, beta_from_w(corr, w)));
    control.eps_pd = 0.0;

    const auto path = random_path(spec, rng);
    const auto proc = build_A_process(spec, control, path);
    const Eigen::MatrixXd prices = path_prices(spec, path);
    const double root_n = std::sqrt(static_cast<double>(n));

    CAPTURE(trial);
    for (int k = 0; k <= n; ++k) {
      for (int i = 0; i < spec.d; ++i) {
        // Band invariant, exact by the Psi/Phi contracts.
        CHECK(proc.perturbation(k, i) <= spec.kappa_plus(i) / root_n + 1e-12);
        CHECK(proc.perturbation(k, i) >= -spec.kappa_minus(i) / root_n - 1e-12);
        // Shadow-price identity M = S (1 + A).
        CHECK(proc.shadow(k, i) ==
              doctest::Approx(prices(k, i) * (1.0 + proc.perturbation(k, i))).epsilon(1e-12));
      }
    }
    for (int k = 1; k <= n; ++k) {
      for (int i = 0; i < spec.d; ++i) {
        const double dn = (proc.shadow(k, i) - proc.shadow(k - 1, i)) / prices(k - 1, i);
        CHECK(proc.log_proxy(k, i) - proc.log_proxy(k - 1, i) == doctest::Approx(dn).epsilon(1e-12));
        // Delta N - Delta X = Delta A.
        const double dx = proc.driver_sum(k, i) - proc.driver_sum(k - 1, i);
        const double da = proc.perturbation(k, i) - proc.perturbation(k - 1, i);
        CHECK(dn - dx == doctest::Approx(da).epsilon(1e-11));
        // |X - N| <= kappa / sqrt(n).
        CHECK(std::abs(proc.driver_sum(k, i) - proc.log_proxy(k, i)) <=
              std::max(spec.kappa_plus(i), spec.kappa_minus(i)) / root_n + 1e-12);
      }
    }
  }
}

TEST_CASE("construction: multi-interval controls blend between prescriptions") {
  const auto spec = d1_market(100, 0.5, 0.2, 0.2);
  PiecewiseVolControl control;
  control.breakpoints = {0.0, 0.5, 1.0};
  control.segments.resize(2);
  control.segments[0].constant = Eigen::MatrixXd::Constant(1, 1, 0.25 + 0.5 * 0.4);  // top
  control.segments[1].constant = Eigen::MatrixXd::Constant(1, 1, 0.25 - 0.5 * 0.4);  // bottom
  const auto corr = make_corridor(spec);
  validate_control(corr, control);

  std::mt19937_64 rng(4);
  const auto path = random_path(spec, rng);
  const auto proc = build_A_process(spec, control, path);
  const double root_n = 10.0;
  const int ramp = 10;
  // Plateau of segment 0 vs plateau of segment 1 have opposite-sign Psi.
  const double c = 0.2;
  for (int k : {25, 45}) {
    const double xi = spec.basis->vertex(path[k - 1])(0);
    CHECK(proc.perturbation(k, 0) == doctest::Approx(xi * c / root_n).epsilon(1e-10));
  }
  for (int k : {66, 90}) {
    const double xi = spec.basis->vertex(path[k - 1])(0);
    CHECK(proc.perturbation(k, 0) == doctest::Approx(-xi * c / root_n).epsilon(1e-10));
  }
  // Halfway through the blend the two prescriptions average.
  const int mid = 50 + ramp / 2;
  const double xi = spec.basis->vertex(path[mid - 1])(0);
  CHECK(proc.perturbation(mid, 0) == doctest::Approx(0.0 * xi).epsilon(1e-10));
}

TEST_CASE("construction: blend windows require enough periods") {
  const auto spec = d1_market(10, 0.5, 0.1, 0.1);
  PiecewiseVolControl control;
  control.breakpoints = {0.0, 0.9, 1.0};  // second interval has one period, ramp needs 3
  control.segments.resize(2);
  control.segments[0].constant = Eigen::MatrixXd::Constant(1, 1, 0.25);
  control.segments[1].constant = Eigen::MatrixXd::Constant(1, 1, 0.25);
  std::mt19937_64 rng(5);
  const auto path = random_path(spec, rng);
  CHECK_THROWS_AS(build_A_process(spec, control, path), std::invalid_argument);
}

TEST_CASE("construction: control validation") {
  const auto spec = d1_market(16, 0.5, 0.1, 0.1);
  const auto corr = make_corridor(spec);
  auto control = PiecewiseVolControl::constant(Eigen::MatrixXd::Constant(1, 1, 0.25));
  CHECK_NOTHROW(validate_control(corr, control));
  // Outside Gamma.
  auto outside = PiecewiseVolControl::constant(Eigen::MatrixXd::Constant(1, 1, 9.0));
  CHECK_THROWS_AS(validate_control(corr, outside), NotInGamma);
  // Positive-definiteness margin.
  auto degenerate = PiecewiseVolControl::constant(Eigen::MatrixXd::Constant(1, 1, 0.25));
  degenerate.eps_pd = 0.5;
  CHECK_THROWS_AS(validate_control(corr, degenerate), std::invalid_argument);
}

TEST_CASE("construction: frictionless node measure is uniform") {
  const auto spec = d2_market(9, 0.6, 0.0, 0.0);
  const auto control = PiecewiseVolControl::constant(0.36 * Eigen::MatrixXd::Identity(2, 2));
  const auto res = node_mm_feasibility(spec, control, PathIndex{0, 2});
  REQUIRE(res.feasible);
  CHECK(res.margin == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  for (int b = 0; b < 3; ++b) CHECK(res.q(b) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("construction: feasibility along sampled paths for a small corridor") {
  const auto spec = d2_market(64, 1.0, 0.1, 0.1);
  const auto corr = make_corridor(spec);
  CHECK(check_lemma61(corr).passes);
  const auto control =
      PiecewiseVolControl::constant(gamma_from_beta(corr, Eigen::MatrixXd::Zero(2, 2)));
  for (std::uint64_t seed : {11u, 12u}) {
    const auto path = sample_path(spec, control, seed);
    REQUIRE(static_cast<int>(path.size()) == 64);
    // Spot check nodes along the sampled path.
    for (int depth : {0, 5, 31, 63}) {
      const PathIndex node(path.begin(), path.begin() + depth);
      CHECK(node_mm_feasibility(spec, control, node).feasible);
    }
  }
}

TEST_CASE("construction: degenerate target loses feasibility at moderate n") {
  // The corridor admitting a = diag(1, 0); the induced shadow prices leave no
  // room for an equivalent martingale measure at some nodes.
  Eigen::MatrixXd v(3, 2);
  v << 0.0, std::sqrt(2.0),
       std::sqrt(6.0) / 2.0, -std::sqrt(2.0) / 2.0,
       -std::sqrt(6.0) / 2.0, -std::sqrt(2.0) / 2.0;
  auto spec = make_simplex_market(2, 16, Eigen::MatrixXd::Identity(2, 2),
                                  Eigen::VectorXd::Ones(2),
                                  (Eigen::VectorXd(2) << 0.0, 3.0 * std::sqrt(2.0) / 4.0).finished(),
                                  Eigen::VectorXd::Zero(2), SimplexBasis::from_vertices(v));
  Eigen::MatrixXd target = Eigen::MatrixXd::Zero(2, 2);
  target(0, 0) = 1.0;
  auto control = PiecewiseVolControl::constant(target);
  control.eps_pd = 0.0;

  double worst_margin = 1.0;
  bool any_infeasible = false;
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 12; ++trial) {
    PathIndex node(1 + trial % 8);
    for (auto& b : node) b = static_cast<int32_t>(rng() % 3);
    const auto res = node_mm_feasibility(spec, control, node);
    any_infeasible = any_infeasible || !res.feasible;
    worst_margin = std::min(worst_margin, res.margin);
  }
  CHECK((any_infeasible || worst_margin < 0.05));
}

TEST_CASE("construction: monte carlo reproduces the martingale start") {
  const auto spec = d1_market(8, 0.5, 0.0, 0.0);
  const auto control = PiecewiseVolControl::constant(Eigen::MatrixXd::Constant(1, 1, 0.25));
  const auto res = mc_lower_bound(spec, control, call_d1(0.0), 20000, 42);
  CHECK(std::abs(res.estimate - 1.0) <= 3.0 * res.standard_error);
  CHECK(res.infeasible_nodes == 0);

  // Determinism.
  const auto res2 = mc_lower_bound(spec, control, call_d1(0.0), 20000, 42);
  CHECK(res.estimate == res2.estimate);
  CHECK(res.standard_error == res2.standard_error);
}

TEST_CASE("construction: monte carlo matches the pricer at zero cost") {
  const auto spec = d1_market(8, 0.5, 0.0, 0.0);
  const auto control = PiecewiseVolControl::constant(Eigen::MatrixXd::Constant(1, 1, 0.25));
  const auto payoff = call_d1(1.0);
  const auto mc = mc_lower_bound(spec, control, payoff, 100000, 7);
  const auto exact = superreplication_price(spec, payoff);
  CHECK(std::abs(mc.estimate - exact.value) <= 3.0 * mc.standard_error);
  CHECK(mc.estimate <= exact.value + 3.0 * mc.standard_error);
}

TEST_CASE("construction: quadratic variation approaches the variance target") {
  const double sigma = 0.5, kp = 0.2, km = 0.2;
  const double target = sigma * sigma + sigma * (kp + km);
  const double t0 = 0.25, t1 = 1.0;
  double previous_error = -1.0;
  for (int n : {256, 4096}) {
    const auto spec = d1_market(n, sigma, kp, km);
    const auto control = PiecewiseVolControl::constant(Eigen::MatrixXd::Constant(1, 1, target));
    const auto path = sample_path(spec, control, 2024);
    const auto proc = build_A_process(spec, control, path);
    double qv = 0.0;
    const int lo = static_cast<int>(t0 * n), hi = static_cast<int>(t1 * n);
    for (int k = lo + 1; k <= hi; ++k) {
      const double dn = proc.log_proxy(k, 0) - proc.log_proxy(k - 1, 0);
      qv += dn * dn;
    }
    const double error = std::abs(qv / (t1 - t0) - target);
    if (previous_error >= 0.0) CHECK(error < previous_error);
    previous_error = error;
  }
}

TEST_CASE("construction: feedback rules interpolate their tables") {
  const auto spec = d1_market(100, 0.5, 0.2, 0.2);
  const auto corr = make_corridor(spec);
  const double top = 0.25 + 0.5 * 0.4, bottom = 0.25 - 0.5 * 0.4;

  PiecewiseVolControl control;
  control.breakpoints = {0.0, 0.5, 1.0};
  control.segments.resize(2);
  control.segments[0].constant = Eigen::MatrixXd::Constant(1, 1, 0.25);
  FeedbackRule rule;
  rule.sample_times = {0.5};
  rule.axes = {{-10.0, 0.0, 10.0}};
  // Below-average history selects the bottom target, above-average the top.
  rule.table = {Eigen::MatrixXd::Constant(1, 1, bottom), Eigen::MatrixXd::Constant(1, 1, bottom),
                Eigen::MatrixXd::Constant(1, 1, top)};
  control.segments[1].feedback = rule;
  CHECK_NOTHROW(validate_control(corr, control));

  std::mt19937_64 rng(9);
  const auto path = random_path(spec, rng);
  const auto proc = build_A_process(spec, control, path);
  // The second-half plateau uses Psi of the interpolated target: in the
  // scalar case beta = (target - sigma^2)/(2 sigma) and Phi = |beta| - km.
  const double n_half = proc.log_proxy(50, 0);
  const double frac = std::clamp(n_half, 0.0, 10.0) / 10.0;
  const double expected_target = (n_half <= 0.0) ? bottom : bottom + frac * (top - bottom);
  const double beta = (expected_target - 0.25) / (2.0 * 0.5);
  const double xi = spec.basis->vertex(path[89])(0);
  CHECK(proc.perturbation(90, 0) * 10.0 ==
        doctest::Approx(xi * beta + std::abs(beta) - 0.2).epsilon(1e-9));
}
