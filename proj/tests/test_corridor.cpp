#include <doctest.h>

#include <cmath>
#include <random>

#include "superrep/corridor.hpp"

using namespace superrep;

namespace {

SimplexBasis paper_basis() {
  Eigen::MatrixXd v(3, 2);
  v << 0.0, std::sqrt(2.0),
       std::sqrt(6.0) / 2.0, -std::sqrt(2.0) / 2.0,
       -std::sqrt(6.0) / 2.0, -std::sqrt(2.0) / 2.0;
  return SimplexBasis::from_vertices(v);
}

// d=2, sigma = I, kappa_1 = kappa_2^- = 0, kappa_2^+ = 3 sqrt(2)/4: the
// corridor whose member diag(1, 0) kills the second asset's volatility.
VolatilityCorridor degenerate_corridor() {
  Eigen::VectorXd kp(2), km(2);
  kp << 0.0, 3.0 * std::sqrt(2.0) / 4.0;
  km << 0.0, 0.0;
  return make_corridor(paper_basis(), Eigen::MatrixXd::Identity(2, 2), kp, km);
}

VolatilityCorridor scalar_corridor(double sigma, double kp, double km) {
  return make_corridor(SimplexBasis::canonical(1), Eigen::MatrixXd::Constant(1, 1, sigma),
                       Eigen::VectorXd::Constant(1, kp), Eigen::VectorXd::Constant(1, km));
}

Eigen::MatrixXd random_box_w(const VolatilityCorridor& corr, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd w(corr.basis.vertex_count(), corr.dimension());
  for (int j = 0; j < w.rows(); ++j)
    for (int k = 0; k < w.cols(); ++k) w(j, k) = corr.box_upper(k) * unif(rng);
  return w;
}

}  // namespace

TEST_CASE("corridor: beta map basics") {
  const auto corr = degenerate_corridor();
  CHECK(beta_from_w(corr, Eigen::MatrixXd::Zero(3, 2)).cwiseAbs().maxCoeff() == 0.0);
  // Constant columns map to zero because the vertices sum to zero.
  Eigen::MatrixXd w(3, 2);
  w.col(0).setZero();
  w.col(1).setConstant(corr.box_upper(1));
  CHECK(beta_from_w(corr, w).cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::MatrixXd outside = w;
  outside(0, 0) = 1.0;  // column-1 box is {0}
  CHECK_THROWS_AS(beta_from_w(corr, outside), std::invalid_argument);
}

TEST_CASE("corridor: the reference beta = diag(0, -1/2) lies in B") {
  const auto corr = degenerate_corridor();
  // w matched so that column 2 equals (kappa_2^+/3)(v_2' + v_3').
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 2);
  w(1, 1) = corr.box_upper(1);
  w(2, 1) = corr.box_upper(1);
  const Eigen::MatrixXd beta = beta_from_w(corr, w);
  CHECK(beta(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(beta(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(beta(1, 1) == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("corridor: gamma map") {
  const auto corr = degenerate_corridor();
  CHECK(gamma_from_beta(corr, Eigen::MatrixXd::Zero(2, 2))
            .isApprox(Eigen::MatrixXd::Identity(2, 2)));
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(2, 2);
  beta(1, 1) = -0.5;
  const Eigen::MatrixXd a = gamma_from_beta(corr, beta);
  CHECK(a(0, 0) == doctest::Approx(1.0));
  CHECK(a(1, 1) == doctest::Approx(0.0));
  CHECK(a(0, 1) == doctest::Approx(0.0));

  const auto scalar = scalar_corridor(1.0, 0.3, 0.2);
  CHECK(gamma_from_beta(scalar, Eigen::MatrixXd::Constant(1, 1, 0.1))(0, 0) ==
        doctest::Approx(1.2));
}

TEST_CASE("corridor: linear sup clamps coefficients and matches brute force") {
  const auto corr = degenerate_corridor();
  // All clamp coefficients vanish for this weight (column 1 box is {0} and
  // column 2 is untouched), so w stays at zero.
  Eigen::Matrix2d only_first;
  only_first << 1.0, 0.0, 0.0, 0.0;
  const auto at_zero = sup_linear_over_gamma(corr, only_first);
  CHECK(at_zero.w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(at_zero.value == doctest::Approx(1.0));

  // d=1: sup of a over the corridor is sigma^2 + sigma (kappa^+ + kappa^-).
  const auto scalar = scalar_corridor(1.0, 0.3, 0.2);
  const auto top = sup_linear_over_gamma(scalar, Eigen::MatrixXd::Identity(1, 1));
  CHECK(top.value == doctest::Approx(1.5).epsilon(1e-12));

  // Brute force over all box vertices for a handful of weight matrices.
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::Matrix2d weight;
    const double a = sym(rng), b = sym(rng), c = sym(rng);
    weight << a, b, b, c;
    const auto sup = sup_linear_over_gamma(corr, weight);
    double brute = -1e300;
    for (int mask = 0; mask < 64; ++mask) {
      Eigen::MatrixXd w(3, 2);
      for (int bit = 0; bit < 6; ++bit)
        w(bit % 3, bit / 3) = ((mask >> bit) & 1) ? corr.box_upper(bit / 3) : 0.0;
      brute = std::max(brute, (weight * gamma_from_beta(corr, beta_from_w(corr, w))).trace());
    }
    CHECK(sup.value == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("corridor: the spread functional of the basis-dependence example") {
  // sigma = I, kappa_1 = kappa_2^- = 0: sup of a11+a22-a12-a21 equals
  // 2 + (2 kappa_2^+/3) sum_j max(v_j^(1) - v_j^(2), 0).
  Eigen::VectorXd kp(2), km(2);
  kp << 0.0, 0.2;
  km << 0.0, 0.0;
  const auto corr = make_corridor(paper_basis(), Eigen::MatrixXd::Identity(2, 2), kp, km);
  Eigen::Matrix2d weight;
  weight << 1.0, -1.0, -1.0, 1.0;
  const double sup = sup_linear_over_gamma(corr, weight).value;
  double sum_pos = 0.0;
  for (int j = 0; j < 3; ++j)
    sum_pos += std::max(corr.basis.vertex(j)(0) - corr.basis.vertex(j)(1), 0.0);
  CHECK(sup == doctest::Approx(2.0 + 2.0 * 0.2 / 3.0 * sum_pos).epsilon(1e-12));
}

TEST_CASE("corridor: psi feasibility and round trips") {
  const auto corr = degenerate_corridor();
  // sigma sigma' itself: w = 0 is feasible.
  const Eigen::MatrixXd beta0 = psi(corr, Eigen::MatrixXd::Identity(2, 2));
  CHECK(gamma_from_beta(corr, beta0).isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-9));

  // The boundary member diag(1, 0) of the reference example is feasible.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 1.0;
  const Eigen::MatrixXd beta = psi(corr, a);
  CHECK((gamma_from_beta(corr, beta) - a).cwiseAbs().maxCoeff() <= 1e-9);

  // Round trip on random box points.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd target =
        gamma_from_beta(corr, beta_from_w(corr, random_box_w(corr, rng)));
    const Eigen::MatrixXd b = psi(corr, target);
    CHECK((gamma_from_beta(corr, b) - target).cwiseAbs().maxCoeff() <= 1e-9);
  }

  // Far outside Gamma.
  CHECK_THROWS_AS(psi(corr, 25.0 * Eigen::MatrixXd::Identity(2, 2)), NotInGamma);
}

TEST_CASE("corridor: phi keeps every vertex inside the cost band") {
  // d=1 with beta = (kappa^+ + kappa^-)/2: Phi = (kappa^+ - kappa^-)/2.
  const auto scalar = scalar_corridor(1.0, 0.3, 0.2);
  const Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(1, 1, 0.25);
  const Eigen::VectorXd shift = phi(scalar, beta);
  CHECK(shift(0) == doctest::Approx(0.05).epsilon(1e-12));
  for (int j = 0; j < 2; ++j) {
    const double band = scalar.basis.vertex(j)(0) * beta(0, 0) + shift(0);
    CHECK(band <= 0.3 + 1e-12);
    CHECK(band >= -0.2 - 1e-12);
  }

  // beta = 0 with zero kappa^-: Phi = 0.
  const auto frictionless = scalar_corridor(1.0, 0.0, 0.0);
  CHECK(phi(frictionless, Eigen::MatrixXd::Zero(1, 1))(0) == doctest::Approx(0.0));

  // Randomized band property across both corridors.
  std::mt19937_64 rng(11);
  const auto corr = degenerate_corridor();
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd b = beta_from_w(corr, random_box_w(corr, rng));
    const Eigen::VectorXd s = phi(corr, b);
    for (int i = 0; i < 3; ++i) {
      const Eigen::RowVectorXd band = corr.basis.vertex(i) * b + s.transpose();
      for (int k = 0; k < 2; ++k) {
        CHECK(band(k) <= corr.kappa_plus(k) + 1e-12);
        CHECK(band(k) >= -corr.kappa_minus(k) - 1e-12);
      }
    }
  }

  // A beta outside B is rejected.
  Eigen::MatrixXd outside = Eigen::MatrixXd::Zero(2, 2);
  outside(0, 0) = 1.0;
  CHECK_THROWS_AS(phi(corr, outside), NotInB);
}

TEST_CASE("corridor: sufficient condition checker") {
  const auto frictionless = scalar_corridor(1.0, 0.0, 0.0);
  const auto pass = check_lemma61(frictionless);
  CHECK(pass.passes);
  CHECK(pass.worst_norm == doctest::Approx(0.0));

  const auto fail = check_lemma61(degenerate_corridor());
  CHECK_FALSE(fail.passes);
  CHECK(fail.worst_norm == doctest::Approx(3.0 * std::sqrt(2.0) / 4.0).epsilon(1e-12));
  CHECK(fail.bound == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-12));

  // Small costs pass.
  Eigen::VectorXd kp(2), km(2);
  kp << 0.1, 0.1;
  km << 0.05, 0.05;
  const auto small = make_corridor(paper_basis(), Eigen::MatrixXd::Identity(2, 2), kp, km);
  CHECK(check_lemma61(small).passes);
}

TEST_CASE("corridor: interior-condition checker finds the reference witness") {
  const auto frictionless = scalar_corridor(1.0, 0.0, 0.0);
  CHECK(check_assumption21(frictionless, 3).passes);

  const auto res = check_assumption21(degenerate_corridor(), 3);
  REQUIRE_FALSE(res.passes);
  REQUIRE(res.witness.has_value());
  const auto& wit = *res.witness;
  // The witness beta = diag(0, -1/2) gives v_1 beta (beta + sigma')^{-1} v_1' = -2.
  CHECK_FALSE(wit.singular);
  CHECK(wit.value <= -1.0);
  const auto corr = degenerate_corridor();
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(2, 2);
  beta(1, 1) = -0.5;
  const Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(2, 2) + beta).inverse();
  const double direct = corr.basis.vertex(0) * beta * inv * corr.basis.vertex(0).transpose();
  CHECK(direct == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("corridor: lemma 6.1 pass implies the interior condition holds") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::VectorXd kp(2), km(2);
    kp << 0.12 * unif(rng), 0.12 * unif(rng);
    km << 0.12 * unif(rng), 0.12 * unif(rng);
    const auto corr = make_corridor(paper_basis(), Eigen::MatrixXd::Identity(2, 2), kp, km);
    if (!check_lemma61(corr).passes) continue;
    CHECK(check_assumption21(corr, 3).passes);
  }
}

TEST_CASE("corridor: gamma is convex along sampled midpoints") {
  const auto corr = degenerate_corridor();
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a1 = gamma_from_beta(corr, beta_from_w(corr, random_box_w(corr, rng)));
    const Eigen::MatrixXd a2 = gamma_from_beta(corr, beta_from_w(corr, random_box_w(corr, rng)));
    CHECK_NOTHROW(psi(corr, 0.5 * (a1 + a2)));
  }
}
