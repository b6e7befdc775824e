#include "superrep/corridor.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "superrep/lp.hpp"

namespace superrep {

namespace {

constexpr double kBoxTol = 1e-12;

void check_box(const VolatilityCorridor& corr, const Eigen::MatrixXd& w) {
  const int m = corr.basis.vertex_count();
  const int d = corr.dimension();
  if (w.rows() != m || w.cols() != d)
    throw std::invalid_argument("corridor: w must be (d+1) x d");
  for (int k = 0; k < d; ++k) {
    const double ck = corr.box_upper(k);
    for (int j = 0; j < m; ++j) {
      if (w(j, k) < -kBoxTol || w(j, k) > ck + kBoxTol)
        throw std::invalid_argument("corridor: w outside the box [0, (kappa^+ + kappa^-)/(d+1)]");
    }
  }
}

}  // namespace

VolatilityCorridor make_corridor(const SimplexBasis& basis, Eigen::MatrixXd sigma,
                                 Eigen::VectorXd kappa_plus, Eigen::VectorXd kappa_minus) {
  const int d = basis.dimension();
  if (sigma.rows() != d || sigma.cols() != d)
    throw std::invalid_argument("corridor: sigma must be d x d");
  if (kappa_plus.size() != d || kappa_minus.size() != d)
    throw std::invalid_argument("corridor: kappa vectors must have length d");
  if ((kappa_plus.array() < 0).any() || (kappa_minus.array() < 0).any())
    throw std::invalid_argument("corridor: cost coefficients must be nonnegative");
  VolatilityCorridor corr{basis, std::move(sigma), (kappa_plus + kappa_minus) / (d + 1),
                          std::move(kappa_plus), std::move(kappa_minus)};
  return corr;
}

VolatilityCorridor make_corridor(const MarketSpec& spec) {
  if (spec.driver != DriverKind::Simplex)
    throw std::invalid_argument("corridor: only simplex-driver markets induce a corridor");
  return make_corridor(*spec.basis, spec.sigma, spec.kappa_plus, spec.kappa_minus);
}

Eigen::MatrixXd beta_from_w(const VolatilityCorridor& corr, const Eigen::MatrixXd& w) {
  check_box(corr, w);
  // Column k of beta is sum_j w_jk v_j', i.e. beta = V' w in matrix form.
  return corr.basis.vertices().transpose() * w;
}

Eigen::MatrixXd gamma_from_beta(const VolatilityCorridor& corr, const Eigen::MatrixXd& beta) {
  const Eigen::MatrixXd t = corr.sigma * beta;
  return corr.sigma * corr.sigma.transpose() + t + t.transpose();
}

LinearSupResult sup_linear_over_gamma(const VolatilityCorridor& corr, const Eigen::MatrixXd& weight) {
  const int d = corr.dimension();
  const int m = corr.basis.vertex_count();
  if (weight.rows() != d || weight.cols() != d)
    throw std::invalid_argument("corridor: weight must be d x d");
  // trace(W (sigma b + b' sigma')) = sum_jk w_jk * 2 (v_j sigma' W)_k.
  const Eigen::MatrixXd coef = 2.0 * corr.basis.vertices() * corr.sigma.transpose() * weight;
  LinearSupResult out;
  out.w = Eigen::MatrixXd::Zero(m, d);
  for (int k = 0; k < d; ++k)
    for (int j = 0; j < m; ++j)
      if (coef(j, k) > 0.0) out.w(j, k) = corr.box_upper(k);
  out.a = gamma_from_beta(corr, beta_from_w(corr, out.w));
  out.value = (weight * out.a).trace();
  return out;
}

Eigen::MatrixXd psi(const VolatilityCorridor& corr, const Eigen::MatrixXd& a) {
  const int d = corr.dimension();
  const int m = corr.basis.vertex_count();
  if (a.rows() != d || a.cols() != d) throw std::invalid_argument("psi: a must be d x d");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + a.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("psi: a must be symmetric");

  // Feasibility LP over the box: match the d(d+1)/2 distinct entries of
  //   sigma sigma' + sigma beta(w) + beta(w)' sigma' = a,
  // minimizing sum w_jk; the minimum-sum selection pins down Psi.
  const Eigen::MatrixXd sv = corr.sigma * corr.basis.vertices().transpose();  // (sigma v_j')_p = sv(p, j)
  const Eigen::MatrixXd ss = corr.sigma * corr.sigma.transpose();
  LinearProgram lp;
  lp.sense = ObjSense::Minimize;
  for (int k = 0; k < d; ++k)
    for (int j = 0; j < m; ++j) lp.add_variable(1.0, 0.0, corr.box_upper(k));
  auto var = [&](int j, int k) { return k * m + j; };
  for (int p = 0; p < d; ++p) {
    for (int q = p; q < d; ++q) {
      const int row = lp.add_row(RowSense::Equal, a(p, q) - ss(p, q));
      for (int j = 0; j < m; ++j) {
        // (sigma beta)_pq = sum_j w_jq (sigma v_j')_p and transpose term.
        lp.add_entry(row, var(j, q), sv(p, j));
        lp.add_entry(row, var(j, p), sv(q, j));
      }
    }
  }
  const LPSolution sol = solve_lp(lp);
  if (sol.status == LPStatus::Infeasible)
    throw NotInGamma("psi: matrix is not a member of Gamma");
  if (sol.status != LPStatus::Optimal)
    throw std::runtime_error("psi: feasibility LP did not converge");
  Eigen::MatrixXd w(m, d);
  for (int k = 0; k < d; ++k)
    for (int j = 0; j < m; ++j)
      w(j, k) = std::min(std::max(sol.primal[var(j, k)], 0.0), corr.box_upper(k));
  return beta_from_w(corr, w);
}

Eigen::VectorXd phi(const VolatilityCorridor& corr, const Eigen::MatrixXd& beta) {
  const int d = corr.dimension();
  const int m = corr.basis.vertex_count();
  if (beta.rows() != d || beta.cols() != d) throw std::invalid_argument("phi: beta must be d x d");
  // (v_i beta)_k = (d+1) w_ik - sum_j w_jk; the per-column shift
  // t_k = -min_i (v_i beta)_k recovers a w with min_i w_ik = 0, which stays
  // in the box whenever beta is in B.
  const Eigen::MatrixXd vb = corr.basis.vertices() * beta;  // (m x d), row i = v_i beta
  Eigen::VectorXd shift(d);
  Eigen::MatrixXd w(m, d);
  for (int k = 0; k < d; ++k) {
    shift(k) = -vb.col(k).minCoeff();
    for (int j = 0; j < m; ++j) {
      w(j, k) = (vb(j, k) + shift(k)) / (m);
      if (w(j, k) > corr.box_upper(k) + 1e-9 * (1.0 + corr.box_upper(k)))
        throw NotInB("phi: beta is not a member of B");
    }
  }
  // Phi_k = sum_j w_jk - kappa_k^- = t_k - kappa_k^- since the vertex columns
  // sum to zero.
  return shift - corr.kappa_minus;
}

Lemma61Result check_lemma61(const VolatilityCorridor& corr) {
  const int d = corr.dimension();
  Lemma61Result out;
  out.bound = 1.0 / (2.0 * std::sqrt(static_cast<double>(d)));
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(corr.sigma);
  if (std::abs(lu.determinant()) < 1e-300)
    throw std::invalid_argument("check_lemma61: singular sigma");
  const Eigen::VectorXd half_width = corr.kappa_plus + corr.kappa_minus;
  for (long mask = 0; mask < (1L << d); ++mask) {
    Eigen::VectorXd x(d);
    for (int k = 0; k < d; ++k) x(k) = ((mask >> k) & 1) ? half_width(k) : -half_width(k);
    // row vector x (sigma')^{-1}  <=>  solve sigma y = x.
    const Eigen::VectorXd y = lu.solve(x);
    out.worst_norm = std::max(out.worst_norm, y.norm());
  }
  out.passes = out.worst_norm < out.bound;
  return out;
}

namespace {

// Evaluates the interior condition at one box point; returns a witness when
// it fails.
std::optional<FeasibilityWitness> violation_at(const VolatilityCorridor& corr,
                                               const Eigen::MatrixXd& w) {
  const int m = corr.basis.vertex_count();
  const Eigen::MatrixXd beta = corr.basis.vertices().transpose() * w;
  const Eigen::MatrixXd sb = corr.sigma.transpose() + beta;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sb);
  if (!lu.isInvertible()) {
    FeasibilityWitness wit;
    wit.beta = beta;
    wit.singular = true;
    return wit;
  }
  // G_ij = v_i beta (sigma' + beta)^{-1} v_j'
  const Eigen::MatrixXd rhs = corr.basis.vertices().transpose();      // d x m, columns v_j'
  const Eigen::MatrixXd inv_v = lu.solve(rhs);                        // (sigma'+beta)^{-1} v_j'
  const Eigen::MatrixXd g = (corr.basis.vertices() * beta) * inv_v;   // m x m
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (!(g(i, j) > -1.0)) {
        FeasibilityWitness wit;
        wit.beta = beta;
        wit.i = i;
        wit.j = j;
        wit.value = g(i, j);
        return wit;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

Assumption21Result check_assumption21(const VolatilityCorridor& corr, int grid_per_axis) {
  if (grid_per_axis < 2) throw std::invalid_argument("check_assumption21: grid_per_axis >= 2");
  const int d = corr.dimension();
  const int m = corr.basis.vertex_count();
  const int coords = m * d;
  const long budget = 1000000;

  Assumption21Result out;
  auto test_point = [&](const Eigen::MatrixXd& w) -> bool {
    ++out.points_checked;
    auto wit = violation_at(corr, w);
    if (wit) {
      out.witness = std::move(wit);
      out.passes = false;
      return true;
    }
    return false;
  };

  // Box vertices first: exact spot checks, conclusive when they fail.
  if (coords <= 20) {
    for (long mask = 0; mask < (1L << coords); ++mask) {
      Eigen::MatrixXd w(m, d);
      for (int c = 0; c < coords; ++c) w(c % m, c / m) = ((mask >> c) & 1) ? corr.box_upper(c / m) : 0.0;
      if (test_point(w)) return out;
    }
  }

  // Uniform grid while it fits the budget, otherwise seeded random fill-in.
  double grid_total = 1.0;
  for (int c = 0; c < coords && grid_total <= budget; ++c) grid_total *= grid_per_axis;
  if (grid_total <= budget) {
    std::vector<int> idx(coords, 0);
    while (true) {
      Eigen::MatrixXd w(m, d);
      for (int c = 0; c < coords; ++c)
        w(c % m, c / m) = corr.box_upper(c / m) * idx[c] / (grid_per_axis - 1);
      if (test_point(w)) return out;
      int c = 0;
      while (c < coords && ++idx[c] == grid_per_axis) idx[c++] = 0;
      if (c == coords) break;
    }
  } else {
    std::mt19937_64 rng(0x5eedu);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (long p = 0; p < 100000; ++p) {
      Eigen::MatrixXd w(m, d);
      for (int c = 0; c < coords; ++c) w(c % m, c / m) = corr.box_upper(c / m) * unif(rng);
      if (test_point(w)) return out;
    }
  }
  out.passes = true;  // no violation found (heuristic)
  return out;
}

}  // namespace superrep
