#pragma once

#include <Eigen/Dense>

#include <optional>

#include "superrep/market.hpp"
#include "superrep/simplex_basis.hpp"

namespace superrep {

/// The scaling limit's control geometry: the cost polytope
///   B = { [b_1 ... b_d] : b_k = sum_j w_jk v_j',  0 <= w_jk <= c_k },
///   c_k = (kappa_k^+ + kappa_k^-)/(d+1),
/// and the induced volatility set Gamma = { sigma sigma' + sigma b + b' sigma' }.
/// Coordinates w are (d+1) x d matrices over the box.
struct VolatilityCorridor {
  SimplexBasis basis;
  Eigen::MatrixXd sigma;       // d x d
  Eigen::VectorXd box_upper;   // c_k per column
  Eigen::VectorXd kappa_plus;  // unscaled coefficients
  Eigen::VectorXd kappa_minus;

  int dimension() const { return basis.dimension(); }
};

VolatilityCorridor make_corridor(const SimplexBasis& basis, Eigen::MatrixXd sigma,
                                 Eigen::VectorXd kappa_plus, Eigen::VectorXd kappa_minus);
/// Corridor of a simplex-driver market (throws for ProductCRR).
VolatilityCorridor make_corridor(const MarketSpec& spec);

/// Column map: beta column k = sum_j w_jk v_j'. Throws when w leaves the box.
Eigen::MatrixXd beta_from_w(const VolatilityCorridor& corr, const Eigen::MatrixXd& w);

/// a = sigma sigma' + sigma beta + beta' sigma' (exactly symmetric).
Eigen::MatrixXd gamma_from_beta(const VolatilityCorridor& corr, const Eigen::MatrixXd& beta);

struct LinearSupResult {
  double value = 0.0;
  Eigen::MatrixXd w;  // maximizing box point
  Eigen::MatrixXd a;  // Gamma member attaining the sup
};

/// max over Gamma of trace(weight * a). The objective is linear in each box
/// coordinate w_jk with coefficient 2 (v_j sigma' weight)_k, so the maximizer
/// clamps each coordinate to c_k or 0 by the coefficient sign.
LinearSupResult sup_linear_over_gamma(const VolatilityCorridor& corr, const Eigen::MatrixXd& weight);

/// Selection Psi: a box-feasible beta with gamma_from_beta(beta) = a, chosen
/// as the minimizer of sum w_jk (feasibility LP). Throws NotInGamma when the
/// LP is infeasible: this doubles as the Gamma-membership test.
struct NotInGamma : std::runtime_error {
  using std::runtime_error::runtime_error;
};
Eigen::MatrixXd psi(const VolatilityCorridor& corr, const Eigen::MatrixXd& a);

/// Shift Phi: the vector with v_i beta + Phi(beta) in prod_k [-kappa_k^-,
/// kappa_k^+] for every vertex i. Uses the column reconstruction
/// (v_i beta)_k = (d+1) w_ik - sum_j w_jk normalized so min_i w_ik = 0.
/// Throws NotInB when the reconstructed w leaves the box.
struct NotInB : std::runtime_error {
  using std::runtime_error::runtime_error;
};
Eigen::VectorXd phi(const VolatilityCorridor& corr, const Eigen::MatrixXd& beta);

struct Lemma61Result {
  bool passes = false;
  double worst_norm = 0.0;  // max over cost-box vertices x of |x (sigma')^{-1}|
  double bound = 0.0;       // 1 / (2 sqrt d)
};

/// Sufficient condition for the shadow-price feasibility assumption: passes
/// when |x (sigma')^{-1}| < 1/(2 sqrt d) on the vertices of
/// prod_k [-(kappa_k^- + kappa_k^+), kappa_k^- + kappa_k^+].
Lemma61Result check_lemma61(const VolatilityCorridor& corr);

struct FeasibilityWitness {
  Eigen::MatrixXd beta;
  int i = -1, j = -1;     // vertex pair; -1 for a singularity witness
  double value = 0.0;     // v_i beta (sigma' + beta)^{-1} v_j' at the witness
  bool singular = false;  // sigma' + beta not invertible
};

struct Assumption21Result {
  bool passes = false;     // heuristic when true (grid search), conclusive when false
  long points_checked = 0;
  std::optional<FeasibilityWitness> witness;
};

/// Searches the box vertices plus a uniform grid (grid_per_axis points per
/// w coordinate, capped at 1e6 total points with seeded random fill-in) for
/// violations of the interior condition v_i beta (sigma'+beta)^{-1} v_j' > -1.
Assumption21Result check_assumption21(const VolatilityCorridor& corr, int grid_per_axis);

}  // namespace superrep
