#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "superrep/corridor.hpp"
#include "superrep/market.hpp"
#include "superrep/payoff.hpp"

namespace superrep {

/// Variance target as a continuous function of the driver's stochastic
/// logarithm sampled at earlier times: a piecewise-multilinear lookup over a
/// grid of sampled N values. Inputs are the concatenated coordinates of N at
/// the sample times (n_l * d scalars); evaluation clamps to the grid hull.
struct FeedbackRule {
  std::vector<double> sample_times;           // t_1 < ... <= segment start
  std::vector<std::vector<double>> axes;      // one strictly increasing axis per input scalar
  std::vector<Eigen::MatrixXd> table;         // row-major over the axes, d x d variance targets

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& inputs) const;
  void validate(int d) const;
};

struct VolControlSegment {
  std::optional<Eigen::MatrixXd> constant;  // d x d variance target
  std::optional<FeedbackRule> feedback;
};

/// Piecewise-constant volatility control alpha_t = sum_l alpha_l 1_{(T_l, T_{l+1}]}:
/// on each interval the variance target is a fixed Gamma member or a feedback
/// rule; the first segment must be constant (no history to read).
struct PiecewiseVolControl {
  std::vector<double> breakpoints;          // 0 = T_0 < ... < T_{L+1} = 1
  std::vector<VolControlSegment> segments;  // size L+1
  double eps_pd = 1e-8;  // targets must dominate eps_pd * I (set 0 to probe degenerate controls)

  static PiecewiseVolControl constant(Eigen::MatrixXd variance_target);

  int segment_count() const { return static_cast<int>(segments.size()); }
};

/// Checks the control against the corridor: every constant target and every
/// feedback table entry must be symmetric, a Gamma member (psi feasibility)
/// and must dominate eps_pd * I. Throws on violation.
void validate_control(const VolatilityCorridor& corr, const PiecewiseVolControl& control);

/// Path values of the shadow-price construction: the perturbation A (zero at
/// the root, ramped over the first [sqrt n] periods, blended across [sqrt n]
/// periods at every breakpoint, plateau value (xi_k Psi(target) +
/// Phi(Psi(target)))/sqrt(n) in between), the shadow prices M = S (1 + A),
/// the increments N (Delta N = Delta M / S_prev) and X (Delta X =
/// <sigma_i, xi_k>/sqrt(n) (1 + A_k)). Rows are grid times 0..n.
struct KusuokaProcesses {
  Eigen::MatrixXd perturbation;  // A
  Eigen::MatrixXd shadow;        // M
  Eigen::MatrixXd log_proxy;     // N
  Eigen::MatrixXd driver_sum;    // X
};

KusuokaProcesses build_A_process(const MarketSpec& spec, const PiecewiseVolControl& control,
                                 const PathIndex& path);

struct NodeFeasibility {
  bool feasible = false;
  Eigen::VectorXd q;      // branch probabilities of the margin-maximal measure
  double margin = 0.0;    // maximal min-branch probability; feasible iff > 0
};

/// Small LP at one node: a probability vector over the branches under which
/// the next N increment has zero conditional mean, chosen margin-maximal.
NodeFeasibility node_mm_feasibility(const MarketSpec& spec, const PiecewiseVolControl& control,
                                    const PathIndex& node);

struct McInfeasibleNode : std::runtime_error {
  PathIndex node;
  McInfeasibleNode(std::string what, PathIndex where)
      : std::runtime_error(std::move(what)), node(std::move(where)) {}
};

struct McResult {
  double estimate = 0.0;
  double standard_error = 0.0;
  long paths = 0;
  long infeasible_nodes = 0;  // zero on success (infeasibility aborts)
};

/// Monte Carlo lower bound: samples paths branch-by-branch from the per-node
/// margin-maximal measures and averages the payoff; by duality the mean is a
/// lower bound for the superreplication price. Deterministic given the seed
/// (per-path substreams, fixed-order reduction). Throws McInfeasibleNode when
/// a sampled node admits no equivalent martingale measure.
McResult mc_lower_bound(const MarketSpec& spec, const PiecewiseVolControl& control,
                        const Payoff& payoff, long paths, std::uint64_t seed);

/// One full-depth path drawn from the same per-node measures mc_lower_bound
/// averages over (quadratic-variation diagnostics sample under this law).
PathIndex sample_path(const MarketSpec& spec, const PiecewiseVolControl& control,
                      std::uint64_t seed);

}  // namespace superrep
