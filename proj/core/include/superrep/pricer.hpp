#pragma once

#include <Eigen/Dense>

#include <vector>

#include "superrep/lp.hpp"
#include "superrep/market.hpp"
#include "superrep/payoff.hpp"

namespace superrep {

/// Level-order addressing of the complete m-ary event tree: level k occupies
/// ids [offset(k), offset(k+1)), children of id v are contiguous. Node counts
/// are capped before any allocation.
class TreeLayout {
 public:
  TreeLayout(int n, int m, long node_cap);

  int n() const { return n_; }
  int m() const { return m_; }
  long total_nodes() const { return offsets_[n_ + 1]; }
  long internal_nodes() const { return offsets_[n_]; }
  long first_leaf() const { return offsets_[n_]; }
  long leaf_count() const { return total_nodes() - first_leaf(); }
  long level_offset(int k) const { return offsets_[k]; }

  int depth_of(long id) const;
  long child(long id, int depth, int branch) const {
    return offsets_[depth + 1] + (id - offsets_[depth]) * m_ + branch;
  }
  long parent(long id, int depth) const {
    return offsets_[depth - 1] + (id - offsets_[depth]) / m_;
  }
  long id_of(const PathIndex& node) const;
  PathIndex path_of(long id) const;

 private:
  int n_, m_;
  std::vector<long> offsets_;  // size n + 2
};

/// Self-financing superreplication strategy read off the primal LP: initial
/// cash plus per internal node the post-trade holdings and the split trade
/// volumes (indexed by the TreeLayout node id).
struct HedgingStrategy {
  double initial_cash = 0.0;
  Eigen::MatrixXd gamma;  // internal_nodes x d
  Eigen::MatrixXd buys;   // internal_nodes x d, >= 0
  Eigen::MatrixXd sells;  // internal_nodes x d, >= 0
};

/// Dual optimizer of the consistent-price-system LP: a leaf measure together
/// with the measure-weighted shadow prices y = q * M at every node. Where
/// q > 0 the shadow price M stays inside the bid-ask band
///   (1 - kappa^-/sqrt n) S <= M <= (1 + kappa^+/sqrt n) S
/// and aggregates as a martingale.
struct ConsistentPriceSystem {
  Eigen::VectorXd q;  // total_nodes, node masses (q at a leaf = leaf measure)
  Eigen::MatrixXd y;  // total_nodes x d

  /// Shadow price at a node with q > threshold; throws otherwise.
  Eigen::VectorXd shadow_price(long node, double threshold = 1e-12) const;

  /// Max violations of the martingale-aggregation and band invariants,
  /// relative to 1 + |q S|.
  struct Violations {
    double aggregation = 0.0;
    double band = 0.0;
  };
};

ConsistentPriceSystem::Violations cps_violations(const MarketSpec& spec, const TreeLayout& tree,
                                                 const ConsistentPriceSystem& cps);

struct PricerOptions {
  long node_cap = 100000;
  SolverOptions lp;
};

/// Hedging LP: minimize initial cash x over (x, gamma, buys, sells,
/// liquidation splits) subject to one terminal-wealth inequality per leaf.
/// The max(0, +-dgamma) terms are linearized exactly by the buy/sell split.
LinearProgram build_primal_lp(const MarketSpec& spec, const Payoff& payoff,
                              const PricerOptions& options = {});

/// Consistent-price-system LP: maximize sum_leaf q F over (q, y) with q >= 0,
/// q(root) = 1, per-node aggregation equalities and band inequalities (the
/// bilinear band in (q, M) is linear in y = q M).
LinearProgram build_dual_lp(const MarketSpec& spec, const Payoff& payoff,
                            const PricerOptions& options = {});

struct PricingResult {
  double value = 0.0;         // dual optimum (the reported price)
  double primal_value = 0.0;  // hedging LP optimum
  double gap = 0.0;           // |primal - dual|
  HedgingStrategy hedge;
  ConsistentPriceSystem cps;
  long iterations = 0;  // total simplex iterations over both LPs
  double wall_seconds = 0.0;
};

/// Exact superreplication price on the finite tree via both LPs; validates
/// the CPS invariants before returning. Throws std::runtime_error when either
/// LP fails to reach optimality.
PricingResult superreplication_price(const MarketSpec& spec, const Payoff& payoff,
                                     const PricerOptions& options = {});

}  // namespace superrep
