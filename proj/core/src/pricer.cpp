#include "superrep/pricer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace superrep {

TreeLayout::TreeLayout(int n, int m, long node_cap) : n_(n), m_(m) {
  if (n < 1 || m < 2) throw std::invalid_argument("TreeLayout: need n >= 1 and m >= 2");
  offsets_.assign(n + 2, 0);
  double level = 1.0, total = 0.0;
  for (int k = 0; k <= n; ++k) {
    offsets_[k] = static_cast<long>(total);
    total += level;
    level *= m;
    if (total > static_cast<double>(node_cap))
      throw std::invalid_argument("TreeLayout: tree exceeds the node cap of " +
                                  std::to_string(node_cap) + " nodes");
  }
  offsets_[n + 1] = static_cast<long>(total);
}

int TreeLayout::depth_of(long id) const {
  for (int k = 0; k <= n_; ++k)
    if (id < offsets_[k + 1]) return k;
  throw std::invalid_argument("TreeLayout: id out of range");
}

long TreeLayout::id_of(const PathIndex& node) const {
  long id = 0;
  int depth = 0;
  for (int32_t b : node) {
    if (b < 0 || b >= m_) throw std::invalid_argument("TreeLayout: branch out of range");
    id = child(id, depth, b);
    ++depth;
  }
  return id;
}

PathIndex TreeLayout::path_of(long id) const {
  const int depth = depth_of(id);
  PathIndex path(depth);
  long v = id;
  for (int k = depth; k > 0; --k) {
    const long p = parent(v, k);
    path[k - 1] = static_cast<int32_t>(v - child(p, k - 1, 0));
    v = p;
  }
  return path;
}

namespace {

// Prices at every node, one row per node id.
Eigen::MatrixXd node_price_table(const MarketSpec& spec, const TreeLayout& tree) {
  const Eigen::MatrixXd factors = spec.step_factors();
  Eigen::MatrixXd prices(tree.total_nodes(), spec.d);
  prices.row(0) = spec.s0.transpose();
  for (int k = 0; k < tree.n(); ++k) {
    for (long v = tree.level_offset(k); v < tree.level_offset(k + 1); ++v) {
      for (int b = 0; b < tree.m(); ++b) {
        prices.row(tree.child(v, k, b)) =
            prices.row(v).cwiseProduct(factors.col(b).transpose());
      }
    }
  }
  return prices;
}

// Payoff value per leaf, using the price table (path-dependent payoffs read
// the ancestor rows).
Eigen::VectorXd leaf_payoffs(const MarketSpec& spec, const TreeLayout& tree,
                             const Eigen::MatrixXd& prices, const Payoff& payoff) {
  const long first = tree.first_leaf();
  Eigen::VectorXd values(tree.leaf_count());
  if (payoff.terminal_only()) {
    for (long leaf = first; leaf < tree.total_nodes(); ++leaf)
      values(leaf - first) = payoff.terminal_value(prices.row(leaf).transpose());
    return values;
  }
  Eigen::MatrixXd samples(tree.n() + 1, spec.d);
  for (long leaf = first; leaf < tree.total_nodes(); ++leaf) {
    long v = leaf;
    for (int k = tree.n(); k >= 0; --k) {
      samples.row(k) = prices.row(v);
      if (k > 0) v = tree.parent(v, k);
    }
    values(leaf - first) = payoff.value_on_samples(samples);
  }
  return values;
}

}  // namespace

LinearProgram build_primal_lp(const MarketSpec& spec, const Payoff& payoff,
                              const PricerOptions& options) {
  spec.validate();
  const TreeLayout tree(spec.n, spec.branch_count(), options.node_cap);
  const Eigen::MatrixXd prices = node_price_table(spec, tree);
  const Eigen::VectorXd payoffs = leaf_payoffs(spec, tree, prices, payoff);

  const int d = spec.d;
  const long internal = tree.internal_nodes();
  const long last_level = tree.level_offset(tree.n() - 1);
  const long last_count = internal - last_level;  // depth n-1 nodes
  const double root_n = std::sqrt(static_cast<double>(spec.n));
  const Eigen::VectorXd ask = Eigen::VectorXd::Ones(d) + spec.kappa_plus / root_n;
  const Eigen::VectorXd bid = Eigen::VectorXd::Ones(d) - spec.kappa_minus / root_n;

  LinearProgram lp;
  lp.sense = ObjSense::Minimize;
  const int x_var = lp.add_variable(1.0, -kInf, kInf);
  // Variable blocks: gamma (free), buys/sells (>= 0) per internal node, and
  // the terminal liquidation split (long part p, short part q) per depth-(n-1)
  // node. The split is exact: churn only lowers terminal wealth.
  const long gamma0 = 1;
  const long buy0 = gamma0 + internal * d;
  const long sell0 = buy0 + internal * d;
  const long liq_p0 = sell0 + internal * d;
  const long liq_q0 = liq_p0 + last_count * d;
  auto gamma_var = [&](long v, int i) { return static_cast<int>(gamma0 + v * d + i); };
  auto buy_var = [&](long v, int i) { return static_cast<int>(buy0 + v * d + i); };
  auto sell_var = [&](long v, int i) { return static_cast<int>(sell0 + v * d + i); };
  auto liq_p_var = [&](long v, int i) { return static_cast<int>(liq_p0 + (v - last_level) * d + i); };
  auto liq_q_var = [&](long v, int i) { return static_cast<int>(liq_q0 + (v - last_level) * d + i); };
  for (long v = 0; v < internal; ++v)
    for (int i = 0; i < d; ++i) lp.add_variable(0.0, -kInf, kInf);  // gamma
  for (long v = 0; v < 2 * internal + 2 * last_count; ++v)
    for (int i = 0; i < d; ++i) lp.add_variable(0.0, 0.0, kInf);  // buys, sells, p, q

  // Trade-flow conservation: buys - sells = gamma - gamma(parent).
  for (int k = 0; k < tree.n(); ++k) {
    for (long v = tree.level_offset(k); v < tree.level_offset(k + 1); ++v) {
      for (int i = 0; i < d; ++i) {
        const int row = lp.add_row(RowSense::Equal, 0.0);
        lp.add_entry(row, buy_var(v, i), 1.0);
        lp.add_entry(row, sell_var(v, i), -1.0);
        lp.add_entry(row, gamma_var(v, i), -1.0);
        if (k > 0) lp.add_entry(row, gamma_var(tree.parent(v, k), i), 1.0);
      }
    }
  }
  // Terminal liquidation split: p - q = gamma at depth n-1.
  for (long v = last_level; v < internal; ++v) {
    for (int i = 0; i < d; ++i) {
      const int row = lp.add_row(RowSense::Equal, 0.0);
      lp.add_entry(row, liq_p_var(v, i), 1.0);
      lp.add_entry(row, liq_q_var(v, i), -1.0);
      lp.add_entry(row, gamma_var(v, i), -1.0);
    }
  }
  // One terminal-wealth inequality per leaf: x plus liquidation proceeds
  // minus cumulative trading costs dominates the payoff.
  for (long leaf = tree.first_leaf(); leaf < tree.total_nodes(); ++leaf) {
    const int row = lp.add_row(RowSense::GreaterEqual, payoffs(leaf - tree.first_leaf()));
    lp.add_entry(row, x_var, 1.0);
    const long pn1 = tree.parent(leaf, tree.n());
    for (int i = 0; i < d; ++i) {
      lp.add_entry(row, liq_p_var(pn1, i), bid(i) * prices(leaf, i));
      lp.add_entry(row, liq_q_var(pn1, i), -ask(i) * prices(leaf, i));
    }
    long v = pn1;
    for (int k = tree.n() - 1; k >= 0; --k) {
      for (int i = 0; i < d; ++i) {
        lp.add_entry(row, buy_var(v, i), -ask(i) * prices(v, i));
        lp.add_entry(row, sell_var(v, i), bid(i) * prices(v, i));
      }
      if (k > 0) v = tree.parent(v, k);
    }
  }
  return lp;
}

LinearProgram build_dual_lp(const MarketSpec& spec, const Payoff& payoff,
                            const PricerOptions& options) {
  spec.validate();
  const TreeLayout tree(spec.n, spec.branch_count(), options.node_cap);
  const Eigen::MatrixXd prices = node_price_table(spec, tree);
  const Eigen::VectorXd payoffs = leaf_payoffs(spec, tree, prices, payoff);

  const int d = spec.d;
  const long total = tree.total_nodes();
  const double root_n = std::sqrt(static_cast<double>(spec.n));
  const Eigen::VectorXd ask = Eigen::VectorXd::Ones(d) + spec.kappa_plus / root_n;
  const Eigen::VectorXd bid = Eigen::VectorXd::Ones(d) - spec.kappa_minus / root_n;

  LinearProgram lp;
  lp.sense = ObjSense::Maximize;
  auto q_var = [&](long v) { return static_cast<int>(v); };
  auto y_var = [&](long v, int i) { return static_cast<int>(total + v * d + i); };
  for (long v = 0; v < total; ++v) {
    const bool is_leaf = v >= tree.first_leaf();
    lp.add_variable(is_leaf ? payoffs(v - tree.first_leaf()) : 0.0, 0.0, kInf);
  }
  for (long v = 0; v < total; ++v)
    for (int i = 0; i < d; ++i) lp.add_variable(0.0, -kInf, kInf);

  {  // Normalization q(root) = 1.
    const int row = lp.add_row(RowSense::Equal, 1.0);
    lp.add_entry(row, q_var(0), 1.0);
  }
  // Aggregation: node mass and measure-weighted prices sum over children.
  for (int k = 0; k < tree.n(); ++k) {
    for (long v = tree.level_offset(k); v < tree.level_offset(k + 1); ++v) {
      int row = lp.add_row(RowSense::Equal, 0.0);
      lp.add_entry(row, q_var(v), -1.0);
      for (int b = 0; b < tree.m(); ++b) lp.add_entry(row, q_var(tree.child(v, k, b)), 1.0);
      for (int i = 0; i < d; ++i) {
        row = lp.add_row(RowSense::Equal, 0.0);
        lp.add_entry(row, y_var(v, i), -1.0);
        for (int b = 0; b < tree.m(); ++b) lp.add_entry(row, y_var(tree.child(v, k, b), i), 1.0);
      }
    }
  }
  // Bid-ask band at every node; collapses to an equality for a frictionless
  // asset.
  for (long v = 0; v < total; ++v) {
    for (int i = 0; i < d; ++i) {
      if (spec.kappa_plus(i) == 0.0 && spec.kappa_minus(i) == 0.0) {
        const int row = lp.add_row(RowSense::Equal, 0.0);
        lp.add_entry(row, y_var(v, i), 1.0);
        lp.add_entry(row, q_var(v), -prices(v, i));
      } else {
        int row = lp.add_row(RowSense::LessEqual, 0.0);
        lp.add_entry(row, y_var(v, i), 1.0);
        lp.add_entry(row, q_var(v), -ask(i) * prices(v, i));
        row = lp.add_row(RowSense::GreaterEqual, 0.0);
        lp.add_entry(row, y_var(v, i), 1.0);
        lp.add_entry(row, q_var(v), -bid(i) * prices(v, i));
      }
    }
  }
  return lp;
}

Eigen::VectorXd ConsistentPriceSystem::shadow_price(long node, double threshold) const {
  if (node < 0 || node >= q.size()) throw std::invalid_argument("shadow_price: node out of range");
  if (!(q(node) > threshold))
    throw std::invalid_argument("shadow_price: node mass below threshold, M undefined");
  return y.row(node).transpose() / q(node);
}

ConsistentPriceSystem::Violations cps_violations(const MarketSpec& spec, const TreeLayout& tree,
                                                 const ConsistentPriceSystem& cps) {
  const Eigen::MatrixXd prices = node_price_table(spec, tree);
  const double root_n = std::sqrt(static_cast<double>(spec.n));
  ConsistentPriceSystem::Violations out;
  for (int k = 0; k < tree.n(); ++k) {
    for (long v = tree.level_offset(k); v < tree.level_offset(k + 1); ++v) {
      double qsum = -cps.q(v);
      Eigen::VectorXd ysum = -cps.y.row(v).transpose();
      for (int b = 0; b < tree.m(); ++b) {
        const long c = tree.child(v, k, b);
        qsum += cps.q(c);
        ysum += cps.y.row(c).transpose();
      }
      const double scale = 1.0 + std::abs(cps.q(v));
      out.aggregation = std::max(out.aggregation, std::abs(qsum) / scale);
      for (int i = 0; i < spec.d; ++i)
        out.aggregation =
            std::max(out.aggregation, std::abs(ysum(i)) / (1.0 + std::abs(cps.y(v, i))));
    }
  }
  for (long v = 0; v < tree.total_nodes(); ++v) {
    for (int i = 0; i < spec.d; ++i) {
      const double qs = cps.q(v) * prices(v, i);
      const double hi = (1.0 + spec.kappa_plus(i) / root_n) * qs;
      const double lo = (1.0 - spec.kappa_minus(i) / root_n) * qs;
      const double scale = 1.0 + std::abs(qs);
      out.band = std::max(out.band, (cps.y(v, i) - hi) / scale);
      out.band = std::max(out.band, (lo - cps.y(v, i)) / scale);
    }
  }
  out.band = std::max(out.band, 0.0);
  return out;
}

PricingResult superreplication_price(const MarketSpec& spec, const Payoff& payoff,
                                     const PricerOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const TreeLayout tree(spec.n, spec.branch_count(), options.node_cap);
  const int d = spec.d;
  const long internal = tree.internal_nodes();
  const long total = tree.total_nodes();

  const LinearProgram primal = build_primal_lp(spec, payoff, options);
  const LPSolution psol = solve_lp(primal, options.lp);
  if (psol.status != LPStatus::Optimal)
    throw std::runtime_error("superreplication_price: hedging LP not optimal (status " +
                             std::to_string(static_cast<int>(psol.status)) + ")");

  const LinearProgram dual = build_dual_lp(spec, payoff, options);
  const LPSolution dsol = solve_lp(dual, options.lp);
  if (dsol.status != LPStatus::Optimal)
    throw std::runtime_error("superreplication_price: price-system LP not optimal (status " +
                             std::to_string(static_cast<int>(dsol.status)) + ")");

  PricingResult out;
  out.value = dsol.objective;
  out.primal_value = psol.objective;
  out.gap = std::abs(psol.objective - dsol.objective);
  out.iterations = psol.iterations + dsol.iterations;

  out.hedge.initial_cash = psol.primal[0];
  out.hedge.gamma.resize(internal, d);
  out.hedge.buys.resize(internal, d);
  out.hedge.sells.resize(internal, d);
  const long gamma0 = 1, buy0 = gamma0 + internal * d, sell0 = buy0 + internal * d;
  for (long v = 0; v < internal; ++v) {
    for (int i = 0; i < d; ++i) {
      out.hedge.gamma(v, i) = psol.primal[gamma0 + v * d + i];
      out.hedge.buys(v, i) = psol.primal[buy0 + v * d + i];
      out.hedge.sells(v, i) = psol.primal[sell0 + v * d + i];
    }
  }

  out.cps.q.resize(total);
  out.cps.y.resize(total, d);
  for (long v = 0; v < total; ++v) {
    out.cps.q(v) = dsol.primal[v];
    for (int i = 0; i < d; ++i) out.cps.y(v, i) = dsol.primal[total + v * d + i];
  }
  const auto viol = cps_violations(spec, tree, out.cps);
  if (viol.aggregation > 1e-9 || viol.band > 1e-9)
    throw std::runtime_error("superreplication_price: optimal price system violates its invariants");

  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace superrep
