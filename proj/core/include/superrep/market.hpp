#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "superrep/simplex_basis.hpp"

namespace superrep {

enum class DriverKind { Simplex, ProductCRR };

/// Node address in the event tree: the sequence of branch choices from the
/// root, each in [0, branch_count). Length k addresses a time-k node.
using PathIndex = std::vector<int32_t>;

/// An n-period multinomial market. Per-period price factors are
///   S^i_k = s_i * prod_{m<=k} (1 + <sigma_i, xi_m> / sqrt(n)),
/// with the driver xi uniform on the simplex vertices (complete model) or on
/// {-1,+1}^d (product of CRR models; sigma = I and zero costs only).
/// Costs enter per period as kappa/sqrt(n); `kappa_plus`/`kappa_minus` hold
/// the unscaled coefficients.
struct MarketSpec {
  int d = 0;
  int n = 0;
  Eigen::MatrixXd sigma;         // d x d
  Eigen::VectorXd s0;            // d, initial prices
  Eigen::VectorXd kappa_plus;    // d
  Eigen::VectorXd kappa_minus;   // d
  DriverKind driver = DriverKind::Simplex;
  std::optional<SimplexBasis> basis;  // present iff driver == Simplex

  int branch_count() const { return driver == DriverKind::Simplex ? d + 1 : (1 << d); }

  /// Driver value xi for a branch label (row vector in R^d).
  Eigen::RowVectorXd driver_vector(int branch) const;

  /// d x m matrix of per-step factors 1 + <sigma_i, xi_j>/sqrt(n).
  Eigen::MatrixXd step_factors() const;

  /// Total node count sum_k m^k (kInf-safe); throws when above `cap`.
  double node_count() const;
  double leaf_count() const;

  /// Throws std::invalid_argument when the spec violates its invariants:
  /// invertible sigma (smallest singular value > 1e-10), positive per-step
  /// factors, and the ProductCRR restriction sigma = I, kappa = 0.
  void validate() const;
};

MarketSpec make_simplex_market(int d, int n, Eigen::MatrixXd sigma, Eigen::VectorXd s0,
                               Eigen::VectorXd kappa_plus, Eigen::VectorXd kappa_minus,
                               std::optional<SimplexBasis> basis = std::nullopt);
MarketSpec make_product_crr_market(int d, int n, Eigen::VectorXd s0);

/// All children of `node`, in branch order. Throws std::invalid_argument on a
/// leaf (depth n) or an out-of-range node.
std::vector<PathIndex> children(const MarketSpec& spec, const PathIndex& node);

/// Price vector at a node (empty node = s0).
Eigen::VectorXd asset_prices(const MarketSpec& spec, const PathIndex& node);

/// Prices at every depth 0..k along the path, one row per grid time.
Eigen::MatrixXd path_prices(const MarketSpec& spec, const PathIndex& node);

/// The piecewise-linear interpolation of the path's grid prices evaluated at
/// t in [0,1] (exact at grid points t = k/n). `leaf` must have depth n.
Eigen::VectorXd interpolate_path(const MarketSpec& spec, const PathIndex& leaf, double t);

void check_node(const MarketSpec& spec, const PathIndex& node);

}  // namespace superrep
