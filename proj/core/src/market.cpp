#include "superrep/market.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace superrep {

Eigen::RowVectorXd MarketSpec::driver_vector(int branch) const {
  if (branch < 0 || branch >= branch_count())
    throw std::invalid_argument("MarketSpec: branch label out of range");
  if (driver == DriverKind::Simplex) return basis->vertex(branch);
  Eigen::RowVectorXd xi(d);
  for (int i = 0; i < d; ++i) xi(i) = (branch >> i) & 1 ? 1.0 : -1.0;
  return xi;
}

Eigen::MatrixXd MarketSpec::step_factors() const {
  const int m = branch_count();
  const double root_n = std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd factors(d, m);
  for (int j = 0; j < m; ++j) {
    const Eigen::VectorXd xi = driver_vector(j).transpose();
    factors.col(j) = Eigen::VectorXd::Ones(d) + sigma * xi / root_n;
  }
  return factors;
}

double MarketSpec::node_count() const {
  const double m = branch_count();
  double total = 0.0, level = 1.0;
  for (int k = 0; k <= n; ++k) {
    total += level;
    level *= m;
    if (total > 1e18) return std::numeric_limits<double>::infinity();
  }
  return total;
}

double MarketSpec::leaf_count() const { return std::pow(static_cast<double>(branch_count()), n); }

void MarketSpec::validate() const {
  if (d < 1) throw std::invalid_argument("MarketSpec: d must be positive");
  if (n < 1) throw std::invalid_argument("MarketSpec: n must be positive");
  if (sigma.rows() != d || sigma.cols() != d)
    throw std::invalid_argument("MarketSpec: sigma must be d x d");
  if (s0.size() != d || kappa_plus.size() != d || kappa_minus.size() != d)
    throw std::invalid_argument("MarketSpec: s0 and kappa vectors must have length d");
  if ((s0.array() <= 0.0).any()) throw std::invalid_argument("MarketSpec: initial prices must be positive");
  if ((kappa_plus.array() < 0.0).any() || (kappa_minus.array() < 0.0).any())
    throw std::invalid_argument("MarketSpec: cost coefficients must be nonnegative");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sigma);
  if (svd.singularValues()(d - 1) <= 1e-10)
    throw std::invalid_argument("MarketSpec: sigma is singular (smallest singular value <= 1e-10)");

  if (driver == DriverKind::Simplex) {
    if (!basis.has_value() || basis->dimension() != d)
      throw std::invalid_argument("MarketSpec: simplex driver requires a basis of matching dimension");
    // Nonnegative prices: every per-step factor must be >= 0. The boundary
    // (a zero price) is admitted; it shows up in the one-period examples.
    const double worst = (sigma * basis->vertices().transpose()).cwiseAbs().maxCoeff();
    if (worst / std::sqrt(static_cast<double>(n)) > 1.0 + 1e-12)
      throw std::invalid_argument(
          "MarketSpec: |<sigma_i, v_j>|/sqrt(n) > 1 admits negative prices (n too small)");
  } else {
    if (d > 30) throw std::invalid_argument("MarketSpec: ProductCRR supports d <= 30");
    if (!sigma.isIdentity(1e-14))
      throw std::invalid_argument("MarketSpec: ProductCRR driver requires sigma = I");
    if (kappa_plus.cwiseAbs().maxCoeff() > 0.0 || kappa_minus.cwiseAbs().maxCoeff() > 0.0)
      throw std::invalid_argument("MarketSpec: ProductCRR driver requires zero cost coefficients");
    // Factors 1 +- 1/sqrt(n) are nonnegative for every n >= 1; the n = 1
    // boundary (zero price on the down move) is allowed for this driver.
  }
}

MarketSpec make_simplex_market(int d, int n, Eigen::MatrixXd sigma, Eigen::VectorXd s0,
                               Eigen::VectorXd kappa_plus, Eigen::VectorXd kappa_minus,
                               std::optional<SimplexBasis> basis) {
  MarketSpec spec;
  spec.d = d;
  spec.n = n;
  spec.sigma = std::move(sigma);
  spec.s0 = std::move(s0);
  spec.kappa_plus = std::move(kappa_plus);
  spec.kappa_minus = std::move(kappa_minus);
  spec.driver = DriverKind::Simplex;
  spec.basis = basis.has_value() ? std::move(basis) : std::optional<SimplexBasis>(SimplexBasis::canonical(d));
  spec.validate();
  return spec;
}

MarketSpec make_product_crr_market(int d, int n, Eigen::VectorXd s0) {
  MarketSpec spec;
  spec.d = d;
  spec.n = n;
  spec.sigma = Eigen::MatrixXd::Identity(d, d);
  spec.s0 = std::move(s0);
  spec.kappa_plus = Eigen::VectorXd::Zero(d);
  spec.kappa_minus = Eigen::VectorXd::Zero(d);
  spec.driver = DriverKind::ProductCRR;
  spec.validate();
  return spec;
}

void check_node(const MarketSpec& spec, const PathIndex& node) {
  if (static_cast<int>(node.size()) > spec.n)
    throw std::invalid_argument("PathIndex: node deeper than the tree");
  const int m = spec.branch_count();
  for (int32_t b : node)
    if (b < 0 || b >= m) throw std::invalid_argument("PathIndex: branch label out of range");
}

std::vector<PathIndex> children(const MarketSpec& spec, const PathIndex& node) {
  check_node(spec, node);
  if (static_cast<int>(node.size()) >= spec.n)
    throw std::invalid_argument("children: node at depth n is a leaf");
  const int m = spec.branch_count();
  std::vector<PathIndex> out;
  out.reserve(m);
  for (int b = 0; b < m; ++b) {
    PathIndex child = node;
    child.push_back(b);
    out.push_back(std::move(child));
  }
  return out;
}

Eigen::VectorXd asset_prices(const MarketSpec& spec, const PathIndex& node) {
  check_node(spec, node);
  const Eigen::MatrixXd factors = spec.step_factors();
  Eigen::VectorXd prices = spec.s0;
  for (int32_t b : node) prices = prices.cwiseProduct(factors.col(b));
  return prices;
}

Eigen::MatrixXd path_prices(const MarketSpec& spec, const PathIndex& node) {
  check_node(spec, node);
  const Eigen::MatrixXd factors = spec.step_factors();
  Eigen::MatrixXd out(node.size() + 1, spec.d);
  Eigen::VectorXd prices = spec.s0;
  out.row(0) = prices.transpose();
  for (std::size_t k = 0; k < node.size(); ++k) {
    prices = prices.cwiseProduct(factors.col(node[k]));
    out.row(k + 1) = prices.transpose();
  }
  return out;
}

Eigen::VectorXd interpolate_path(const MarketSpec& spec, const PathIndex& leaf, double t) {
  if (static_cast<int>(leaf.size()) != spec.n)
    throw std::invalid_argument("interpolate_path: expected a full-depth leaf");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("interpolate_path: t outside [0,1]");
  const Eigen::MatrixXd prices = path_prices(spec, leaf);
  const double nt = spec.n * t;
  const int k = std::min(static_cast<int>(std::floor(nt)), spec.n - 1);
  const double frac = nt - k;
  return ((1.0 - frac) * prices.row(k) + frac * prices.row(k + 1)).transpose();
}

}  // namespace superrep
