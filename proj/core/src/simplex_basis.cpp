#include "superrep/simplex_basis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace superrep {

namespace {

constexpr double kValidateTol = 1e-9;

}  // namespace

SimplexBasis::SimplexBasis(Eigen::MatrixXd vertices)
    : d_(static_cast<int>(vertices.cols())), vertices_(std::move(vertices)) {}

SimplexBasis SimplexBasis::canonical(int d) {
  if (d < 1 || d >= std::numeric_limits<int>::max() - 1) {
    throw std::invalid_argument("SimplexBasis: dimension must satisfy 1 <= d < INT_MAX-1");
  }
  const int m = d + 1;

  // Centered corners of the unit simplex in R^{d+1}, rescaled so that the
  // rows have squared norm d.
  Eigen::MatrixXd corners(m, m);
  const double center = 1.0 / m;
  const double scale = std::sqrt(static_cast<double>(m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      corners(i, j) = scale * ((i == j ? 1.0 : 0.0) - center);
    }
  }

  // Orthonormal frame of the hyperplane 1^perp from the first d coordinate
  // directions, via modified Gram-Schmidt with one re-orthogonalization pass.
  Eigen::MatrixXd frame(d, m);
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
    g(k) = 1.0;
    g.array() -= center;
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < k; ++j) {
        g -= frame.row(j).dot(g) * frame.row(j).transpose();
      }
    }
    frame.row(k) = g.transpose() / g.norm();
  }

  Eigen::MatrixXd vertices = corners * frame.transpose();
  return SimplexBasis(std::move(vertices));
}

SimplexBasis SimplexBasis::from_vertices(const Eigen::MatrixXd& vertices) {
  if (vertices.rows() != vertices.cols() + 1 || vertices.cols() < 1) {
    throw std::invalid_argument("SimplexBasis: expected a (d+1) x d vertex matrix");
  }
  const double residual = gram_residual(vertices);
  if (!(residual <= kValidateTol)) {
    throw std::invalid_argument("SimplexBasis: vertices fail the regular-simplex identities, residual " +
                                std::to_string(residual));
  }
  return SimplexBasis(vertices);
}

SimplexBasis SimplexBasis::rotated(const Eigen::MatrixXd& q) const {
  if (q.rows() != d_ || q.cols() != d_) {
    throw std::invalid_argument("SimplexBasis::rotated: q must be d x d");
  }
  const double ortho = (q.transpose() * q - Eigen::MatrixXd::Identity(d_, d_)).cwiseAbs().maxCoeff();
  if (!(ortho <= 1e-10)) {
    throw std::invalid_argument("SimplexBasis::rotated: q is not orthogonal");
  }
  return from_vertices(vertices_ * q.transpose());
}

double gram_residual(const Eigen::MatrixXd& vertices) {
  const auto m = vertices.rows();
  const auto d = vertices.cols();
  Eigen::MatrixXd gram = vertices * vertices.transpose();
  Eigen::MatrixXd target = static_cast<double>(m) * Eigen::MatrixXd::Identity(m, m) -
                           Eigen::MatrixXd::Ones(m, m);
  double residual = (gram - target).cwiseAbs().maxCoeff();
  Eigen::RowVectorXd colsum = vertices.colwise().sum();
  if (d > 0) {
    residual = std::max(residual, colsum.cwiseAbs().maxCoeff());
  }
  return residual;
}

double gram_residual(const SimplexBasis& basis) { return gram_residual(basis.vertices()); }

std::string basis_to_json(const SimplexBasis& basis) {
  const Eigen::MatrixXd& v = basis.vertices();
  std::string out = "[";
  char buf[64];
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    out += (i == 0) ? "[" : ",[";
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", v(i, j));
      if (j > 0) out += ",";
      out += buf;
    }
    out += "]";
  }
  out += "]";
  return out;
}

}  // namespace superrep
