#pragma once

#include <Eigen/Dense>
#include <string>

namespace superrep {

/// Driver vectors of the complete multinomial reference market.
///
/// A SimplexBasis holds d+1 row vectors v_1,...,v_{d+1} in R^d forming a
/// regular simplex centered at the origin:
///
///   <v_i, v_i> = d,          <v_i, v_j> = -1   (i != j),
///   sum_j v_j  = 0,          sum_j v_j' v_j = (d+1) I.
///
/// Equivalently, the (d+1)x(d+1) Gram matrix equals (d+1) I - J with J the
/// all-ones matrix, and any d of the vertices are linearly independent.
/// Note the squared-norm convention <v_i,v_i> = d: it is the only one under
/// which the zero-sum and second-moment identities above hold simultaneously
/// (with |v_i| = d they cannot, as the d = 2 vertex set (0,sqrt 2), ... shows).
class SimplexBasis {
public:
  /// Deterministic canonical construction: take the centered corners of the
  /// unit simplex in R^{d+1}, rescale rows to squared norm d, and express
  /// them in the orthonormal frame obtained by Gram-Schmidt on the first d
  /// coordinate directions of the hyperplane orthogonal to the ones vector.
  /// Throws std::invalid_argument for d < 1.
  static SimplexBasis canonical(int d);

  /// Wrap an explicit (d+1) x d vertex matrix (one vertex per row) after
  /// validating the regular-simplex identities to 1e-9. Throws
  /// std::invalid_argument on shape mismatch or residual failure.
  static SimplexBasis from_vertices(const Eigen::MatrixXd& vertices);

  /// Image of the basis under an orthogonal map q (vertices become v_i q').
  SimplexBasis rotated(const Eigen::MatrixXd& q) const;

  int dimension() const { return d_; }
  int vertex_count() const { return d_ + 1; }

  /// (d+1) x d matrix, one vertex per row.
  const Eigen::MatrixXd& vertices() const { return vertices_; }
  Eigen::RowVectorXd vertex(int j) const { return vertices_.row(j); }

private:
  explicit SimplexBasis(Eigen::MatrixXd vertices);

  int d_;
  Eigen::MatrixXd vertices_;
};

/// Max-abs deviation of the Gram matrix from (d+1) I - J together with the
/// deviation of sum_j v_j from 0, for an arbitrary candidate vertex matrix.
double gram_residual(const Eigen::MatrixXd& vertices);
double gram_residual(const SimplexBasis& basis);

/// JSON array of arrays (row vectors), 17 significant digits per entry.
std::string basis_to_json(const SimplexBasis& basis);

}  // namespace superrep
