#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hsda {

/// Dense instances-by-features matrix. Rows are instances, columns are
/// feature dimensions. Construction rejects empty shapes and non-finite
/// entries, so every FeatureMatrix in flight is usable as-is.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Eigen::MatrixXd values);

  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  /// Copy of the listed rows, in the given order.
  FeatureMatrix select_rows(std::span<const Eigen::Index> rows) const;

 private:
  Eigen::MatrixXd values_;
};

/// D x d matrix with orthonormal columns plus the centering offset that was
/// removed from the data before it was fit.
class SubspaceBasis {
 public:
  /// Orthonormality of `basis` is checked against `tolerance`.
  SubspaceBasis(Eigen::MatrixXd basis, Eigen::VectorXd mean,
                double tolerance = 1e-8);

  /// Basis with a zero mean.
  static SubspaceBasis uncentered(Eigen::MatrixXd basis,
                                  double tolerance = 1e-8);

  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  Eigen::Index ambient_dim() const noexcept { return basis_.rows(); }
  Eigen::Index subspace_dim() const noexcept { return basis_.cols(); }

  /// max |B^T B - I| over all entries.
  double orthonormality_error() const;

 private:
  Eigen::MatrixXd basis_;
  Eigen::VectorXd mean_;
};

/// Numerical rank of the (optionally centered) data, using the same
/// singular-value cutoff as pca_subspace.
int achievable_rank(const FeatureMatrix& X, bool center = true);

/// Leading `d` principal directions of X via thin SVD of the centered data.
/// Each column is sign-normalized so its largest-magnitude entry is positive.
SubspaceBasis pca_subspace(const FeatureMatrix& X, int d, bool center = true);

/// Orthonormal basis of the complement of span(B), D x (D - d).
SubspaceBasis orthogonal_complement(const SubspaceBasis& B);

/// Principal angles in [0, pi/2], non-decreasing. Small angles come from the
/// sine route so they stay accurate to roughly machine precision.
Eigen::VectorXd principal_angles(const SubspaceBasis& A, const SubspaceBasis& B);

/// trace(A^T B).
double subspace_similarity(const SubspaceBasis& A, const SubspaceBasis& B);

/// (X - 1 mean^T) * basis, an n x d matrix.
FeatureMatrix project(const FeatureMatrix& X, const SubspaceBasis& B);

}  // namespace hsda
