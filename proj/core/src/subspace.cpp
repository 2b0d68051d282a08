#include "hsda/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hsda/error.hpp"

namespace hsda {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::rank_deficiency: return "rank-deficiency";
    case ErrorKind::no_complement: return "no-complement";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::range: return "range";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

RankError::RankError(int requested, int achievable)
    : Error(ErrorKind::rank_deficiency,
            "rank-deficiency error: requested subspace dimension " +
                std::to_string(requested) + " but the data only supports rank " +
                std::to_string(achievable)),
      requested_(requested),
      achievable_(achievable) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorKind::parse,
            "parse error at line " + std::to_string(line) + ": " + message),
      line_(line) {}

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) {
    throw Error(ErrorKind::empty_input,
                "empty-input error: feature matrix needs at least one row and one column");
  }
  if (!values_.allFinite()) {
    throw Error(ErrorKind::validation,
                "validation error: feature matrix contains NaN or Inf");
  }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const Eigen::Index> rows) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), values_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= values_.rows()) {
      throw Error(ErrorKind::range, "range error: row index " +
                                        std::to_string(rows[i]) + " out of bounds");
    }
    out.row(static_cast<Eigen::Index>(i)) = values_.row(rows[i]);
  }
  return FeatureMatrix(std::move(out));
}

SubspaceBasis::SubspaceBasis(Eigen::MatrixXd basis, Eigen::VectorXd mean,
                             double tolerance)
    : basis_(std::move(basis)), mean_(std::move(mean)) {
  if (basis_.cols() < 1 || basis_.rows() < basis_.cols()) {
    throw_dimension("subspace basis must be D x d with 1 <= d <= D, got " +
                    std::to_string(basis_.rows()) + " x " +
                    std::to_string(basis_.cols()));
  }
  if (mean_.size() != basis_.rows()) {
    throw_dimension("basis mean has length " + std::to_string(mean_.size()) +
                    ", expected " + std::to_string(basis_.rows()));
  }
  if (!basis_.allFinite() || !mean_.allFinite()) {
    throw Error(ErrorKind::validation, "validation error: basis contains NaN or Inf");
  }
  if (orthonormality_error() > tolerance) {
    throw Error(ErrorKind::validation,
                "validation error: basis columns are not orthonormal (error " +
                    std::to_string(orthonormality_error()) + ")");
  }
}

SubspaceBasis SubspaceBasis::uncentered(Eigen::MatrixXd basis, double tolerance) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(basis.rows());
  return SubspaceBasis(std::move(basis), std::move(mean), tolerance);
}

double SubspaceBasis::orthonormality_error() const {
  const Eigen::Index d = basis_.cols();
  return (basis_.transpose() * basis_ - Eigen::MatrixXd::Identity(d, d))
      .cwiseAbs()
      .maxCoeff();
}

namespace {

struct CenteredData {
  Eigen::MatrixXd values;
  Eigen::VectorXd mean;
};

CenteredData center_data(const FeatureMatrix& X, bool center) {
  CenteredData out;
  if (center) {
    out.mean = X.values().colwise().mean().transpose();
    out.values = X.values().rowwise() - out.mean.transpose();
  } else {
    out.mean = Eigen::VectorXd::Zero(X.cols());
    out.values = X.values();
  }
  return out;
}

int numerical_rank(const Eigen::VectorXd& singular, Eigen::Index rows,
                   Eigen::Index cols) {
  if (singular.size() == 0 || singular(0) <= 0.0) return 0;
  const double cutoff = static_cast<double>(std::max(rows, cols)) *
                        std::numeric_limits<double>::epsilon() * singular(0);
  return static_cast<int>((singular.array() > cutoff).count());
}

void normalize_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index arg = 0;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0.0) basis.col(j) *= -1.0;
  }
}

void require_same_ambient(const SubspaceBasis& A, const SubspaceBasis& B) {
  if (A.ambient_dim() != B.ambient_dim()) {
    throw_dimension("ambient dimensions differ (" + std::to_string(A.ambient_dim()) +
                    " vs " + std::to_string(B.ambient_dim()) + ")");
  }
}

}  // namespace

int achievable_rank(const FeatureMatrix& X, bool center) {
  if (center && X.rows() < 2) return 0;
  const CenteredData data = center_data(X, center);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(data.values);
  return numerical_rank(svd.singularValues(), data.values.rows(), data.values.cols());
}

SubspaceBasis pca_subspace(const FeatureMatrix& X, int d, bool center) {
  const Eigen::Index n = X.rows();
  const Eigen::Index D = X.cols();
  if (d < 1 || d > std::min(n, D)) {
    throw_dimension("subspace dimension " + std::to_string(d) +
                    " outside [1, min(n, D)] = [1, " +
                    std::to_string(std::min(n, D)) + "]");
  }
  if (center && n < 2) {
    throw_dimension("centered PCA needs at least 2 instances");
  }

  CenteredData data = center_data(X, center);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(data.values, Eigen::ComputeThinV);
  const int rank = numerical_rank(svd.singularValues(), n, D);
  if (rank < d) throw RankError(d, rank);

  Eigen::MatrixXd basis = svd.matrixV().leftCols(d);
  normalize_signs(basis);
  return SubspaceBasis(std::move(basis), std::move(data.mean), 1e-10);
}

SubspaceBasis orthogonal_complement(const SubspaceBasis& B) {
  const Eigen::Index D = B.ambient_dim();
  const Eigen::Index d = B.subspace_dim();
  if (d >= D) {
    throw Error(ErrorKind::no_complement,
                "no-complement error: basis already spans the ambient space (d = D = " +
                    std::to_string(D) + ")");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(B.basis());
  Eigen::MatrixXd q = qr.householderQ();
  return SubspaceBasis(q.rightCols(D - d), B.mean(), 1e-10);
}

Eigen::VectorXd principal_angles(const SubspaceBasis& A, const SubspaceBasis& B) {
  require_same_ambient(A, B);
  // Work with the wider subspace first so that the residual of the narrower
  // one carries exactly the sines of the principal angles.
  const bool swap = A.subspace_dim() < B.subspace_dim();
  const Eigen::MatrixXd& wide = swap ? B.basis() : A.basis();
  const Eigen::MatrixXd& narrow = swap ? A.basis() : B.basis();

  const Eigen::MatrixXd cross = wide.transpose() * narrow;
  const Eigen::MatrixXd residual = narrow - wide * cross;

  Eigen::JacobiSVD<Eigen::MatrixXd> cos_svd(cross);
  Eigen::JacobiSVD<Eigen::MatrixXd> sin_svd(residual);
  const Eigen::VectorXd& cosines = cos_svd.singularValues();  // descending
  const Eigen::VectorXd& sines = sin_svd.singularValues();    // descending

  const Eigen::Index m = narrow.cols();
  Eigen::VectorXd angles(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double c = std::clamp(cosines(k), 0.0, 1.0);
    const double s = std::clamp(sines(m - 1 - k), 0.0, 1.0);
    angles(k) = (c * c >= 0.5) ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

double subspace_similarity(const SubspaceBasis& A, const SubspaceBasis& B) {
  require_same_ambient(A, B);
  if (A.subspace_dim() != B.subspace_dim()) {
    throw_dimension("subspace dimensions differ (" + std::to_string(A.subspace_dim()) +
                    " vs " + std::to_string(B.subspace_dim()) + ")");
  }
  return (A.basis().transpose() * B.basis()).trace();
}

FeatureMatrix project(const FeatureMatrix& X, const SubspaceBasis& B) {
  if (X.cols() != B.ambient_dim()) {
    throw_dimension("feature matrix has " + std::to_string(X.cols()) +
                    " columns but basis ambient dimension is " +
                    std::to_string(B.ambient_dim()));
  }
  return FeatureMatrix((X.values().rowwise() - B.mean().transpose()) * B.basis());
}

}  // namespace hsda
