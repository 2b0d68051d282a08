#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hsda/subspace.hpp"

namespace hsda {

enum class Domain { source, target };

/// Subspace Alignment model for one (source, target) basis pair.
///
/// The transform minimizing ||Xs M - Xt||_F over all d x d matrices has the
/// closed form M = Xs^T Xt. Source data is compared through the aligned
/// basis Xa = Xs M, target data through Xt.
struct SaModel {
  Eigen::MatrixXd transform;     // M, d x d
  Eigen::MatrixXd aligned_basis; // Xa, D x d
  SubspaceBasis source_basis;
  SubspaceBasis target_basis;
};

/// Factors of the geodesic between two d-dimensional subspaces:
///   Xs^T Xt  =  U1 diag(cos theta) V^T
///   Rs^T Xt  = -U2 diag(sin theta) V^T
struct GeodesicDecomposition {
  Eigen::MatrixXd u1;      // d x d
  Eigen::MatrixXd u2;      // (D - d) x d
  Eigen::MatrixXd v;       // d x d
  Eigen::VectorXd theta;   // non-decreasing, in [0, pi/2]
  SubspaceBasis complement;  // Rs, D x (D - d)
  SubspaceBasis source_basis;
  SubspaceBasis target_basis;
};

struct GfkKernel {
  Eigen::MatrixXd G;  // D x D, symmetric PSD
  GeodesicDecomposition decomposition;
  Eigen::VectorXd lambda1;
  Eigen::VectorXd lambda2;
  Eigen::VectorXd lambda3;
};

SaModel sa_align(const SubspaceBasis& Xs, const SubspaceBasis& Xt);

/// ||Xs M - Xt||_F^2 for an arbitrary d x d transform.
double sa_objective(const SubspaceBasis& Xs, const SubspaceBasis& Xt,
                    const Eigen::MatrixXd& M);

/// Source rows -> (X - mean_S) Xa, target rows -> (X - mean_T) Xt.
FeatureMatrix sa_embed(const SaModel& model, const FeatureMatrix& X, Domain domain);

GeodesicDecomposition gfk_decompose(const SubspaceBasis& Xs, const SubspaceBasis& Xt);

/// phi(t) = Xs U1 diag(cos t theta) - Rs U2 diag(sin t theta), t in [0, 1].
/// The returned basis carries the linearly interpolated domain mean.
SubspaceBasis gfk_flow(const GeodesicDecomposition& dec, double t);

/// Diagonal weights of the kernel's 2 x 2 block form for one principal angle.
struct KernelWeights {
  double lambda1;
  double lambda2;
  double lambda3;
};
KernelWeights gfk_weights(double theta);

/// Closed-form kernel
///   G = [Xs U1 | Rs U2] [[L1, L2], [L2, L3]] [Xs U1 | Rs U2]^T,
/// which equals 2 * integral_0^1 phi(t) phi(t)^T dt.
GfkKernel gfk_kernel(const GeodesicDecomposition& dec);

/// Composite Simpson approximation of 2 * integral_0^1 phi(t) phi(t)^T dt,
/// evaluated by sampling gfk_flow. `n_points` must be odd and >= 3.
Eigen::MatrixXd gfk_quadrature_oracle(const GeodesicDecomposition& dec, int n_points);

/// Centers features with the mean of the domain's basis, leaving them in the
/// ambient space where the kernel is defined.
Eigen::MatrixXd gfk_center(const GfkKernel& kernel, const FeatureMatrix& X,
                           Domain domain);

double gfk_similarity(const GfkKernel& kernel, const Eigen::VectorXd& xi,
                      const Eigen::VectorXd& xj);
double gfk_distance(const GfkKernel& kernel, const Eigen::VectorXd& xi,
                    const Eigen::VectorXd& xj);

struct DimensionSelection {
  int dimension = 0;
  /// disagreement(d - 1) for d = 1..d_max; each entry in [0, 1].
  std::vector<double> disagreement;
};

/// Subspace disagreement scan. For each d, alpha_d and beta_d are the d-th
/// principal angles between PCA(S) / PCA(S u T) and PCA(T) / PCA(S u T);
/// D(d) = (sin alpha_d + sin beta_d) / 2. Picks the smallest d with
/// D(d) >= 1 - 1e-6, else d_max.
DimensionSelection select_dimension_curve(const FeatureMatrix& S,
                                          const FeatureMatrix& T, int d_max);

int select_dimension(const FeatureMatrix& S, const FeatureMatrix& T, int d_max);

}  // namespace hsda
