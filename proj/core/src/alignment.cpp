#include "hsda/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hsda/error.hpp"

namespace hsda {

namespace {

void require_matching_pair(const SubspaceBasis& Xs, const SubspaceBasis& Xt) {
  if (Xs.ambient_dim() != Xt.ambient_dim() || Xs.subspace_dim() != Xt.subspace_dim()) {
    throw_dimension("source basis is " + std::to_string(Xs.ambient_dim()) + " x " +
                    std::to_string(Xs.subspace_dim()) + " but target basis is " +
                    std::to_string(Xt.ambient_dim()) + " x " +
                    std::to_string(Xt.subspace_dim()));
  }
}

void require_feature_dim(const FeatureMatrix& X, Eigen::Index D) {
  if (X.cols() != D) {
    throw_dimension("features have " + std::to_string(X.cols()) +
                    " columns, model expects " + std::to_string(D));
  }
}

template <typename Vec>
void require_vector_dim(const Vec& x, Eigen::Index D) {
  if (x.size() != D) {
    throw_dimension("vector has length " + std::to_string(x.size()) +
                    ", kernel expects " + std::to_string(D));
  }
}

}  // namespace

SaModel sa_align(const SubspaceBasis& Xs, const SubspaceBasis& Xt) {
  require_matching_pair(Xs, Xt);
  Eigen::MatrixXd M = Xs.basis().transpose() * Xt.basis();
  Eigen::MatrixXd Xa = Xs.basis() * M;
  return SaModel{std::move(M), std::move(Xa), Xs, Xt};
}

double sa_objective(const SubspaceBasis& Xs, const SubspaceBasis& Xt,
                    const Eigen::MatrixXd& M) {
  require_matching_pair(Xs, Xt);
  if (M.rows() != Xs.subspace_dim() || M.cols() != Xt.subspace_dim()) {
    throw_dimension("transform must be d x d");
  }
  return (Xs.basis() * M - Xt.basis()).squaredNorm();
}

FeatureMatrix sa_embed(const SaModel& model, const FeatureMatrix& X, Domain domain) {
  const SubspaceBasis& own =
      domain == Domain::source ? model.source_basis : model.target_basis;
  require_feature_dim(X, own.ambient_dim());
  const Eigen::MatrixXd centered = X.values().rowwise() - own.mean().transpose();
  if (domain == Domain::source) {
    return FeatureMatrix(centered * model.aligned_basis);
  }
  return FeatureMatrix(centered * model.target_basis.basis());
}

GeodesicDecomposition gfk_decompose(const SubspaceBasis& Xs, const SubspaceBasis& Xt) {
  require_matching_pair(Xs, Xt);
  const Eigen::Index D = Xs.ambient_dim();
  const Eigen::Index d = Xs.subspace_dim();
  if (2 * d > D) {
    throw Error(ErrorKind::geometry,
                "geometry error: the geodesic flow needs 2d <= D so that the "
                "complement can host the d-column U2 factor (d = " +
                    std::to_string(d) + ", D = " + std::to_string(D) + ")");
  }

  SubspaceBasis complement = orthogonal_complement(Xs);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs.basis().transpose() * Xt.basis(),
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd u1 = svd.matrixU();
  Eigen::MatrixXd v = svd.matrixV();
  const Eigen::VectorXd cosines = svd.singularValues();

  // Columns of Rs^T Xt V are mutually orthogonal with norms sin(theta). An
  // orthonormal U2 comes from a QR factorization processed from the largest
  // sine down, so vanishing columns receive arbitrary completion directions
  // instead of contaminating the well-determined ones.
  const Eigen::MatrixXd projected = complement.basis().transpose() * Xt.basis() * v;
  const Eigen::MatrixXd reversed = projected.rowwise().reverse();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(reversed);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(projected.rows(), d);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();

  Eigen::MatrixXd u2(projected.rows(), d);
  Eigen::VectorXd sines(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::Index rj = d - 1 - j;
    const double diag = r(rj, rj);
    const double sign = diag < 0.0 ? -1.0 : 1.0;
    u2.col(j) = -sign * q.col(rj);
    sines(j) = std::abs(diag);
  }

  Eigen::VectorXd theta(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    theta(j) = std::atan2(sines(j), std::max(cosines(j), 0.0));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return theta(a) < theta(b); });

  GeodesicDecomposition dec{Eigen::MatrixXd(d, d),
                            Eigen::MatrixXd(u2.rows(), d),
                            Eigen::MatrixXd(d, d),
                            Eigen::VectorXd(d),
                            std::move(complement),
                            Xs,
                            Xt};
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    dec.u1.col(j) = u1.col(src);
    dec.u2.col(j) = u2.col(src);
    dec.v.col(j) = v.col(src);
    dec.theta(j) = theta(src);
  }
  return dec;
}

SubspaceBasis gfk_flow(const GeodesicDecomposition& dec, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorKind::range,
                "range error: geodesic parameter t = " + std::to_string(t) +
                    " outside [0, 1]");
  }
  const Eigen::ArrayXd angle = t * dec.theta.array();
  Eigen::MatrixXd phi =
      dec.source_basis.basis() * dec.u1 * angle.cos().matrix().asDiagonal();
  phi.noalias() -=
      dec.complement.basis() * dec.u2 * angle.sin().matrix().asDiagonal();
  Eigen::VectorXd mean =
      (1.0 - t) * dec.source_basis.mean() + t * dec.target_basis.mean();
  return SubspaceBasis(std::move(phi), std::move(mean), 1e-8);
}

KernelWeights gfk_weights(double theta) {
  if (theta < 1e-8) return {2.0, 0.0, 0.0};
  const double x = 2.0 * theta;
  if (theta < 1e-4) {
    const double x2 = x * x;
    const double x4 = x2 * x2;
    return {2.0 - x2 / 6.0 + x4 / 120.0,
            -x / 2.0 + x * x2 / 24.0 - x * x4 / 720.0,
            x2 / 6.0 - x4 / 120.0 + x2 * x4 / 5040.0};
  }
  const double sinc = std::sin(x) / x;
  return {1.0 + sinc, (std::cos(x) - 1.0) / x, 1.0 - sinc};
}

GfkKernel gfk_kernel(const GeodesicDecomposition& dec) {
  const Eigen::Index D = dec.source_basis.ambient_dim();
  const Eigen::Index d = dec.theta.size();

  Eigen::VectorXd l1(d), l2(d), l3(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const KernelWeights w = gfk_weights(dec.theta(i));
    l1(i) = w.lambda1;
    l2(i) = w.lambda2;
    l3(i) = w.lambda3;
  }

  Eigen::MatrixXd frame(D, 2 * d);
  frame.leftCols(d) = dec.source_basis.basis() * dec.u1;
  frame.rightCols(d) = dec.complement.basis() * dec.u2;

  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  weights.topLeftCorner(d, d) = l1.asDiagonal();
  weights.topRightCorner(d, d) = l2.asDiagonal();
  weights.bottomLeftCorner(d, d) = l2.asDiagonal();
  weights.bottomRightCorner(d, d) = l3.asDiagonal();

  Eigen::MatrixXd G = frame * weights * frame.transpose();
  G = 0.5 * (G + G.transpose()).eval();
  return GfkKernel{std::move(G), dec, std::move(l1), std::move(l2), std::move(l3)};
}

Eigen::MatrixXd gfk_quadrature_oracle(const GeodesicDecomposition& dec, int n_points) {
  if (n_points < 3 || n_points % 2 == 0) {
    throw Error(ErrorKind::parameter,
                "parameter error: composite Simpson needs an odd number of points >= 3, got " +
                    std::to_string(n_points));
  }
  const Eigen::Index D = dec.source_basis.ambient_dim();
  const double h = 1.0 / static_cast<double>(n_points - 1);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(D, D);
  for (int i = 0; i < n_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n_points - 1);
    double w = (i == 0 || i == n_points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w *= 2.0 * h / 3.0;
    const SubspaceBasis phi = gfk_flow(dec, t);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(phi.basis(), w);
  }
  Eigen::MatrixXd full = acc.selfadjointView<Eigen::Lower>();
  return full;
}

Eigen::MatrixXd gfk_center(const GfkKernel& kernel, const FeatureMatrix& X,
                           Domain domain) {
  const SubspaceBasis& own = domain == Domain::source
                                 ? kernel.decomposition.source_basis
                                 : kernel.decomposition.target_basis;
  require_feature_dim(X, own.ambient_dim());
  return X.values().rowwise() - own.mean().transpose();
}

double gfk_similarity(const GfkKernel& kernel, const Eigen::VectorXd& xi,
                      const Eigen::VectorXd& xj) {
  require_vector_dim(xi, kernel.G.rows());
  require_vector_dim(xj, kernel.G.rows());
  return xi.dot(kernel.G * xj);
}

double gfk_distance(const GfkKernel& kernel, const Eigen::VectorXd& xi,
                    const Eigen::VectorXd& xj) {
  require_vector_dim(xi, kernel.G.rows());
  require_vector_dim(xj, kernel.G.rows());
  const Eigen::VectorXd gi = kernel.G * xi;
  const Eigen::VectorXd gj = kernel.G * xj;
  // Both cross terms, so swapping the arguments gives the same bits.
  const double sq = (xi.dot(gi) + xj.dot(gj)) - (xi.dot(gj) + xj.dot(gi));
  return std::sqrt(std::max(sq, 0.0));
}

DimensionSelection select_dimension_curve(const FeatureMatrix& S,
                                          const FeatureMatrix& T, int d_max) {
  if (S.cols() != T.cols()) {
    throw_dimension("source has " + std::to_string(S.cols()) +
                    " features, target has " + std::to_string(T.cols()));
  }
  Eigen::MatrixXd joint_values(S.rows() + T.rows(), S.cols());
  joint_values << S.values(), T.values();
  const FeatureMatrix joint(std::move(joint_values));

  const int limit = std::min({achievable_rank(S), achievable_rank(T),
                              achievable_rank(joint)});
  if (d_max < 1 || d_max > limit) {
    throw_dimension("d_max = " + std::to_string(d_max) +
                    " outside [1, " + std::to_string(limit) +
                    "], the rank achievable by source, target and their union");
  }

  const SubspaceBasis full_s = pca_subspace(S, d_max);
  const SubspaceBasis full_t = pca_subspace(T, d_max);
  const SubspaceBasis full_st = pca_subspace(joint, d_max);

  DimensionSelection out;
  out.dimension = d_max;
  bool found = false;
  for (int d = 1; d <= d_max; ++d) {
    const auto lead = [d](const SubspaceBasis& b) {
      return SubspaceBasis(b.basis().leftCols(d), b.mean(), 1e-10);
    };
    const SubspaceBasis ps = lead(full_s);
    const SubspaceBasis pt = lead(full_t);
    const SubspaceBasis pst = lead(full_st);
    const double alpha = principal_angles(ps, pst)(d - 1);
    const double beta = principal_angles(pt, pst)(d - 1);
    const double value =
        std::clamp(0.5 * (std::sin(alpha) + std::sin(beta)), 0.0, 1.0);
    out.disagreement.push_back(value);
    if (!found && value >= 1.0 - 1e-6) {
      out.dimension = d;
      found = true;
    }
  }
  return out;
}

int select_dimension(const FeatureMatrix& S, const FeatureMatrix& T, int d_max) {
  return select_dimension_curve(S, T, d_max).dimension;
}

}  // namespace hsda
