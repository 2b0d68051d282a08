#pragma once

#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hsda/alignment.hpp"
#include "hsda/subspace.hpp"

namespace hsda {

using Label = int;

/// Features paired with one non-negative label per row.
class LabeledSet {
 public:
  LabeledSet(FeatureMatrix features, std::vector<Label> labels);

  const FeatureMatrix& features() const noexcept { return features_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  Eigen::Index size() const noexcept { return features_.rows(); }

 private:
  FeatureMatrix features_;
  std::vector<Label> labels_;
};

struct EuclideanMetric {};

/// Kernel-induced distance sqrt(a'Ga + b'Gb - 2a'Gb). Features handed to a
/// model using this metric must already be centered with gfk_center.
struct KernelMetric {
  std::shared_ptr<const GfkKernel> kernel;
};

using Metric = std::variant<EuclideanMetric, KernelMetric>;

class KnnModel {
 public:
  KnnModel(LabeledSet train, int k, Metric metric);

  const LabeledSet& train() const noexcept { return train_; }
  int k() const noexcept { return k_; }
  const Metric& metric() const noexcept { return metric_; }

  /// Majority vote over the k nearest training rows. Distance ties go to the
  /// lower training index, vote ties to the smallest label.
  std::vector<Label> predict(const FeatureMatrix& X) const;

 private:
  Eigen::VectorXd squared_distances(const Eigen::VectorXd& x) const;

  LabeledSet train_;
  int k_;
  Metric metric_;
  // Cached G * train^T and diag(train G train^T) for the kernel metric.
  Eigen::MatrixXd kernel_train_;
  Eigen::VectorXd kernel_self_;
};

KnnModel knn_fit(LabeledSet train, int k, Metric metric = EuclideanMetric{});

std::vector<Label> knn_predict(const KnnModel& model, const FeatureMatrix& X);

/// Fraction of exact matches, in [0, 1].
double accuracy(const std::vector<Label>& predicted, const std::vector<Label>& truth);

}  // namespace hsda
