#include "hsda/classify.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "hsda/error.hpp"

namespace hsda {

LabeledSet::LabeledSet(FeatureMatrix features, std::vector<Label> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (static_cast<Eigen::Index>(labels_.size()) != features_.rows()) {
    throw_dimension("label vector has length " + std::to_string(labels_.size()) +
                    " but there are " + std::to_string(features_.rows()) +
                    " feature rows");
  }
  for (Label l : labels_) {
    if (l < 0) {
      throw Error(ErrorKind::validation,
                  "validation error: labels must be non-negative, got " +
                      std::to_string(l));
    }
  }
}

KnnModel::KnnModel(LabeledSet train, int k, Metric metric)
    : train_(std::move(train)), k_(k), metric_(std::move(metric)) {
  if (k_ < 1 || k_ > train_.size()) {
    throw Error(ErrorKind::parameter,
                "parameter error: k = " + std::to_string(k_) + " outside [1, " +
                    std::to_string(train_.size()) + "]");
  }
  if (const auto* km = std::get_if<KernelMetric>(&metric_)) {
    if (!km->kernel) {
      throw Error(ErrorKind::parameter, "parameter error: kernel metric without a kernel");
    }
    const Eigen::MatrixXd& G = km->kernel->G;
    if (G.rows() != train_.features().cols()) {
      throw_dimension("kernel is " + std::to_string(G.rows()) +
                      "-dimensional but training features have " +
                      std::to_string(train_.features().cols()) + " columns");
    }
    kernel_train_ = G * train_.features().values().transpose();
    kernel_self_ = (train_.features().values().transpose().array() *
                    kernel_train_.array())
                       .colwise()
                       .sum()
                       .transpose();
  }
}

Eigen::VectorXd KnnModel::squared_distances(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd& train = train_.features().values();
  if (std::holds_alternative<EuclideanMetric>(metric_)) {
    return (train.rowwise() - x.transpose()).rowwise().squaredNorm();
  }
  const Eigen::MatrixXd& G = std::get<KernelMetric>(metric_).kernel->G;
  const double self = x.dot(G * x);
  Eigen::VectorXd cross = kernel_train_.transpose() * x;
  Eigen::VectorXd out = (kernel_self_.array() + self - 2.0 * cross.array()).matrix();
  return out.cwiseMax(0.0);
}

std::vector<Label> KnnModel::predict(const FeatureMatrix& X) const {
  if (X.cols() != train_.features().cols()) {
    throw_dimension("query features have " + std::to_string(X.cols()) +
                    " columns, training features have " +
                    std::to_string(train_.features().cols()));
  }
  const auto n_train = static_cast<std::size_t>(train_.size());
  const auto k = static_cast<std::size_t>(k_);
  std::vector<Label> out(static_cast<std::size_t>(X.rows()));
  std::vector<Eigen::Index> order(n_train);

  for (Eigen::Index row = 0; row < X.rows(); ++row) {
    const Eigen::VectorXd dist = squared_distances(X.values().row(row).transpose());
    std::iota(order.begin(), order.end(), 0);
    const auto closer = [&dist](Eigen::Index a, Eigen::Index b) {
      return dist(a) < dist(b) || (dist(a) == dist(b) && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                      order.end(), closer);

    std::map<Label, int> votes;
    for (std::size_t i = 0; i < k; ++i) {
      ++votes[train_.labels()[static_cast<std::size_t>(order[i])]];
    }
    Label best = votes.begin()->first;
    int best_count = 0;
    for (const auto& [label, count] : votes) {
      if (count > best_count) {
        best = label;
        best_count = count;
      }
    }
    out[static_cast<std::size_t>(row)] = best;
  }
  return out;
}

KnnModel knn_fit(LabeledSet train, int k, Metric metric) {
  return KnnModel(std::move(train), k, std::move(metric));
}

std::vector<Label> knn_predict(const KnnModel& model, const FeatureMatrix& X) {
  return model.predict(X);
}

double accuracy(const std::vector<Label>& predicted, const std::vector<Label>& truth) {
  if (predicted.size() != truth.size()) {
    throw_dimension("prediction vector has length " + std::to_string(predicted.size()) +
                    ", truth has " + std::to_string(truth.size()));
  }
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace hsda
