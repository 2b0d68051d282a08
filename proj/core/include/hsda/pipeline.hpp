#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hsda/alignment.hpp"
#include "hsda/classify.hpp"
#include "hsda/hierarchy.hpp"
#include "hsda/subspace.hpp"

namespace hsda {

enum class Method { sa, gfk };

const char* to_string(Method method) noexcept;

using Adaptation = std::variant<SaModel, std::shared_ptr<const GfkKernel>>;

/// One adapted level: the (source, target) model and a K-NN classifier whose
/// training rows already live in the comparison space of that model.
struct LevelModel {
  Adaptation adaptation;
  KnnModel classifier;

  /// Maps target rows into the classifier's space and predicts.
  std::vector<Label> predict_target(const FeatureMatrix& T) const;
};

/// Fits one level of adaptation: per-domain PCA at dimension `d`, SA or GFK
/// on the resulting bases, then K-NN on the mapped source rows.
LevelModel fit_level(const LabeledSet& source, const FeatureMatrix& target,
                     Method method, int d, int k);

/// Single global subspace pair, one K-NN over all child labels.
std::vector<Label> adapt_flat(const LabeledSet& source, const FeatureMatrix& target,
                              Method method, int d, int k = 1);

/// K-NN on raw features.
std::vector<Label> baseline_no_adaptation(const LabeledSet& source,
                                          const FeatureMatrix& target, int k = 1);

struct HierConfig {
  Method method = Method::sa;
  int d_root = 0;
  int d_branch = 0;  // 0 means "same as d_root"
  int k = 1;
};

struct BranchModel {
  int parent = 0;
  int dimension = 0;
  LevelModel level;
  std::vector<Eigen::Index> target_rows;
};

struct SkippedParent {
  int parent = 0;
  std::string reason;
  std::vector<Eigen::Index> target_rows;
};

struct HierModel {
  Method method = Method::sa;
  int d_root = 0;
  int d_branch = 0;
  LevelModel root;
  std::vector<BranchModel> branches;
  std::vector<SkippedParent> skipped_parents;
  std::vector<std::string> warnings;
};

struct HierResult {
  HierModel model;
  std::vector<HierLabel> predictions;
};

/// Two-step adaptation: the root subspaces route every target row to a
/// parent, then each parent gets its own subspace pair (source rows of that
/// parent, target rows routed to it) and a child classifier restricted to
/// its children. Parents without routed rows carry no branch model; branches
/// whose data collapses to rank 0 fall back to the root embedding restricted
/// to the parent's children.
HierResult hier_adapt(const FeatureMatrix& source, std::span<const HierLabel> source_labels,
                      const FeatureMatrix& target, const Hierarchy& hierarchy,
                      const HierConfig& config);

struct SimilarityReport {
  Eigen::MatrixXd matrix;  // (1 + P) x (1 + P), index 0 is the root
  int dimension = 0;
  std::vector<std::string> warnings;
};

/// trace(X_Sa^T X_Tb) for the root and every parent on both sides. Uses the
/// true target labels, so it is a diagnostic rather than part of the method.
SimilarityReport similarity_matrix(const FeatureMatrix& source,
                                   std::span<const HierLabel> source_labels,
                                   const FeatureMatrix& target,
                                   std::span<const HierLabel> target_labels,
                                   const Hierarchy& hierarchy, int d);

/// Percentages in [0, 100].
struct EvalReport {
  std::optional<double> base_accuracy;
  std::optional<double> flat_accuracy;
  std::optional<double> hier_accuracy;
  double child_accuracy = 0.0;
  double parent_accuracy = 0.0;
  /// Child accuracy over the rows whose true parent is p; empty when the
  /// target has no such rows.
  std::vector<std::optional<double>> per_parent_child_accuracy;
  std::vector<std::size_t> per_parent_count;
  /// Rows are true parents, columns predicted parents.
  Eigen::MatrixXi parent_confusion;
};

EvalReport evaluate(std::span<const HierLabel> predicted, std::span<const HierLabel> truth,
                    const Hierarchy& hierarchy);

}  // namespace hsda
