#include "hsda/pipeline.hpp"

#include <algorithm>
#include <string>

#include "hsda/error.hpp"

namespace hsda {

const char* to_string(Method method) noexcept {
  return method == Method::sa ? "SA" : "GFK";
}

namespace {

Eigen::MatrixXd embed(const Adaptation& adaptation, const FeatureMatrix& X,
                      Domain domain) {
  if (const auto* sa = std::get_if<SaModel>(&adaptation)) {
    return sa_embed(*sa, X, domain).values();
  }
  return gfk_center(*std::get<std::shared_ptr<const GfkKernel>>(adaptation), X, domain);
}

Metric metric_for(const Adaptation& adaptation) {
  if (std::holds_alternative<SaModel>(adaptation)) return EuclideanMetric{};
  return KernelMetric{std::get<std::shared_ptr<const GfkKernel>>(adaptation)};
}

std::vector<Eigen::Index> rows_where(std::span<const int> labels, int value) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == value) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

std::vector<Label> gather(std::span<const Label> labels,
                          std::span<const Eigen::Index> rows) {
  std::vector<Label> out;
  out.reserve(rows.size());
  for (Eigen::Index r : rows) out.push_back(labels[static_cast<std::size_t>(r)]);
  return out;
}

void require_same_features(const FeatureMatrix& S, const FeatureMatrix& T) {
  if (S.cols() != T.cols()) {
    throw_dimension("source has " + std::to_string(S.cols()) +
                    " features, target has " + std::to_string(T.cols()));
  }
}

double percent(double fraction) { return 100.0 * fraction; }

}  // namespace

std::vector<Label> LevelModel::predict_target(const FeatureMatrix& T) const {
  return classifier.predict(FeatureMatrix(embed(adaptation, T, Domain::target)));
}

LevelModel fit_level(const LabeledSet& source, const FeatureMatrix& target,
                     Method method, int d, int k) {
  require_same_features(source.features(), target);
  const SubspaceBasis xs = pca_subspace(source.features(), d);
  const SubspaceBasis xt = pca_subspace(target, d);
  Adaptation adaptation = method == Method::sa
                              ? Adaptation{sa_align(xs, xt)}
                              : Adaptation{std::make_shared<const GfkKernel>(
                                    gfk_kernel(gfk_decompose(xs, xt)))};
  LabeledSet train(FeatureMatrix(embed(adaptation, source.features(), Domain::source)),
                   source.labels());
  KnnModel classifier = knn_fit(std::move(train), k, metric_for(adaptation));
  return LevelModel{std::move(adaptation), std::move(classifier)};
}

std::vector<Label> adapt_flat(const LabeledSet& source, const FeatureMatrix& target,
                              Method method, int d, int k) {
  return fit_level(source, target, method, d, k).predict_target(target);
}

std::vector<Label> baseline_no_adaptation(const LabeledSet& source,
                                          const FeatureMatrix& target, int k) {
  require_same_features(source.features(), target);
  return knn_fit(source, k).predict(target);
}

HierResult hier_adapt(const FeatureMatrix& source, std::span<const HierLabel> source_labels,
                      const FeatureMatrix& target, const Hierarchy& hierarchy,
                      const HierConfig& config) {
  require_same_features(source, target);
  if (static_cast<Eigen::Index>(source_labels.size()) != source.rows()) {
    throw_dimension("source has " + std::to_string(source.rows()) + " rows but " +
                    std::to_string(source_labels.size()) + " labels");
  }
  validate_labels(hierarchy, source_labels);
  if (config.d_root < 1) {
    throw_dimension("root subspace dimension must be positive");
  }
  const int d_branch = config.d_branch > 0 ? config.d_branch : config.d_root;

  const std::vector<int> source_parents = parent_labels(source_labels);
  const std::vector<int> source_children = child_labels(source_labels);
  for (int p = 0; p < hierarchy.parent_count(); ++p) {
    if (std::find(source_parents.begin(), source_parents.end(), p) ==
        source_parents.end()) {
      throw Error(ErrorKind::configuration,
                  "configuration error: parent '" + hierarchy.parent_name(p) +
                      "' has no source instances");
    }
  }

  // Root level: global subspaces, parent routing for every target row.
  LevelModel root = fit_level(LabeledSet(source, source_parents), target,
                              config.method, config.d_root, config.k);
  const std::vector<Label> routed = root.predict_target(target);

  HierModel model{config.method, config.d_root, d_branch, std::move(root), {}, {}, {}};
  std::vector<HierLabel> predictions(static_cast<std::size_t>(target.rows()));

  for (int p = 0; p < hierarchy.parent_count(); ++p) {
    const std::string& name = hierarchy.parent_name(p);
    std::vector<Eigen::Index> target_rows = rows_where(routed, p);
    if (target_rows.empty()) {
      model.skipped_parents.push_back({p, "no target rows routed to this parent", {}});
      continue;
    }
    const std::vector<Eigen::Index> source_rows = rows_where(source_parents, p);
    const FeatureMatrix source_p = source.select_rows(source_rows);
    const FeatureMatrix target_p = target.select_rows(target_rows);
    const std::vector<Label> children_p = gather(source_children, source_rows);

    int k = config.k;
    if (k > source_p.rows()) {
      k = static_cast<int>(source_p.rows());
      model.warnings.push_back("parent '" + name + "': k reduced to " +
                               std::to_string(k) + " (source branch size)");
    }

    int dim = std::min({d_branch, achievable_rank(source_p), achievable_rank(target_p)});
    if (config.method == Method::gfk) {
      dim = std::min(dim, static_cast<int>(source.cols() / 2));
    }
    if (dim < d_branch) {
      model.warnings.push_back("parent '" + name + "': branch dimension reduced from " +
                               std::to_string(d_branch) + " to " + std::to_string(dim));
    }

    std::vector<Label> child_pred;
    if (dim >= 1) {
      LevelModel level = fit_level(LabeledSet(source_p, children_p), target_p,
                                   config.method, dim, k);
      child_pred = level.predict_target(target_p);
      model.branches.push_back({p, dim, std::move(level), target_rows});
    } else {
      // Rank collapse: keep the parent decision, classify among its children
      // in the root comparison space.
      const Adaptation& root_adaptation = model.root.adaptation;
      KnnModel fallback = knn_fit(
          LabeledSet(FeatureMatrix(embed(root_adaptation, source_p, Domain::source)),
                     children_p),
          k, metric_for(root_adaptation));
      child_pred =
          fallback.predict(FeatureMatrix(embed(root_adaptation, target_p, Domain::target)));
      model.skipped_parents.push_back(
          {p, "branch subspace collapsed to rank 0; used root embedding", target_rows});
    }

    for (std::size_t i = 0; i < target_rows.size(); ++i) {
      predictions[static_cast<std::size_t>(target_rows[i])] =
          HierLabel{p, child_pred[i]};
    }
  }

  return HierResult{std::move(model), std::move(predictions)};
}

SimilarityReport similarity_matrix(const FeatureMatrix& source,
                                   std::span<const HierLabel> source_labels,
                                   const FeatureMatrix& target,
                                   std::span<const HierLabel> target_labels,
                                   const Hierarchy& hierarchy, int d) {
  require_same_features(source, target);
  if (static_cast<Eigen::Index>(source_labels.size()) != source.rows() ||
      static_cast<Eigen::Index>(target_labels.size()) != target.rows()) {
    throw_dimension("label count does not match row count");
  }
  validate_labels(hierarchy, source_labels);
  validate_labels(hierarchy, target_labels);
  if (d < 1) throw_dimension("subspace dimension must be positive");

  const int P = hierarchy.parent_count();
  const std::vector<int> s_parents = parent_labels(source_labels);
  const std::vector<int> t_parents = parent_labels(target_labels);

  std::vector<FeatureMatrix> s_sets{source};
  std::vector<FeatureMatrix> t_sets{target};
  for (int p = 0; p < P; ++p) {
    const auto s_rows = rows_where(s_parents, p);
    const auto t_rows = rows_where(t_parents, p);
    if (s_rows.empty() || t_rows.empty()) {
      throw Error(ErrorKind::configuration,
                  "configuration error: parent '" + hierarchy.parent_name(p) +
                      "' has no " + (s_rows.empty() ? "source" : "target") + " instances");
    }
    s_sets.push_back(source.select_rows(s_rows));
    t_sets.push_back(target.select_rows(t_rows));
  }

  SimilarityReport report;
  int dim = d;
  for (const auto* sets : {&s_sets, &t_sets}) {
    for (const auto& set : *sets) dim = std::min(dim, achievable_rank(set));
  }
  if (dim < 1) throw RankError(d, dim);
  if (dim < d) {
    report.warnings.push_back("subspace dimension reduced from " + std::to_string(d) +
                              " to " + std::to_string(dim) +
                              " to fit the smallest subset");
  }
  report.dimension = dim;

  std::vector<SubspaceBasis> s_bases, t_bases;
  for (const auto& set : s_sets) s_bases.push_back(pca_subspace(set, dim));
  for (const auto& set : t_sets) t_bases.push_back(pca_subspace(set, dim));

  report.matrix.resize(P + 1, P + 1);
  for (int a = 0; a <= P; ++a) {
    for (int b = 0; b <= P; ++b) {
      report.matrix(a, b) = subspace_similarity(s_bases[static_cast<std::size_t>(a)],
                                                t_bases[static_cast<std::size_t>(b)]);
    }
  }
  return report;
}

EvalReport evaluate(std::span<const HierLabel> predicted, std::span<const HierLabel> truth,
                    const Hierarchy& hierarchy) {
  if (predicted.size() != truth.size()) {
    throw_dimension("prediction vector has length " + std::to_string(predicted.size()) +
                    ", truth has " + std::to_string(truth.size()));
  }
  validate_labels(hierarchy, predicted);
  validate_labels(hierarchy, truth);

  const int P = hierarchy.parent_count();
  EvalReport report;
  report.parent_confusion = Eigen::MatrixXi::Zero(P, P);
  report.per_parent_count.assign(static_cast<std::size_t>(P), 0);
  std::vector<std::size_t> per_parent_hits(static_cast<std::size_t>(P), 0);

  std::size_t child_hits = 0;
  std::size_t parent_hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto tp = static_cast<std::size_t>(truth[i].parent);
    report.parent_confusion(truth[i].parent, predicted[i].parent) += 1;
    report.per_parent_count[tp] += 1;
    if (predicted[i].parent == truth[i].parent) ++parent_hits;
    if (predicted[i].child == truth[i].child) {
      ++child_hits;
      per_parent_hits[tp] += 1;
    }
  }

  const auto n = static_cast<double>(truth.size());
  report.child_accuracy = truth.empty() ? 0.0 : percent(child_hits / n);
  report.parent_accuracy = truth.empty() ? 0.0 : percent(parent_hits / n);
  for (std::size_t p = 0; p < static_cast<std::size_t>(P); ++p) {
    if (report.per_parent_count[p] == 0) {
      report.per_parent_child_accuracy.emplace_back();
    } else {
      report.per_parent_child_accuracy.emplace_back(
          percent(static_cast<double>(per_parent_hits[p]) /
                  static_cast<double>(report.per_parent_count[p])));
    }
  }
  return report;
}

}  // namespace hsda
