#include "report.hpp"

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hsda::cli {

using nlohmann::ordered_json;

const char* to_string(ReportFormat format) noexcept {
  switch (format) {
    case ReportFormat::text: return "text";
    case ReportFormat::csv: return "csv";
    case ReportFormat::json: return "json";
  }
  return "text";
}

const char* to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::base: return "base";
    case Mode::flat: return "flat";
    case Mode::hier: return "hier";
  }
  return "hier";
}

std::string format_percent(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

namespace {

std::string fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string optional_cell(const std::optional<double>& value) {
  return value ? format_percent(*value) : std::string("-");
}

ordered_json optional_number(const std::optional<double>& value) {
  return value ? ordered_json(*value) : ordered_json(nullptr);
}

// Dimension 0 means no subspace was fitted (mode base).
std::string dim_cell(int d) { return d > 0 ? std::to_string(d) : std::string("-"); }

std::string render_text(const AdaptReport& r) {
  std::ostringstream out;
  out << "source: " << r.source_name << "\n"
      << "target: " << r.target_name << "\n"
      << "method: " << to_string(r.method) << "  mode: " << to_string(r.mode)
      << "  d: " << dim_cell(r.dimension) << (r.dimension_auto ? " (auto)" : "")
      << "  d_branch: " << dim_cell(r.branch_dimension) << "  k: " << r.k << "\n\n";
  if (!r.evaluation) {
    out << "accuracy unavailable (no truth labels)\n";
  } else {
    const EvalReport& e = *r.evaluation;
    out << pad("Method", 8) << pad("Base Accuracy", 15)
        << pad("Accuracy (without Hierarchy)", 30) << "Accuracy (with Hierarchy)\n";
    out << pad(to_string(r.method), 8) << pad(optional_cell(e.base_accuracy), 15)
        << pad(optional_cell(e.flat_accuracy), 30) << optional_cell(e.hier_accuracy)
        << "\n\n";
    out << "parent accuracy: " << format_percent(e.parent_accuracy) << "\n";
    out << "child accuracy per true parent:\n";
    for (std::size_t p = 0; p < r.parent_names.size(); ++p) {
      out << "  " << pad(r.parent_names[p], 12)
          << optional_cell(e.per_parent_child_accuracy[p]) << "  (n = "
          << e.per_parent_count[p] << ")\n";
    }
  }
  for (const auto& s : r.skipped_parents) out << "skipped: " << s << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  return out.str();
}

std::string render_csv(const AdaptReport& r) {
  std::ostringstream out;
  out << "method,mode,d,d_branch,k,base_accuracy,flat_accuracy,hier_accuracy,"
         "parent_accuracy\n";
  const auto cell = [](const std::optional<double>& v) {
    return v ? format_percent(*v) : std::string();
  };
  out << to_string(r.method) << ',' << to_string(r.mode) << ',' << r.dimension << ','
      << r.branch_dimension << ',' << r.k << ',';
  if (r.evaluation) {
    const EvalReport& e = *r.evaluation;
    out << cell(e.base_accuracy) << ',' << cell(e.flat_accuracy) << ','
        << cell(e.hier_accuracy) << ',' << format_percent(e.parent_accuracy) << '\n';
  } else {
    out << ",,,\n";
  }
  return out.str();
}

std::string render_json(const AdaptReport& r) {
  ordered_json j;
  j["schema"] = 1;
  j["source"] = r.source_name;
  j["target"] = r.target_name;
  j["method"] = to_string(r.method);
  j["mode"] = to_string(r.mode);
  j["d"] = r.dimension;
  j["d_auto"] = r.dimension_auto;
  j["d_branch"] = r.branch_dimension;
  j["k"] = r.k;
  j["accuracy_available"] = r.evaluation.has_value();
  if (r.evaluation) {
    const EvalReport& e = *r.evaluation;
    j["base_accuracy"] = optional_number(e.base_accuracy);
    j["flat_accuracy"] = optional_number(e.flat_accuracy);
    j["hier_accuracy"] = optional_number(e.hier_accuracy);
    j["parent_accuracy"] = e.parent_accuracy;
    ordered_json per_parent = ordered_json::array();
    for (std::size_t p = 0; p < r.parent_names.size(); ++p) {
      per_parent.push_back({{"parent", r.parent_names[p]},
                            {"child_accuracy", optional_number(e.per_parent_child_accuracy[p])},
                            {"count", e.per_parent_count[p]}});
    }
    j["per_parent"] = per_parent;
    ordered_json confusion = ordered_json::array();
    for (Eigen::Index a = 0; a < e.parent_confusion.rows(); ++a) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index b = 0; b < e.parent_confusion.cols(); ++b) {
        row.push_back(e.parent_confusion(a, b));
      }
      confusion.push_back(row);
    }
    j["parent_confusion"] = confusion;
  }
  j["skipped_parents"] = r.skipped_parents;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

std::vector<std::string> similarity_labels(const SimilarityOutput& o) {
  std::vector<std::string> labels{"Root"};
  labels.insert(labels.end(), o.parent_names.begin(), o.parent_names.end());
  return labels;
}

}  // namespace

std::string render(const AdaptReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::csv: return render_csv(report);
    case ReportFormat::json: return render_json(report);
    case ReportFormat::text: break;
  }
  return render_text(report);
}

std::string render(const SimilarityOutput& o, ReportFormat format) {
  const auto labels = similarity_labels(o);
  const Eigen::MatrixXd& m = o.report.matrix;
  std::ostringstream out;
  if (format == ReportFormat::json) {
    ordered_json j;
    j["schema"] = 1;
    j["dimension"] = o.report.dimension;
    j["labels"] = labels;
    ordered_json rows = ordered_json::array();
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index b = 0; b < m.cols(); ++b) row.push_back(m(a, b));
      rows.push_back(row);
    }
    j["matrix"] = rows;
    j["warnings"] = o.report.warnings;
    return j.dump(2) + "\n";
  }
  if (format == ReportFormat::csv) {
    out << "source";
    for (const auto& l : labels) out << ',' << l;
    out << '\n';
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
      out << labels[static_cast<std::size_t>(a)];
      for (Eigen::Index b = 0; b < m.cols(); ++b) out << ',' << fixed(m(a, b), 2);
      out << '\n';
    }
    return out.str();
  }
  // Text: diagonal cells in brackets.
  constexpr std::size_t width = 16;
  out << "subspace similarity trace(Xs' * Xt), d = " << o.report.dimension << "\n";
  out << pad("", width);
  for (const auto& l : labels) out << pad(l + "(Target)", width);
  out << '\n';
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    out << pad(labels[static_cast<std::size_t>(a)] + "(Source)", width);
    for (Eigen::Index b = 0; b < m.cols(); ++b) {
      const std::string v = fixed(m(a, b), 2);
      out << pad(a == b ? "[" + v + "]" : " " + v, width);
    }
    out << '\n';
  }
  for (const auto& w : o.report.warnings) out << "warning: " << w << "\n";
  return out.str();
}

std::string render(const DimensionOutput& o, ReportFormat format) {
  const auto& curve = o.selection.disagreement;
  std::ostringstream out;
  if (format == ReportFormat::json) {
    ordered_json j;
    j["schema"] = 1;
    j["d_max"] = o.d_max;
    j["selected"] = o.selection.dimension;
    j["disagreement"] = curve;
    return j.dump(2) + "\n";
  }
  if (format == ReportFormat::csv) {
    out << "d,disagreement\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      out << (i + 1) << ',' << fixed(curve[i], 6) << '\n';
    }
    return out.str();
  }
  out << "selected dimension: " << o.selection.dimension << " (d_max = " << o.d_max
      << ")\n";
  out << "d     disagreement\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << pad(std::to_string(i + 1), 6) << fixed(curve[i], 6) << '\n';
  }
  return out.str();
}

}  // namespace hsda::cli
