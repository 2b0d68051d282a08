#pragma once

#include <optional>
#include <string>
#include <vector>

#include <hsda/pipeline.hpp>

namespace hsda::cli {

enum class ReportFormat { text, csv, json };
enum class Mode { base, flat, hier };

const char* to_string(ReportFormat format) noexcept;
const char* to_string(Mode mode) noexcept;

struct AdaptReport {
  std::string source_name;
  std::string target_name;
  Method method = Method::sa;
  Mode mode = Mode::hier;
  int dimension = 0;
  int branch_dimension = 0;
  bool dimension_auto = false;
  int k = 1;
  std::vector<std::string> parent_names;
  /// Empty when no truth labels were available.
  std::optional<EvalReport> evaluation;
  std::vector<std::string> skipped_parents;
  std::vector<std::string> warnings;
};

struct SimilarityOutput {
  std::vector<std::string> parent_names;
  SimilarityReport report;
};

struct DimensionOutput {
  int d_max = 0;
  DimensionSelection selection;
};

/// Percentages are printed with two decimals.
std::string format_percent(double value);

std::string render(const AdaptReport& report, ReportFormat format);
std::string render(const SimilarityOutput& output, ReportFormat format);
std::string render(const DimensionOutput& output, ReportFormat format);

}  // namespace hsda::cli
