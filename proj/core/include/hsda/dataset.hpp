#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hsda/hierarchy.hpp"
#include "hsda/subspace.hpp"

namespace hsda {

/// A domain on disk: features, optional two-level labels and the hierarchy
/// those labels refer to.
///
/// Text format (UTF-8, LF line endings):
///
///     HDA v1
///     dims <D>
///     hierarchy <parent:child,child;parent:child,...>
///     labels <present|absent>
///     parent,child,f1,...,fD      (labels present)
///     f1,...,fD                   (labels absent)
///
/// Numbers are written in the shortest decimal form that round-trips.
struct DatasetBundle {
  FeatureMatrix features;
  std::optional<std::vector<HierLabel>> labels;
  Hierarchy hierarchy;
  std::string name;
};

/// Labels-only sidecar: same header, one `parent,child` line per instance.
struct TruthFile {
  Eigen::Index dims = 0;
  Hierarchy hierarchy;
  std::vector<HierLabel> labels;
};

void validate(const DatasetBundle& bundle);

std::string format_dataset(const DatasetBundle& bundle);
DatasetBundle parse_dataset(std::string_view text, std::string name = {});

DatasetBundle load_dataset(const std::filesystem::path& path);
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& path);

std::string format_truth(const TruthFile& truth);
TruthFile parse_truth(std::string_view text);

TruthFile load_truth(const std::filesystem::path& path);
void save_truth(const TruthFile& truth, const std::filesystem::path& path);

/// Shortest round-trip decimal form of a finite double.
std::string format_number(double value);

}  // namespace hsda
