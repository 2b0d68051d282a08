#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include <hsda/pipeline.hpp>
#include <hsda/synth.hpp>

#include "report.hpp"

namespace hsda::cli {

/// Experiment record read from --config. Top-level keys hold the global
/// flags; each command reads its own section. Relative paths are resolved
/// against the directory of the config file.
struct ConfigFile {
  std::filesystem::path directory;
  nlohmann::json document;

  static ConfigFile load(const std::filesystem::path& path);

  /// Section for one command; an empty object when absent.
  const nlohmann::json& section(const std::string& name) const;
  std::filesystem::path resolve(const std::string& value) const;
};

struct GlobalSettings {
  std::optional<std::uint64_t> seed;
  ReportFormat format = ReportFormat::text;
  std::optional<std::filesystem::path> output;
  bool no_truth = false;
};

GlobalSettings read_globals(const ConfigFile& config);

/// Overlays the keys of `section` on `base`. Unknown keys are rejected.
SynthConfig read_synth_config(const nlohmann::json& section, SynthConfig base = {});

nlohmann::json to_json(const SynthConfig& cfg);

ReportFormat parse_report_format(const std::string& text);
Method parse_method(const std::string& text);
Mode parse_mode(const std::string& text);

/// Throws a configuration error naming the first key not in `allowed`.
void require_known_keys(const nlohmann::json& object, std::initializer_list<const char*> allowed,
                        const std::string& where);

}  // namespace hsda::cli
