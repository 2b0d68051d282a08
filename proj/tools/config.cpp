#include "config.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <hsda/error.hpp>

namespace hsda::cli {

using nlohmann::json;

namespace {

Error config_error(const std::string& message) {
  return Error(ErrorKind::configuration, "configuration error: " + message);
}

template <class T>
void read_key(const json& section, const char* key, T& value) {
  const auto it = section.find(key);
  if (it == section.end()) return;
  try {
    value = it->get<T>();
  } catch (const json::exception&) {
    throw config_error(std::string("key '") + key + "' has the wrong type");
  }
}

}  // namespace

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::io, "io error: cannot open config '" + path.string() + "'");
  }
  ConfigFile config;
  try {
    config.document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse,
                "parse error: config '" + path.string() + "': " + e.what());
  }
  if (!config.document.is_object()) {
    throw config_error("config '" + path.string() + "' must hold a JSON object");
  }
  config.directory = std::filesystem::absolute(path).parent_path();
  return config;
}

const json& ConfigFile::section(const std::string& name) const {
  static const json empty = json::object();
  const auto it = document.find(name);
  if (it == document.end()) return empty;
  if (!it->is_object()) throw config_error("section '" + name + "' must be an object");
  return *it;
}

std::filesystem::path ConfigFile::resolve(const std::string& value) const {
  std::filesystem::path p(value);
  if (p.is_relative() && !directory.empty()) return directory / p;
  return p;
}

void require_known_keys(const json& object, std::initializer_list<const char*> allowed,
                        const std::string& where) {
  for (const auto& item : object.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) {
      return item.key() == k;
    });
    if (!known) throw config_error("unknown key '" + item.key() + "' in " + where);
  }
}

GlobalSettings read_globals(const ConfigFile& config) {
  GlobalSettings g;
  const json& doc = config.document;
  if (doc.is_null()) return g;
  require_known_keys(doc,
                     {"seed", "report_format", "output", "no_truth", "synth", "adapt",
                      "similarity", "select_dim"},
                     "config");
  if (doc.contains("seed")) {
    std::uint64_t seed = 0;
    read_key(doc, "seed", seed);
    g.seed = seed;
  }
  if (doc.contains("report_format")) {
    std::string format;
    read_key(doc, "report_format", format);
    g.format = parse_report_format(format);
  }
  if (doc.contains("output")) {
    std::string output;
    read_key(doc, "output", output);
    g.output = config.resolve(output);
  }
  read_key(doc, "no_truth", g.no_truth);
  return g;
}

SynthConfig read_synth_config(const json& section, SynthConfig cfg) {
  require_known_keys(section,
                     {"n_parents", "children_per_parent", "source_instances_per_child",
                      "target_instances_per_child", "ambient_dim", "subspace_dim",
                      "cluster_spread", "parent_separation", "child_separation",
                      "global_rotation", "global_translation", "per_parent_rotation", "noise",
                      "seed", "out_dir"},
                     "section 'synth'");
  read_key(section, "n_parents", cfg.n_parents);
  read_key(section, "children_per_parent", cfg.children_per_parent);
  read_key(section, "source_instances_per_child", cfg.source_instances_per_child);
  read_key(section, "target_instances_per_child", cfg.target_instances_per_child);
  read_key(section, "ambient_dim", cfg.ambient_dim);
  read_key(section, "subspace_dim", cfg.subspace_dim);
  read_key(section, "cluster_spread", cfg.cluster_spread);
  read_key(section, "parent_separation", cfg.parent_separation);
  read_key(section, "child_separation", cfg.child_separation);
  read_key(section, "global_rotation", cfg.global_rotation);
  read_key(section, "global_translation", cfg.global_translation);
  read_key(section, "per_parent_rotation", cfg.per_parent_rotation);
  read_key(section, "noise", cfg.noise);
  read_key(section, "seed", cfg.seed);
  return cfg;
}

json to_json(const SynthConfig& cfg) {
  json j = json::object();
  j["n_parents"] = cfg.n_parents;
  j["children_per_parent"] = cfg.children_per_parent;
  j["source_instances_per_child"] = cfg.source_instances_per_child;
  j["target_instances_per_child"] = cfg.target_instances_per_child;
  j["ambient_dim"] = cfg.ambient_dim;
  j["subspace_dim"] = cfg.subspace_dim;
  j["cluster_spread"] = cfg.cluster_spread;
  j["parent_separation"] = cfg.parent_separation;
  j["child_separation"] = cfg.child_separation;
  j["global_rotation"] = cfg.global_rotation;
  j["global_translation"] = cfg.global_translation;
  j["per_parent_rotation"] = cfg.per_parent_rotation;
  j["noise"] = cfg.noise;
  j["seed"] = cfg.seed;
  return j;
}

ReportFormat parse_report_format(const std::string& text) {
  if (text == "text") return ReportFormat::text;
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  throw config_error("report format must be text, csv or json (got '" + text + "')");
}

Method parse_method(const std::string& text) {
  if (text == "sa" || text == "SA") return Method::sa;
  if (text == "gfk" || text == "GFK") return Method::gfk;
  throw config_error("method must be sa or gfk (got '" + text + "')");
}

Mode parse_mode(const std::string& text) {
  if (text == "base") return Mode::base;
  if (text == "flat") return Mode::flat;
  if (text == "hier") return Mode::hier;
  throw config_error("mode must be base, flat or hier (got '" + text + "')");
}

}  // namespace hsda::cli
