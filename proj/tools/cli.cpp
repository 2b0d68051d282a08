#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include <hsda/dataset.hpp>
#include <hsda/error.hpp>
#include <hsda/pipeline.hpp>
#include <hsda/synth.hpp>

#include "config.hpp"
#include "report.hpp"

namespace hsda::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Error usage_error(const std::string& message) {
  return Error(ErrorKind::configuration, "configuration error: " + message);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::io, "io error: cannot open '" + path.string() + "' for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw Error(ErrorKind::io, "io error: failed writing '" + path.string() + "'");
}

/// A value that may come from a flag or from the config file; the flag wins.
template <class T>
std::optional<T> pick(const CLI::Option* flag, const T& flag_value, const json& section,
                      const char* key) {
  if (flag->count() > 0) return flag_value;
  const auto it = section.find(key);
  if (it == section.end()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw usage_error(std::string("key '") + key + "' has the wrong type");
  }
}

template <class T>
T pick_or(const CLI::Option* flag, const T& flag_value, const json& section, const char* key) {
  return pick(flag, flag_value, section, key).value_or(flag_value);
}

std::optional<fs::path> pick_path(const CLI::Option* flag, const std::string& flag_value,
                                  const json& section, const char* key,
                                  const ConfigFile& config) {
  if (flag->count() > 0) return fs::path(flag_value);
  const auto it = section.find(key);
  if (it == section.end()) return std::nullopt;
  if (!it->is_string()) throw usage_error(std::string("key '") + key + "' must be a string");
  return config.resolve(it->get<std::string>());
}

fs::path require_path(const std::optional<fs::path>& path, const char* flag) {
  if (!path) throw usage_error(std::string("missing required ") + flag);
  return *path;
}

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string format;
  std::string output;
  bool no_truth = false;
  CLI::Option* config_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* format_opt = nullptr;
  CLI::Option* output_opt = nullptr;

  // Resolved after parsing.
  ConfigFile config;
  GlobalSettings settings;

  void resolve() {
    if (config_opt->count() > 0) {
      config = ConfigFile::load(config_path);
      settings = read_globals(config);
    }
    if (seed_opt->count() > 0) settings.seed = seed;
    if (format_opt->count() > 0) settings.format = parse_report_format(format);
    if (output_opt->count() > 0) settings.output = fs::path(output);
    if (no_truth) settings.no_truth = true;
  }
};

struct DataFlags {
  std::string source, target, truth;
  CLI::Option* source_opt = nullptr;
  CLI::Option* target_opt = nullptr;
  CLI::Option* truth_opt = nullptr;

  void add(CLI::App* app, bool with_truth) {
    source_opt = app->add_option("--source", source, "Labeled source dataset (.hda)");
    target_opt = app->add_option("--target", target, "Target dataset (.hda)");
    if (with_truth) {
      truth_opt = app->add_option("--truth", truth, "Target truth sidecar (.hda)");
    }
  }
};

struct DimFlags {
  int dim = 0;
  bool auto_dim = false;
  int d_max = 0;
  CLI::Option* dim_opt = nullptr;
  CLI::Option* auto_opt = nullptr;
  CLI::Option* d_max_opt = nullptr;

  void add(CLI::App* app) {
    dim_opt = app->add_option("--dim", dim, "Fixed subspace dimension d");
    auto_opt = app->add_flag("--auto-dim", auto_dim,
                             "Choose d from the subspace disagreement curve");
    d_max_opt = app->add_option("--d-max", d_max, "Largest candidate d for --auto-dim");
  }
};

struct Inputs {
  DatasetBundle source;
  DatasetBundle target;
};

Inputs load_inputs(const fs::path& source_path, const fs::path& target_path) {
  DatasetBundle source = load_dataset(source_path);
  DatasetBundle target = load_dataset(target_path);
  if (!source.labels) {
    throw Error(ErrorKind::validation,
                "validation error: source dataset '" + source_path.string() +
                    "' must carry labels");
  }
  if (!(source.hierarchy == target.hierarchy)) {
    throw Error(ErrorKind::validation,
                "validation error: source and target declare different hierarchies");
  }
  if (source.features.cols() != target.features.cols()) {
    throw Error(ErrorKind::validation,
                "validation error: source has " + std::to_string(source.features.cols()) +
                    " dims, target has " + std::to_string(target.features.cols()));
  }
  return Inputs{std::move(source), std::move(target)};
}

std::vector<HierLabel> load_truth_for(const fs::path& path, const DatasetBundle& target) {
  TruthFile truth = load_truth(path);
  if (!(truth.hierarchy == target.hierarchy)) {
    throw Error(ErrorKind::validation,
                "validation error: truth sidecar declares a different hierarchy");
  }
  if (truth.dims != target.features.cols() ||
      static_cast<Eigen::Index>(truth.labels.size()) != target.features.rows()) {
    throw Error(ErrorKind::validation,
                "validation error: truth sidecar has " + std::to_string(truth.labels.size()) +
                    " rows for " + std::to_string(target.features.rows()) + " target rows");
  }
  return std::move(truth.labels);
}

/// Fixed d or the disagreement-curve choice; exactly one must be requested.
struct DimChoice {
  int d = 0;
  bool automatic = false;
  int d_max = 0;
};

std::optional<DimChoice> choose_dimension(const DimFlags& flags, const json& section,
                                          const Inputs& inputs) {
  const auto dim = pick(flags.dim_opt, flags.dim, section, "d");
  const bool automatic = pick_or(flags.auto_opt, flags.auto_dim, section, "auto_dim");
  const auto d_max = pick(flags.d_max_opt, flags.d_max, section, "d_max");
  if (dim && automatic) throw usage_error("give either --dim or --auto-dim, not both");
  if (dim) return DimChoice{*dim, false, 0};
  if (!automatic) return std::nullopt;
  if (!d_max) throw usage_error("--auto-dim needs --d-max");
  const int d = select_dimension(inputs.source.features, inputs.target.features, *d_max);
  return DimChoice{d, true, *d_max};
}

std::vector<HierLabel> lift(const std::vector<Label>& children, const Hierarchy& hierarchy) {
  std::vector<HierLabel> out;
  out.reserve(children.size());
  for (const Label c : children) out.push_back(HierLabel{hierarchy.parent_of(c), c});
  return out;
}

std::vector<std::string> parent_names(const Hierarchy& hierarchy) {
  std::vector<std::string> names;
  for (int p = 0; p < hierarchy.parent_count(); ++p) names.push_back(hierarchy.parent_name(p));
  return names;
}

std::string fs_message(const fs::filesystem_error& e) {
  return std::string("io error: ") + e.what();
}

// ---------------------------------------------------------------- synth

int cmd_synth(const Globals& g, std::ostream& out) {
  const json& section = g.config.section("synth");
  SynthConfig cfg = read_synth_config(section);
  if (g.settings.seed) cfg.seed = *g.settings.seed;
  std::optional<fs::path> out_dir = g.settings.output;
  if (!out_dir && section.contains("out_dir")) {
    out_dir = g.config.resolve(section.at("out_dir").get<std::string>());
  }
  if (!out_dir) throw usage_error("synth needs --output <directory>");

  const SynthResult result = synth_generate(cfg);

  try {
    fs::create_directories(*out_dir);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::io, fs_message(e));
  }
  const fs::path source_path = *out_dir / "source.hda";
  const fs::path target_path = *out_dir / "target.hda";
  const fs::path truth_path = *out_dir / "target.truth.hda";
  save_dataset(result.source, source_path);
  save_dataset(result.target, target_path);
  save_truth(TruthFile{result.target.features.cols(), result.target.hierarchy,
                       result.target_truth},
             truth_path);

  const Hierarchy& h = result.source.hierarchy;
  if (g.settings.format == ReportFormat::json) {
    json j;
    j["schema"] = 1;
    j["prng"] = std::string(kSynthPrng);
    j["config"] = to_json(cfg);
    j["parents"] = h.parent_count();
    j["children"] = h.child_count();
    j["hierarchy"] = h.to_string();
    j["source_rows"] = result.source.features.rows();
    j["target_rows"] = result.target.features.rows();
    j["dims"] = result.source.features.cols();
    j["files"] = {source_path.string(), target_path.string(), truth_path.string()};
    j["warnings"] = result.warnings;
    out << j.dump(2) << "\n";
  } else if (g.settings.format == ReportFormat::csv) {
    out << "key,value\n"
        << "prng," << kSynthPrng << "\n"
        << "seed," << cfg.seed << "\n"
        << "parents," << h.parent_count() << "\n"
        << "children," << h.child_count() << "\n"
        << "source_rows," << result.source.features.rows() << "\n"
        << "target_rows," << result.target.features.rows() << "\n"
        << "dims," << result.source.features.cols() << "\n";
  } else {
    out << "generated synthetic hierarchical domain shift\n"
        << "  prng: " << kSynthPrng << "  seed: " << cfg.seed << "\n"
        << "  parents: " << h.parent_count() << "  children: " << h.child_count() << "\n"
        << "  hierarchy: " << h.to_string() << "\n"
        << "  source rows: " << result.source.features.rows()
        << "  target rows: " << result.target.features.rows()
        << "  dims: " << result.source.features.cols() << "\n"
        << "  wrote " << source_path.string() << "\n"
        << "  wrote " << target_path.string() << "\n"
        << "  wrote " << truth_path.string() << "\n";
    for (const auto& w : result.warnings) out << "warning: " << w << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- adapt

struct AdaptFlags {
  DataFlags data;
  DimFlags dim;
  std::string method = "sa";
  std::string mode = "hier";
  int d_branch = 0;
  int k = 1;
  std::string report;
  CLI::Option* method_opt = nullptr;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* d_branch_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* report_opt = nullptr;
};

int cmd_adapt(const Globals& g, const AdaptFlags& f, std::ostream& out) {
  const json& section = g.config.section("adapt");
  require_known_keys(section,
                     {"source", "target", "truth", "method", "mode", "d", "auto_dim", "d_max",
                      "d_branch", "k", "report"},
                     "section 'adapt'");
  const fs::path source_path =
      require_path(pick_path(f.data.source_opt, f.data.source, section, "source", g.config),
                   "--source");
  const fs::path target_path =
      require_path(pick_path(f.data.target_opt, f.data.target, section, "target", g.config),
                   "--target");
  const auto truth_path = pick_path(f.data.truth_opt, f.data.truth, section, "truth", g.config);
  const auto report_path = pick_path(f.report_opt, f.report, section, "report", g.config);
  if (!g.settings.output) throw usage_error("adapt needs --output <predictions file>");

  const Method method = parse_method(pick_or(f.method_opt, f.method, section, "method"));
  const Mode mode = parse_mode(pick_or(f.mode_opt, f.mode, section, "mode"));
  const int k = pick_or(f.k_opt, f.k, section, "k");
  const int d_branch = pick_or(f.d_branch_opt, f.d_branch, section, "d_branch");
  if (k < 1) throw usage_error("--k must be positive");
  if (d_branch < 0) throw usage_error("--d-branch must be non-negative");

  const Inputs inputs = load_inputs(source_path, target_path);
  const Hierarchy& hierarchy = inputs.source.hierarchy;
  const std::optional<DimChoice> dim = choose_dimension(f.dim, section, inputs);
  if (mode != Mode::base && !dim) {
    throw usage_error("mode " + std::string(to_string(mode)) + " needs --dim or --auto-dim");
  }

  const std::vector<HierLabel>& source_labels = *inputs.source.labels;
  const LabeledSet train(inputs.source.features, child_labels(source_labels));

  AdaptReport report;
  report.source_name = inputs.source.name;
  report.target_name = inputs.target.name;
  report.method = method;
  report.mode = mode;
  report.k = k;
  report.parent_names = parent_names(hierarchy);
  if (dim) {
    report.dimension = dim->d;
    report.dimension_auto = dim->automatic;
    report.branch_dimension = d_branch == 0 ? dim->d : d_branch;
  }

  const std::vector<Label> base = baseline_no_adaptation(train, inputs.target.features, k);
  std::optional<std::vector<Label>> flat;
  std::optional<std::vector<HierLabel>> hier;
  if (mode != Mode::base) flat = adapt_flat(train, inputs.target.features, method, dim->d, k);
  if (mode == Mode::hier) {
    HierResult result = hier_adapt(inputs.source.features, source_labels,
                                   inputs.target.features, hierarchy,
                                   HierConfig{method, dim->d, d_branch, k});
    for (const SkippedParent& s : result.model.skipped_parents) {
      report.skipped_parents.push_back(hierarchy.parent_name(s.parent) + ": " + s.reason);
    }
    report.warnings = result.model.warnings;
    hier = std::move(result.predictions);
  }

  const std::vector<HierLabel> predictions =
      hier ? *hier : lift(flat ? *flat : base, hierarchy);

  // The sidecar is only read when truth is requested and not suppressed.
  if (truth_path && !g.settings.no_truth) {
    const std::vector<HierLabel> truth = load_truth_for(*truth_path, inputs.target);
    const std::vector<Label> truth_children = child_labels(truth);
    EvalReport e = evaluate(predictions, truth, hierarchy);
    e.base_accuracy = 100.0 * accuracy(base, truth_children);
    if (flat) e.flat_accuracy = 100.0 * accuracy(*flat, truth_children);
    if (hier) e.hier_accuracy = 100.0 * accuracy(child_labels(*hier), truth_children);
    report.evaluation = std::move(e);
  }

  save_truth(TruthFile{inputs.target.features.cols(), hierarchy, predictions},
             *g.settings.output);
  const std::string text = render(report, g.settings.format);
  if (report_path) write_text(*report_path, text);
  out << text;
  return kExitOk;
}

// ---------------------------------------------------------------- similarity

struct SimilarityFlags {
  DataFlags data;
  DimFlags dim;
};

int cmd_similarity(const Globals& g, const SimilarityFlags& f, std::ostream& out) {
  const json& section = g.config.section("similarity");
  require_known_keys(section, {"source", "target", "truth", "d", "auto_dim", "d_max"},
                     "section 'similarity'");
  if (g.settings.no_truth) {
    throw usage_error(
        "similarity compares subspaces of the true target classes and cannot run with "
        "--no-truth");
  }
  const fs::path source_path =
      require_path(pick_path(f.data.source_opt, f.data.source, section, "source", g.config),
                   "--source");
  const fs::path target_path =
      require_path(pick_path(f.data.target_opt, f.data.target, section, "target", g.config),
                   "--target");
  const auto truth_path = pick_path(f.data.truth_opt, f.data.truth, section, "truth", g.config);
  if (!truth_path) {
    throw usage_error(
        "similarity compares subspaces of the true target classes and needs --truth");
  }
  const Inputs inputs = load_inputs(source_path, target_path);
  const std::vector<HierLabel> truth = load_truth_for(*truth_path, inputs.target);
  const std::optional<DimChoice> dim = choose_dimension(f.dim, section, inputs);
  if (!dim) throw usage_error("similarity needs --dim or --auto-dim");

  SimilarityOutput output{parent_names(inputs.source.hierarchy),
                          similarity_matrix(inputs.source.features, *inputs.source.labels,
                                            inputs.target.features, truth,
                                            inputs.source.hierarchy, dim->d)};
  const std::string text = render(output, g.settings.format);
  if (g.settings.output) write_text(*g.settings.output, text);
  out << text;
  return kExitOk;
}

// ---------------------------------------------------------------- select-dim

struct SelectFlags {
  std::string source, target;
  int d_max = 0;
  CLI::Option* source_opt = nullptr;
  CLI::Option* target_opt = nullptr;
  CLI::Option* d_max_opt = nullptr;
};

int cmd_select_dim(const Globals& g, const SelectFlags& f, std::ostream& out) {
  const json& section = g.config.section("select_dim");
  require_known_keys(section, {"source", "target", "d_max"}, "section 'select_dim'");
  const fs::path source_path =
      require_path(pick_path(f.source_opt, f.source, section, "source", g.config), "--source");
  const fs::path target_path =
      require_path(pick_path(f.target_opt, f.target, section, "target", g.config), "--target");
  const auto d_max = pick(f.d_max_opt, f.d_max, section, "d_max");
  if (!d_max) throw usage_error("select-dim needs --d-max");

  const DatasetBundle source = load_dataset(source_path);
  const DatasetBundle target = load_dataset(target_path);
  DimensionOutput output{*d_max,
                         select_dimension_curve(source.features, target.features, *d_max)};
  const std::string text = render(output, g.settings.format);
  if (g.settings.output) write_text(*g.settings.output, text);
  out << text;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical subspace domain adaptation (SA and GFK)", "hsda"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  g.config_opt = app.add_option("--config", g.config_path, "JSON experiment config");
  g.seed_opt = app.add_option("--seed", g.seed, "Seed for synthetic generation");
  g.format_opt = app.add_option("--report-format", g.format, "text, csv or json")
                     ->check(CLI::IsMember({"text", "csv", "json"}));
  g.output_opt = app.add_option("--output", g.output,
                                "synth: output directory; adapt: predictions file; "
                                "similarity/select-dim: report copy");
  app.add_flag("--no-truth", g.no_truth, "Never read a truth sidecar");

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic source/target pair");

  AdaptFlags adapt_flags;
  CLI::App* adapt = app.add_subcommand("adapt", "Adapt, predict and evaluate");
  adapt_flags.data.add(adapt, true);
  adapt_flags.dim.add(adapt);
  adapt_flags.method_opt = adapt->add_option("--method", adapt_flags.method, "sa or gfk")
                               ->check(CLI::IsMember({"sa", "gfk"}));
  adapt_flags.mode_opt = adapt->add_option("--mode", adapt_flags.mode, "base, flat or hier")
                             ->check(CLI::IsMember({"base", "flat", "hier"}));
  adapt_flags.d_branch_opt =
      adapt->add_option("--d-branch", adapt_flags.d_branch, "Per-parent d (0: same as --dim)");
  adapt_flags.k_opt = adapt->add_option("--k", adapt_flags.k, "Neighbours for K-NN");
  adapt_flags.report_opt = adapt->add_option("--report", adapt_flags.report, "Report copy");

  SimilarityFlags similarity_flags;
  CLI::App* similarity =
      app.add_subcommand("similarity", "Root and per-parent subspace similarity matrix");
  similarity_flags.data.add(similarity, true);
  similarity_flags.dim.add(similarity);

  SelectFlags select_flags;
  CLI::App* select = app.add_subcommand("select-dim", "Disagreement curve and selected d");
  select_flags.source_opt = select->add_option("--source", select_flags.source, "Source dataset");
  select_flags.target_opt = select->add_option("--target", select_flags.target, "Target dataset");
  select_flags.d_max_opt = select->add_option("--d-max", select_flags.d_max, "Largest d");

  for (CLI::App* sub : {synth, adapt, similarity, select}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    g.resolve();
    if (synth->parsed()) return cmd_synth(g, out);
    if (adapt->parsed()) return cmd_adapt(g, adapt_flags, out);
    if (similarity->parsed()) return cmd_similarity(g, similarity_flags, out);
    return cmd_select_dim(g, select_flags, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.kind() == ErrorKind::io ? kExitIo : kExitInvalid;
  } catch (const fs::filesystem_error& e) {
    err << fs_message(e) << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace hsda::cli
