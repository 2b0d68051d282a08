#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <hsda/dataset.hpp>

#include "cli.hpp"
#include "config.hpp"
#include "test_support.hpp"

namespace hsda {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Whitespace-separated cells of the first report line starting with `method`.
std::vector<std::string> table_row(const std::string& report, const std::string& method) {
  std::istringstream lines(report);
  for (std::string line; std::getline(lines, line);) {
    std::istringstream cells(line);
    std::vector<std::string> row(std::istream_iterator<std::string>(cells), {});
    if (!row.empty() && row[0] == method) return row;
  }
  return {};
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    // ctest runs each test in its own process, possibly in parallel.
    root_ = fs::temp_directory_path() / ("hsda_cli_" + std::to_string(std::random_device{}()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    const Outcome o = run({"synth", "--output", (root_ / "data").string()});
    ASSERT_EQ(o.code, 0) << o.err;
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::string data(const char* file) { return (root_ / "data" / file).string(); }
  static std::string path(const std::string& name) { return (root_ / name).string(); }

  static std::vector<std::string> adapt_args(const std::string& method, const std::string& mode,
                                             const std::string& out) {
    return {"adapt", "--source", data("source.hda"), "--target", data("target.hda"),
            "--truth", data("target.truth.hda"), "--method", method, "--mode", mode,
            "--dim", "5", "--output", path(out)};
  }

  static fs::path root_;
};

fs::path Cli::root_;

TEST_F(Cli, SynthWritesThreeFilesAndSummary) {
  const Outcome o = run({"synth", "--output", path("fresh")});
  ASSERT_EQ(o.code, 0) << o.err;
  for (const char* f : {"source.hda", "target.hda", "target.truth.hda"}) {
    EXPECT_TRUE(fs::exists(root_ / "fresh" / f)) << f;
  }
  EXPECT_NE(o.out.find("parents: 3"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("children: 9"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("mt19937_64"), std::string::npos) << o.out;
  EXPECT_NE(slurp(root_ / "fresh" / "target.hda").find("labels absent"), std::string::npos);
}

TEST_F(Cli, SynthIsDeterministic) {
  ASSERT_EQ(run({"synth", "--seed", "5", "--output", path("s1")}).code, 0);
  ASSERT_EQ(run({"synth", "--seed", "5", "--output", path("s2")}).code, 0);
  ASSERT_EQ(run({"synth", "--seed", "6", "--output", path("s3")}).code, 0);
  for (const char* f : {"source.hda", "target.hda", "target.truth.hda"}) {
    EXPECT_EQ(slurp(root_ / "s1" / f), slurp(root_ / "s2" / f)) << f;
  }
  EXPECT_NE(slurp(root_ / "s1" / "source.hda"), slurp(root_ / "s3" / "source.hda"));
}

TEST_F(Cli, SynthUnwritableDirectory) {
  std::ofstream(path("blocker")) << "x";
  const Outcome o = run({"synth", "--output", path("blocker") + "/sub"});
  EXPECT_EQ(o.code, 2);
  EXPECT_FALSE(o.err.empty());
}

TEST_F(Cli, SynthInvalidConfig) {
  std::ofstream(path("bad.json")) << R"({"synth": {"n_parents": 0}})";
  const Outcome o = run({"--config", path("bad.json"), "synth", "--output", path("never")});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("n_parents"), std::string::npos) << o.err;

  std::ofstream(path("typo.json")) << R"({"synth": {"n_parent": 2}})";
  EXPECT_EQ(run({"--config", path("typo.json"), "synth", "--output", path("never")}).code, 1);
  std::ofstream(path("broken.json")) << "{";
  EXPECT_EQ(run({"--config", path("broken.json"), "synth", "--output", path("never")}).code, 1);
}

TEST_F(Cli, BaseModeHasOneAccuracyCell) {
  auto args = adapt_args("sa", "base", "pred_base.hda");
  args.insert(args.end(), {"--report-format", "json"});
  const Outcome o = run(args);
  ASSERT_EQ(o.code, 0) << o.err;
  const json j = json::parse(o.out);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_TRUE(j["base_accuracy"].is_number());
  EXPECT_TRUE(j["flat_accuracy"].is_null());
  EXPECT_TRUE(j["hier_accuracy"].is_null());
}

TEST_F(Cli, TableShapedGrid) {
  struct Row {
    const char* method;
    const char* flat;
    const char* hier;
  };
  for (const Row r : {Row{"sa", "84.81", "97.78"}, Row{"gfk", "86.30", "97.41"}}) {
    const Outcome base = run(adapt_args(r.method, "base", "g.hda"));
    const Outcome flat = run(adapt_args(r.method, "flat", "g.hda"));
    const Outcome hier = run(adapt_args(r.method, "hier", "g.hda"));
    ASSERT_EQ(base.code + flat.code + hier.code, 0) << base.err << flat.err << hier.err;
    const std::string upper = r.method == std::string("sa") ? "SA" : "GFK";
    using Cells = std::vector<std::string>;
    EXPECT_EQ(table_row(base.out, upper), (Cells{upper, "61.67", "-", "-"}));
    EXPECT_EQ(table_row(flat.out, upper), (Cells{upper, "61.67", r.flat, "-"}));
    EXPECT_EQ(table_row(hier.out, upper), (Cells{upper, "61.67", r.flat, r.hier}));
  }
}

TEST_F(Cli, CsvReport) {
  auto args = adapt_args("gfk", "hier", "csv.hda");
  args.insert(args.end(), {"--report-format", "csv"});
  const Outcome o = run(args);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out,
            "method,mode,d,d_branch,k,base_accuracy,flat_accuracy,hier_accuracy,parent_accuracy\n"
            "GFK,hier,5,5,1,61.67,86.30,97.41,100.00\n");
}

TEST_F(Cli, PredictionsFollowTruthFormat) {
  ASSERT_EQ(run(adapt_args("sa", "hier", "pred.hda")).code, 0);
  const TruthFile t = load_truth(path("pred.hda"));
  EXPECT_EQ(t.labels.size(), 540u);
  EXPECT_EQ(t.dims, 40);
}

TEST_F(Cli, MissingTruthStillWritesPredictions) {
  const Outcome o = run({"adapt", "--source", data("source.hda"), "--target", data("target.hda"),
                         "--dim", "5", "--output", path("unsup.hda")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("accuracy unavailable"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("unsup.hda")));
}

TEST_F(Cli, NoTruthFlagNeverReadsSidecar) {
  const Outcome o = run({"--no-truth", "adapt", "--source", data("source.hda"), "--target",
                         data("target.hda"), "--truth", path("does-not-exist.hda"), "--dim", "5",
                         "--output", path("nt.hda")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("accuracy unavailable"), std::string::npos);
}

TEST_F(Cli, AdaptErrors) {
  auto geometry = adapt_args("gfk", "flat", "x.hda");
  geometry[geometry.size() - 3] = "25";
  Outcome o = run(geometry);
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("geometry"), std::string::npos) << o.err;

  auto both = adapt_args("sa", "flat", "x.hda");
  both.insert(both.end(), {"--auto-dim", "--d-max", "5"});
  EXPECT_EQ(run(both).code, 1);

  auto missing = adapt_args("sa", "flat", "x.hda");
  missing[2] = path("nope.hda");
  EXPECT_EQ(run(missing).code, 2);

  EXPECT_EQ(run({"adapt", "--bogus"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, AutoDimension) {
  auto args = adapt_args("sa", "flat", "auto.hda");
  args.erase(args.end() - 4, args.end() - 2);
  args.insert(args.end(), {"--auto-dim", "--d-max", "6", "--report-format", "json"});
  const Outcome o = run(args);
  ASSERT_EQ(o.code, 0) << o.err;
  const json j = json::parse(o.out);
  EXPECT_TRUE(j["d_auto"].get<bool>());
  EXPECT_GE(j["d"].get<int>(), 1);
  EXPECT_LE(j["d"].get<int>(), 6);
}

TEST_F(Cli, AdaptIsByteDeterministic) {
  auto a = adapt_args("gfk", "hier", "det1.hda");
  a.insert(a.end(), {"--report", path("det1.txt")});
  auto b = adapt_args("gfk", "hier", "det2.hda");
  b.insert(b.end(), {"--report", path("det2.txt")});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  EXPECT_EQ(slurp(path("det1.hda")), slurp(path("det2.hda")));
  EXPECT_EQ(slurp(path("det1.txt")), slurp(path("det2.txt")));
}

TEST_F(Cli, ConfigFileWithOverrides) {
  fs::create_directories(root_ / "exp");
  fs::copy_file(data("source.hda"), root_ / "exp" / "source.hda",
                fs::copy_options::overwrite_existing);
  fs::copy_file(data("target.hda"), root_ / "exp" / "target.hda",
                fs::copy_options::overwrite_existing);
  fs::copy_file(data("target.truth.hda"), root_ / "exp" / "truth.hda",
                fs::copy_options::overwrite_existing);
  std::ofstream(root_ / "exp" / "run.json") << R"({
    "report_format": "csv",
    "output": "pred.hda",
    "adapt": {"source": "source.hda", "target": "target.hda", "truth": "truth.hda",
              "method": "gfk", "mode": "flat", "d": 5}
  })";
  Outcome o = run({"--config", (root_ / "exp" / "run.json").string(), "adapt"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("GFK,flat,5,5,1,61.67,86.30,,"), std::string::npos) << o.out;
  EXPECT_TRUE(fs::exists(root_ / "exp" / "pred.hda"));

  o = run({"--config", (root_ / "exp" / "run.json").string(), "adapt", "--method", "sa",
           "--report-format", "text"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(table_row(o.out, "SA"), (std::vector<std::string>{"SA", "61.67", "84.81", "-"}));
}

TEST_F(Cli, SimilarityNeedsTruth) {
  Outcome o = run({"similarity", "--source", data("source.hda"), "--target", data("target.hda"),
                   "--dim", "5"});
  EXPECT_NE(o.code, 0);
  EXPECT_NE(o.err.find("truth"), std::string::npos) << o.err;
  o = run({"--no-truth", "similarity", "--source", data("source.hda"), "--target",
           data("target.hda"), "--truth", data("target.truth.hda"), "--dim", "5"});
  EXPECT_NE(o.code, 0);
}

TEST_F(Cli, SimilarityMatrix) {
  const std::vector<std::string> base{"similarity", "--source", data("source.hda"), "--target",
                                      data("target.hda"), "--truth", data("target.truth.hda"),
                                      "--dim", "5"};
  Outcome o = run(base);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("Root(Source)"), std::string::npos);
  EXPECT_NE(o.out.find("p2(Target)"), std::string::npos);
  EXPECT_NE(o.out.find("[4.64]"), std::string::npos) << o.out;

  auto json_args = base;
  json_args.insert(json_args.end(), {"--report-format", "json"});
  o = run(json_args);
  ASSERT_EQ(o.code, 0);
  const json j = json::parse(o.out);
  EXPECT_EQ(j["labels"], json({"Root", "p0", "p1", "p2"}));
  const auto& m = j["matrix"];
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      if (k != i) EXPECT_LT(m[i][k].get<double>(), m[i][i].get<double>());
    }
  }

  auto csv_args = base;
  csv_args.insert(csv_args.end(), {"--report-format", "csv"});
  o = run(csv_args);
  ASSERT_EQ(o.code, 0);
  std::istringstream lines(o.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "source,Root,p0,p1,p2");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
  }
  EXPECT_EQ(rows, 4);
}

TEST_F(Cli, SimilaritySelfComparison) {
  // Truth for the source file is its own labels.
  const DatasetBundle s = load_dataset(data("source.hda"));
  save_truth(TruthFile{s.features.cols(), s.hierarchy, *s.labels}, path("self_truth.hda"));
  const Outcome o =
      run({"similarity", "--source", data("source.hda"), "--target", data("source.hda"),
           "--truth", path("self_truth.hda"), "--dim", "5", "--report-format", "json"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json j = json::parse(o.out);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(j["matrix"][i][i].get<double>(), 5.0, 1e-10);
}

TEST_F(Cli, SelectDimension) {
  Outcome o = run({"select-dim", "--source", data("source.hda"), "--target", data("source.hda"),
                   "--d-max", "6", "--report-format", "json"});
  ASSERT_EQ(o.code, 0) << o.err;
  json j = json::parse(o.out);
  EXPECT_EQ(j["selected"], 6);
  for (const auto& v : j["disagreement"]) EXPECT_NEAR(v.get<double>(), 0.0, 1e-6);

  // Shared first axis, orthogonal second axis.
  test::Rng rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(100, 3), T = Eigen::MatrixXd::Zero(100, 3);
  for (Eigen::Index i = 0; i < 100; ++i) {
    S(i, 0) = 5 * normal(rng);
    S(i, 1) = normal(rng);
    T(i, 0) = 5 * normal(rng);
    T(i, 2) = normal(rng);
  }
  const Hierarchy h = Hierarchy::parse("a:x");
  save_dataset(DatasetBundle{FeatureMatrix(S), std::nullopt, h, "s"}, path("axis_s.hda"));
  save_dataset(DatasetBundle{FeatureMatrix(T), std::nullopt, h, "t"}, path("axis_t.hda"));
  o = run({"select-dim", "--source", path("axis_s.hda"), "--target", path("axis_t.hda"),
           "--d-max", "2"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("selected dimension: 2"), std::string::npos) << o.out;

  o = run({"select-dim", "--source", path("axis_s.hda"), "--target", path("axis_t.hda"),
           "--d-max", "2", "--report-format", "csv"});
  std::istringstream lines(o.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "d,disagreement");
  while (std::getline(lines, line)) {
    const double v = std::stod(line.substr(line.find(',') + 1));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }

  o = run({"select-dim", "--source", path("axis_s.hda"), "--target", path("axis_t.hda"),
           "--d-max", "4"});
  EXPECT_EQ(o.code, 1);
  EXPECT_FALSE(o.err.empty());
}

TEST(BundledConfig, MatchesCompiledDefaults) {
  const cli::ConfigFile cfg = cli::ConfigFile::load(HSDA_SOURCE_DIR "/configs/benchmark.json");
  EXPECT_EQ(cli::read_globals(cfg).seed, std::optional<std::uint64_t>(0));
  EXPECT_EQ(cli::to_json(cli::read_synth_config(cfg.section("synth"))),
            cli::to_json(SynthConfig{}));
}

}  // namespace
}  // namespace hsda
