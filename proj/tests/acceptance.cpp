// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include <hsda/alignment.hpp>
#include <hsda/dataset.hpp>
#include <hsda/pipeline.hpp>
#include <hsda/synth.hpp>

#include "cli.hpp"
#include "test_support.hpp"

namespace hsda {
namespace {

namespace fs = std::filesystem;
using test::Rng;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// 1. No perturbation of the closed-form transform lowers the SA objective.
Outcome sa_optimality() {
  Rng rng(101);
  std::uniform_int_distribution<int> dim(1, 10);
  double worst = -1e300;
  for (int pair = 0; pair < 100; ++pair) {
    const int d = dim(rng);
    const int D = std::uniform_int_distribution<int>(d, 50)(rng);
    const SubspaceBasis Xs = test::random_basis(D, d, rng);
    const SubspaceBasis Xt = test::random_basis(D, d, rng);
    const Eigen::MatrixXd M = sa_align(Xs, Xt).transform;
    const double best = sa_objective(Xs, Xt, M);
    for (int p = 0; p < 100; ++p) {
      const Eigen::MatrixXd N = test::random_matrix(d, d, rng);
      worst = std::max(worst, best - sa_objective(Xs, Xt, M + 1e-3 * N));
    }
  }
  return {worst <= 1e-12, fmt("max F(M*) - F(M* + 1e-3 N) = %.3e", worst)};
}

// Target basis at prescribed principal angles from a random source basis.
std::pair<SubspaceBasis, SubspaceBasis> pair_at_angles(int D, const Eigen::VectorXd& theta,
                                                       Rng& rng) {
  const Eigen::Index d = theta.size();
  const Eigen::MatrixXd Q = test::random_orthonormal(D, 2 * d, rng);
  Eigen::MatrixXd Xt(D, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Xt.col(j) = std::cos(theta(j)) * Q.col(j) + std::sin(theta(j)) * Q.col(d + j);
  }
  // Mix the target columns so the angles are not handed over column by column.
  const Eigen::MatrixXd mix = test::random_orthonormal(d, d, rng);
  return {SubspaceBasis::uncentered(Q.leftCols(d)), SubspaceBasis::uncentered(Xt * mix)};
}

struct GfkInstance {
  SubspaceBasis Xs;
  SubspaceBasis Xt;
};

// 20 pairs with D <= 50, d <= 10, 2d <= D. The first three carry angles of
// exactly zero, 3e-9 (below the closed-form limit switch) and 5e-7.
std::vector<GfkInstance> gfk_instances() {
  Rng rng(202);
  std::vector<GfkInstance> out;
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi / 2);
  for (int i = 0; i < 20; ++i) {
    const int d = 1 + (i * 7) % 10;
    const int D = std::uniform_int_distribution<int>(2 * d, 50)(rng);
    if (i == 0) {
      const SubspaceBasis Xs = test::random_basis(D, d, rng);
      out.push_back({Xs, test::basis_sharing(Xs, 1, rng)});
      continue;
    }
    Eigen::VectorXd theta(d);
    for (int j = 0; j < d; ++j) theta(j) = angle(rng);
    if (i == 1) theta(0) = 3e-9;
    if (i == 2) theta(0) = 5e-7;
    auto [Xs, Xt] = pair_at_angles(D, theta, rng);
    out.push_back({std::move(Xs), std::move(Xt)});
  }
  return out;
}

// 2. Closed-form kernel against composite Simpson with 10001 nodes.
Outcome gfk_oracle() {
  double worst = 0.0, smallest_angle = 1.0;
  for (const GfkInstance& inst : gfk_instances()) {
    const GeodesicDecomposition dec = gfk_decompose(inst.Xs, inst.Xt);
    smallest_angle = std::min(smallest_angle, principal_angles(inst.Xs, inst.Xt).minCoeff());
    const Eigen::MatrixXd G = gfk_kernel(dec).G;
    const Eigen::MatrixXd S = gfk_quadrature_oracle(dec, 10001);
    worst = std::max(worst, (G - S).norm() / G.norm());
  }
  return {worst < 1e-6 && smallest_angle < 1e-6,
          fmt("max relative error %.3e, smallest angle %.3e", worst, smallest_angle)};
}

// 3. The flow starts at span(Xs) and ends at span(Xt).
Outcome geodesic_endpoints() {
  double worst = 0.0;
  for (const GfkInstance& inst : gfk_instances()) {
    const GeodesicDecomposition dec = gfk_decompose(inst.Xs, inst.Xt);
    worst = std::max(worst, principal_angles(gfk_flow(dec, 0.0), inst.Xs).maxCoeff());
    worst = std::max(worst, principal_angles(gfk_flow(dec, 1.0), inst.Xt).maxCoeff());
  }
  return {worst < 1e-7, fmt("max endpoint angle %.3e", worst)};
}

// 4. Symmetric, PSD, rank at most 2d.
Outcome kernel_validity() {
  double asym = 0.0, min_eig = 0.0, tail = 0.0;
  for (const GfkInstance& inst : gfk_instances()) {
    const Eigen::MatrixXd G = gfk_kernel(gfk_decompose(inst.Xs, inst.Xt)).G;
    asym = std::max(asym, (G - G.transpose()).cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = eig.eigenvalues();
    min_eig = std::min(min_eig, ev.minCoeff());
    std::sort(ev.data(), ev.data() + ev.size(),
              [](double a, double b) { return std::abs(a) > std::abs(b); });
    const Eigen::Index keep = 2 * inst.Xs.subspace_dim();
    if (ev.size() > keep) tail = std::max(tail, ev.tail(ev.size() - keep).cwiseAbs().maxCoeff());
  }
  return {asym <= 1e-10 && min_eig >= -1e-9 && tail < 1e-9,
          fmt("asymmetry %.3e, min eigenvalue %.3e, tail beyond 2d %.3e", asym, min_eig, tail)};
}

// 5. 1-NN against an exhaustive search.
Outcome knn_oracle() {
  Rng rng(505);
  int mismatched = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(1, 200)(rng);
    const Eigen::Index D = std::uniform_int_distribution<Eigen::Index>(1, 20)(rng);
    const Eigen::MatrixXd train = test::random_matrix(n, D, rng);
    std::vector<Label> labels(static_cast<std::size_t>(n));
    std::uniform_int_distribution<int> pick(0, 6);
    for (auto& l : labels) l = pick(rng);
    const Eigen::MatrixXd probe = test::random_matrix(40, D, rng);
    const KnnModel m = knn_fit(LabeledSet(FeatureMatrix(train), labels), 1);
    if (knn_predict(m, FeatureMatrix(probe)) != test::brute_force_nn(train, labels, probe)) {
      ++mismatched;
    }
  }
  return {mismatched == 0, fmt("%d of 50 instances differ", mismatched)};
}

// 6. Identity shift and a single-parent hierarchy.
Outcome pipeline_degeneracies() {
  const SynthResult r = synth_generate(SynthConfig{});
  const FeatureMatrix& S = r.source.features;
  const std::vector<HierLabel>& labels = *r.source.labels;
  const LabeledSet train(S, child_labels(labels));
  const std::vector<Label> truth = child_labels(labels);
  double lowest = accuracy(baseline_no_adaptation(train, S), truth);
  for (Method m : {Method::sa, Method::gfk}) {
    lowest = std::min(lowest, accuracy(adapt_flat(train, S, m, 5), truth));
    const HierResult h = hier_adapt(S, labels, S, r.source.hierarchy, HierConfig{m, 5, 0, 1});
    lowest = std::min(lowest, accuracy(child_labels(h.predictions), truth));
  }

  std::vector<std::string> children;
  for (int c = 0; c < r.source.hierarchy.child_count(); ++c) {
    children.push_back(r.source.hierarchy.child_name(c));
  }
  const Hierarchy single({Hierarchy::Node{"all", children}});
  std::vector<HierLabel> single_labels;
  for (const HierLabel& l : labels) single_labels.push_back(single.label_for_child(l.child));
  int differing = 0;
  for (Method m : {Method::sa, Method::gfk}) {
    for (int k : {1, 3}) {
      const HierResult h =
          hier_adapt(S, single_labels, r.target.features, single, HierConfig{m, 5, 0, k});
      if (child_labels(h.predictions) != adapt_flat(train, r.target.features, m, 5, k)) {
        ++differing;
      }
    }
  }
  return {lowest == 1.0 && differing == 0,
          fmt("lowest accuracy with T = S %.2f%%, one-parent runs differing from flat %d/4",
              100 * lowest, differing)};
}

// 7. Default synthetic benchmark, frozen correct counts out of 540 rows.
Outcome benchmark_ordering() {
  const SynthResult r = synth_generate(SynthConfig{});
  const LabeledSet train(r.source.features, child_labels(*r.source.labels));
  const std::vector<Label> truth = child_labels(r.target_truth);
  const auto correct = [&](const std::vector<Label>& pred) {
    return static_cast<int>(std::lround(accuracy(pred, truth) * static_cast<double>(truth.size())));
  };
  const int base = correct(baseline_no_adaptation(train, r.target.features));
  bool pass = base == 333;
  std::string detail = fmt("base %d", base);
  const struct {
    Method method;
    int flat;
    int hier;
  } frozen[] = {{Method::sa, 458, 528}, {Method::gfk, 466, 526}};
  for (const auto& f : frozen) {
    const int flat = correct(adapt_flat(train, r.target.features, f.method, 5));
    const HierResult h = hier_adapt(r.source.features, *r.source.labels, r.target.features,
                                    r.source.hierarchy, HierConfig{f.method, 5, 0, 1});
    const int hier = correct(child_labels(h.predictions));
    pass = pass && base < flat && flat < hier && (hier - flat) * 100 >= 2 * 540 &&
           flat == f.flat && hier == f.hier;
    detail += fmt(", %s flat %d hier %d", to_string(f.method), flat, hier);
  }
  return {pass, detail + " (of 540)"};
}

// 8. Every source subspace is most similar to its own target counterpart.
Outcome similarity_diagonal() {
  const SynthResult r = synth_generate(SynthConfig{});
  const SimilarityReport s =
      similarity_matrix(r.source.features, *r.source.labels, r.target.features, r.target_truth,
                        r.source.hierarchy, 5);
  int off = 0;
  for (Eigen::Index i = 0; i < s.matrix.rows(); ++i) {
    Eigen::Index arg = 0;
    s.matrix.row(i).maxCoeff(&arg);
    if (arg != i) ++off;
  }
  return {off == 0, fmt("%d of %d rows peak off the diagonal", off,
                        static_cast<int>(s.matrix.rows()))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// 9. Every command, run twice with the same arguments, writes the same bytes.
Outcome determinism(const fs::path& root) {
  const auto run_all = [&](const fs::path& dir) {
    std::ostringstream out, err;
    const auto run = [&](std::vector<std::string> args) {
      if (cli::run(args, out, err) != 0) throw std::runtime_error(err.str());
    };
    const std::string data = (dir / "data").string();
    run({"synth", "--seed", "11", "--output", data});
    const std::vector<std::string> io{"--source", data + "/source.hda", "--target",
                                      data + "/target.hda", "--truth",
                                      data + "/target.truth.hda"};
    for (const char* method : {"sa", "gfk"}) {
      for (const char* format : {"text", "json"}) {
        std::vector<std::string> a{"--report-format", format, "adapt", "--method", method,
                                   "--dim", "5"};
        a.insert(a.end(), io.begin(), io.end());
        const std::string stem = (dir / (std::string(method) + "_" + format)).string();
        a.insert(a.end(), {"--output", stem + ".hda", "--report", stem + ".report"});
        run(a);
      }
    }
    std::vector<std::string> sim{"similarity", "--auto-dim", "--d-max", "6", "--output",
                                 (dir / "similarity.txt").string()};
    sim.insert(sim.end(), io.begin(), io.end());
    run(sim);
    run({"select-dim", "--source", data + "/source.hda", "--target", data + "/target.hda",
         "--d-max", "6"});
    std::ofstream(dir / "stdout.txt", std::ios::binary) << out.str();
  };
  // Same paths both times, so a snapshot is taken after each pass.
  const fs::path dir = root / "run";
  const auto pass = [&] {
    fs::remove_all(dir);
    run_all(dir);
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).string()] = slurp(entry);
    }
    return files;
  };
  const auto first = pass();
  const auto second = pass();
  int differing = 0;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) ++differing;
  }
  return {first.size() >= 12 && first.size() == second.size() && differing == 0,
          fmt("%d of %zu files differ between repeated runs", differing, first.size())};
}

// 10. save -> load -> save is byte-stable.
Outcome format_round_trip(const fs::path& root) {
  Rng rng(1010);
  int differing = 0;
  for (int i = 0; i < 100; ++i) {
    const DatasetBundle b = test::random_bundle(rng, i % 2 == 0);
    const fs::path first = root / "first.hda", second = root / "second.hda";
    save_dataset(b, first);
    save_dataset(load_dataset(first), second);
    if (slurp(first) != slurp(second)) ++differing;
  }
  return {differing == 0, fmt("%d of 100 bundles changed", differing)};
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds, 0 for none
  std::function<Outcome()> check;
};

int run_suite() {
  const fs::path root = fs::temp_directory_path() / "hsda_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::vector<Criterion> criteria{
      {1, "SA closed form is optimal", 5, sa_optimality},
      {2, "GFK closed form matches Simpson quadrature", 30, gfk_oracle},
      {3, "geodesic endpoints", 0, geodesic_endpoints},
      {4, "kernel validity", 0, kernel_validity},
      {5, "1-NN matches brute force", 0, knn_oracle},
      {6, "pipeline degeneracies", 0, pipeline_degeneracies},
      {7, "synthetic benchmark ordering", 60, benchmark_ordering},
      {8, "similarity peaks on the diagonal", 0, similarity_diagonal},
      {9, "determinism", 0, [&] { return determinism(root); }},
      {10, "format round trip", 0, [&] { return format_round_trip(root); }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0 && secs >= c.time_limit) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s limit", c.time_limit);
    }
    if (!o.pass) ++failed;
    std::printf("%s  criterion %2d  %-44s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
  }
  fs::remove_all(root);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace hsda

int main() { return hsda::run_suite(); }
