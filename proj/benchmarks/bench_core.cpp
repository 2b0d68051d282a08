#include <random>

#include <benchmark/benchmark.h>

#include <hsda/alignment.hpp>
#include <hsda/classify.hpp>
#include <hsda/pipeline.hpp>
#include <hsda/synth.hpp>

namespace {

using namespace hsda;

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  return Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return normal(rng); });
}

void BM_Pca(benchmark::State& state) {
  const FeatureMatrix X(gaussian(state.range(0), state.range(1), 1));
  for (auto _ : state) benchmark::DoNotOptimize(pca_subspace(X, 10));
}
BENCHMARK(BM_Pca)->Args({500, 40})->Args({2000, 40})->Args({2000, 256});

void BM_GfkKernel(benchmark::State& state) {
  const Eigen::Index D = state.range(0), d = state.range(1);
  const SubspaceBasis Xs = pca_subspace(FeatureMatrix(gaussian(4 * D, D, 2)), static_cast<int>(d));
  const SubspaceBasis Xt = pca_subspace(FeatureMatrix(gaussian(4 * D, D, 3)), static_cast<int>(d));
  for (auto _ : state) benchmark::DoNotOptimize(gfk_kernel(gfk_decompose(Xs, Xt)).G.data());
}
BENCHMARK(BM_GfkKernel)->Args({40, 5})->Args({128, 20})->Args({256, 40});

void BM_KnnPredict(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  std::vector<Label> labels(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<Label>(i % 9);
  const KnnModel m = knn_fit(LabeledSet(FeatureMatrix(gaussian(n, 10, 4)), labels), 1);
  const FeatureMatrix probe(gaussian(n, 10, 5));
  for (auto _ : state) benchmark::DoNotOptimize(knn_predict(m, probe));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_KnnPredict)->Arg(540)->Arg(2000);

void BM_HierAdapt(benchmark::State& state) {
  const SynthResult r = synth_generate(SynthConfig{});
  const HierConfig cfg{state.range(0) == 0 ? Method::sa : Method::gfk, 5, 0, 1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hier_adapt(r.source.features, *r.source.labels, r.target.features,
                                        r.source.hierarchy, cfg));
  }
  state.SetLabel(to_string(cfg.method));
}
BENCHMARK(BM_HierAdapt)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
