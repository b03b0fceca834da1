#include <benchmark/benchmark.h>

#include <vector>

#include "cefl/clustering.hpp"
#include "cefl/cost.hpp"
#include "cefl/experiment.hpp"
#include "cefl/model.hpp"
#include "cefl/random.hpp"
#include "cefl/similarity.hpp"

namespace {

using namespace cefl;

Batch random_batch(std::size_t n, std::size_t dim, std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  Batch b(dim);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x) v = rng.uniform();
    b.add(x, static_cast<int>(rng.below(classes)));
  }
  return b;
}

void BM_LossAndGrads(benchmark::State& state) {
  const ModelParams m = init_model(default_layers(), 1);
  const Batch batch = random_batch(static_cast<std::size_t>(state.range(0)), 1200, 8, 2);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grads(m, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGrads)->Arg(1)->Arg(32);

void BM_AdamStep(benchmark::State& state) {
  ModelParams m = init_model(default_layers(), 1);
  const auto g = loss_and_grads(m, random_batch(32, 1200, 8, 2));
  AdamState adam = AdamState::for_model(m);
  const TrainConfig cfg;
  for (auto _ : state) adam_step(m, g.grads, adam, cfg);
}
BENCHMARK(BM_AdamStep);

void BM_BuildGraph(benchmark::State& state) {
  std::vector<ModelParams> models;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    models.push_back(init_model(default_layers(), static_cast<std::uint64_t>(i)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(build_graph(models));
}
BENCHMARK(BM_BuildGraph)->Arg(12);

void BM_ClusterClients(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = rng.uniform(1.0, 10.0);
  }
  const SimilarityGraph g = SimilarityGraph::from_distances(n, d);
  for (auto _ : state) benchmark::DoNotOptimize(cluster_clients(g, 3, 7));
}
BENCHMARK(BM_ClusterClients)->Arg(12)->Arg(67)->Arg(200);

void BM_ClosedForm(benchmark::State& state) {
  const SizeModel s({40000, 35000, 24500, 500});
  for (auto _ : state) benchmark::DoNotOptimize(closed_form_delta(67, 2, 100, 3, s.delta()));
}
BENCHMARK(BM_ClosedForm);

}  // namespace
BENCHMARK_MAIN();
