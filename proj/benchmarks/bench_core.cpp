#include <benchmark/benchmark.h>

#include <random>

#include "mcppi/codebook.hpp"
#include "mcppi/protein_graph.hpp"
#include "mcppi/splits.hpp"
#include "mcppi/synth.hpp"
#include "mcppi/trainer.hpp"

namespace {

using namespace mcppi;

void BM_BuildHeteroGraph(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Protein p = gen_protein("b", {n, n}, 1);
  const GraphParams params = RunConfig::desk().graph_params();
  for (auto _ : state) benchmark::DoNotOptimize(build_hetero_graph(p, params));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildHeteroGraph)->RangeMultiplier(2)->Range(64, 512)->Complexity();

void BM_Quantize(benchmark::State& state) {
  std::mt19937_64 rng(1);
  Codebook cb("cb", static_cast<std::size_t>(state.range(1)), 32, rng);
  const Tensor h = Tensor::uniform({static_cast<std::size_t>(state.range(0)), 32}, -1.0, 1.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(quantize(h, cb));
}
BENCHMARK(BM_Quantize)->Args({200, 64})->Args({1000, 512});

void BM_EncodeProtein(benchmark::State& state) {
  const RunConfig cfg = RunConfig::desk();
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto prep = prepare_proteins({gen_protein("b", {n, n}, 2)}, cfg.graph_params());
  ProteinModel model(cfg, 1);
  for (auto _ : state) benchmark::DoNotOptimize(model.encode(prep.front(), Mode::kEval));
}
BENCHMARK(BM_EncodeProtein)->Arg(60)->Arg(240);

void BM_PretrainStep(benchmark::State& state) {
  const RunConfig cfg = RunConfig::desk();
  const auto data = gen_planted_microenv_dataset(8, 1, 3);
  const auto prep = prepare_proteins(data.proteins, cfg.graph_params());
  ProteinModel model(cfg, 1);
  std::mt19937_64 rng(4);
  for (auto _ : state) {
    auto loss = pretrain_objective(model, prep.front(), cfg, Mode::kTrain, rng);
    loss.total.backward();
  }
}
BENCHMARK(BM_PretrainStep);

void BM_Partition(benchmark::State& state) {
  const auto data = gen_planted_microenv_dataset(8, 100, 5);
  const PpiGraph g = gen_ppi_graph(data, 400, 5).graph;
  const auto scheme = static_cast<SplitScheme>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(partition(g, scheme, {}, seed++));
}
BENCHMARK(BM_Partition)->Arg(static_cast<int>(SplitScheme::kRandom))->Arg(static_cast<int>(SplitScheme::kBfs))
    ->Arg(static_cast<int>(SplitScheme::kDfs));

}  // namespace

BENCHMARK_MAIN();
