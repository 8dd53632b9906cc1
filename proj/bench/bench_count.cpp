#include <benchmark/benchmark.h>

#include "tmotif/generator.hpp"
#include "tmotif/motif.hpp"

using namespace tmotif;

namespace {

DynamicGraph graph_for(std::size_t n, Timestamp t) {
  GenParams p;
  p.n = n;
  p.p = 0.3;
  p.t_span = t;
  p.window = t;
  p.del_prob = 0.2;
  p.seed = 42;
  return gen_dynamic_graph(p);
}

void BM_CountSerial(benchmark::State& state) {
  auto g = graph_for(static_cast<std::size_t>(state.range(0)), 30);
  auto m = catalog_motif("4-cycle", 10);
  for (auto _ : state) benchmark::DoNotOptimize(count_serial(g, m));
  state.counters["events"] = static_cast<double>(g.size());
}

void BM_CountParallel(benchmark::State& state) {
  auto g = graph_for(static_cast<std::size_t>(state.range(0)), 30);
  auto m = catalog_motif("4-cycle", 10);
  for (auto _ : state) benchmark::DoNotOptimize(count(g, m));
  state.counters["events"] = static_cast<double>(g.size());
}

SweepGrid grid() {
  SweepGrid g;
  g.n = {10, 20, 30};
  g.t = {10, 20};
  g.w = {3, 6, 9};
  g.seeds = 8;
  g.base_seed = 1;
  return g;
}

void BM_SweepSerial(benchmark::State& state) {
  auto g = grid();
  for (auto _ : state) benchmark::DoNotOptimize(parameter_sweep("triangle", g, false));
}

void BM_SweepParallel(benchmark::State& state) {
  auto g = grid();
  for (auto _ : state) benchmark::DoNotOptimize(parameter_sweep("triangle", g, true));
}

}  // namespace

BENCHMARK(BM_CountSerial)->Arg(20)->Arg(40)->Arg(60)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CountParallel)->Arg(20)->Arg(40)->Arg(60)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
