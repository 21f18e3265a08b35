#include <benchmark/benchmark.h>

#include "rwtrace/oracle_suite.hpp"
#include "rwtrace/presets.hpp"
#include "rwtrace/regeneration.hpp"
#include "rwtrace/resistance_oracle.hpp"
#include "rwtrace/rng.hpp"
#include "rwtrace/walk_engine.hpp"

namespace {

using namespace rwtrace;

void BM_PhiloxDraw(benchmark::State& state) {
  CounterRng rng(42);
  for (auto _ : state) benchmark::DoNotOptimize(rng.uniform());
}
BENCHMARK(BM_PhiloxDraw);

void BM_Level0Steps(benchmark::State& state) {
  const BiasDistribution p0 = presets::figure2_p0();
  for (auto _ : state) {
    CounterRng rng(7);
    benchmark::DoNotOptimize(simulate_level0(p0, static_cast<std::size_t>(state.range(0)), rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Level0Steps)->Arg(1 << 16)->Arg(1 << 20);

void BM_TraceInsert(benchmark::State& state) {
  const BiasDistribution p0 = presets::figure2_p0();
  CounterRng rng(11);
  const WalkPath path = simulate_level0(p0, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(TraceGraph::from_path(path));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TraceInsert)->Arg(1 << 16)->Arg(1 << 20);

void BM_NestedTwoLevels(benchmark::State& state) {
  SimulationConfig cfg;
  cfg.biases = {presets::figure2_p0(), presets::figure2_p1(1.5)};
  cfg.step_targets = {0, static_cast<std::uint64_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(nested_simulate(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NestedTwoLevels)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

void BM_CutPoints(benchmark::State& state) {
  CounterRng rng(3);
  const WalkPath path = simulate_level0(presets::figure2_p0(), static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(cut_points(path));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CutPoints)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

void BM_EffectiveResistance(benchmark::State& state) {
  const TraceGraph g = random_trace_fixture(presets::figure2_p0(), static_cast<std::size_t>(state.range(0)), 5);
  const FiniteNetwork net = FiniteNetwork::from_trace(g, ConductanceParams(presets::figure2_p1(1.5)));
  const std::size_t b[] = {net.vertex_count() - 1};
  for (auto _ : state) benchmark::DoNotOptimize(effective_resistance(net, 0, b));
}
BENCHMARK(BM_EffectiveResistance)->Arg(50)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
