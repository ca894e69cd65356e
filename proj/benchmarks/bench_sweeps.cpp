#include <benchmark/benchmark.h>

#include "stencilwave/perf.hpp"
#include "stencilwave/sweeps.hpp"

namespace sw = stencilwave;

namespace {

void run_plan(benchmark::State& state, const sw::SweepPlan& plan, sw::Index n) {
  const auto input = sw::create_grid(n, n, n, sw::pattern::SeededRandom{3});
  for (auto _ : state) {
    auto out = sw::run_sweeps(plan, input);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(input.interior_cells()) *
                          plan.iterations);
}

void BM_SerialJacobi(benchmark::State& state) {
  sw::SweepPlan plan;
  plan.iterations = 4;
  run_plan(state, plan, state.range(0));
}
BENCHMARK(BM_SerialJacobi)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_WavefrontJacobi(benchmark::State& state) {
  sw::SweepPlan plan;
  plan.variant = sw::Variant::wavefront;
  plan.iterations = 4;
  plan.wavefront.threads_per_group = static_cast<int>(state.range(1));
  plan.wavefront.blocks = 2;
  run_plan(state, plan, state.range(0));
}
BENCHMARK(BM_WavefrontJacobi)
    ->Args({64, 1})->Args({64, 2})->Args({128, 1})->Args({128, 2})
    ->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_WavefrontGaussSeidel(benchmark::State& state) {
  sw::SweepPlan plan;
  plan.kernel = sw::KernelKind::gs_naive;
  plan.variant = sw::Variant::wavefront;
  plan.iterations = 4;
  plan.wavefront.threads_per_group = static_cast<int>(state.range(1));
  plan.wavefront.blocks = 2;
  run_plan(state, plan, state.range(0));
}
BENCHMARK(BM_WavefrontGaussSeidel)
    ->Args({64, 1})->Args({64, 2})->Args({128, 2})
    ->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_StreamTriad(benchmark::State& state) {
  sw::StreamOptions opts;
  opts.elements = static_cast<std::size_t>(state.range(0));
  opts.repetitions = 1;
  double bandwidth = 0.0;
  for (auto _ : state) bandwidth = sw::stream_triad(opts).bandwidth;
  state.counters["GB/s"] = bandwidth / 1e9;
}
BENCHMARK(BM_StreamTriad)->Arg(1 << 16)->Arg(1 << 22)->Unit(benchmark::kMillisecond);

}  // namespace
