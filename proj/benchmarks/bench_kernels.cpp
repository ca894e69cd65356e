#include <benchmark/benchmark.h>

#include "stencilwave/grid.hpp"
#include "stencilwave/kernels.hpp"

namespace sw = stencilwave;

namespace {

void BM_JacobiLine(benchmark::State& state) {
  const sw::Index ni = state.range(0);
  const auto src = sw::create_grid(ni, 4, 4, sw::pattern::SeededRandom{1});
  sw::Grid3D dst(ni, 4, 4);
  for (auto _ : state) {
    sw::jacobi_line_update(src, dst, {}, 1, 1);
    benchmark::DoNotOptimize(dst.line(1, 1));
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * ni);
}
BENCHMARK(BM_JacobiLine)->RangeMultiplier(4)->Range(16, 1024);

void BM_GaussSeidelLine(benchmark::State& state) {
  const sw::Index ni = state.range(0);
  auto g = sw::create_grid(ni, 4, 4, sw::pattern::SeededRandom{1});
  for (auto _ : state) {
    sw::gs_line_update(g, 1.0 / 6.0, 1, 1);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * ni);
}
BENCHMARK(BM_GaussSeidelLine)->RangeMultiplier(4)->Range(16, 1024);

void BM_GaussSeidelLineInterleaved(benchmark::State& state) {
  const sw::Index ni = state.range(0);
  auto g = sw::create_grid(ni, 4, 4, sw::pattern::SeededRandom{1});
  for (auto _ : state) {
    sw::gs_line_update_interleaved(g, 1.0 / 6.0, 1, 1);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * ni);
}
BENCHMARK(BM_GaussSeidelLineInterleaved)->RangeMultiplier(4)->Range(16, 1024);

}  // namespace
