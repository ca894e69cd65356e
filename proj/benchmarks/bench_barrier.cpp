#include <benchmark/benchmark.h>

#include "stencilwave/barrier.hpp"
#include "stencilwave/thread_team.hpp"

namespace sw = stencilwave;

namespace {

// Time per barrier phase for a team of range(0) threads.
template <sw::BarrierKind Kind>
void BM_BarrierPhase(benchmark::State& state) {
  const auto team = static_cast<std::size_t>(state.range(0));
  constexpr int kPhases = 2000;
  for (auto _ : state) {
    sw::Barrier barrier(team, Kind);
    sw::run_team(team, {}, [&](std::size_t r) {
      for (int p = 0; p < kPhases; ++p) barrier.wait(r);
    });
  }
  state.SetItemsProcessed(state.iterations() * kPhases);
}
BENCHMARK(BM_BarrierPhase<sw::BarrierKind::central_spin>)
    ->Arg(1)->Arg(2)->Arg(4)->UseRealTime();
BENCHMARK(BM_BarrierPhase<sw::BarrierKind::tree>)
    ->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

}  // namespace
