#include <array>

#include "sweep_detail.hpp"

namespace stencilwave {

Grid3D run_pipeline_gs(const SweepPlan& plan, Grid3D g, SweepStats* stats) {
  detail::validate_as(plan, g, Variant::pipeline);
  const int P = plan.threads;
  if (plan.iterations == 0) {
    detail::reset_stats(stats, P);
    return g;
  }

  const Index ni = g.ni(), nk = g.nk();
  const auto blocks = partition_blocks(g.nj(), P);
  const Index stages = pipeline_stage_count(nk, P);

  detail::LineTags tags;
  if (plan.instrument)
    tags = detail::LineTags(static_cast<std::size_t>(nk * g.nj()), 0);

  Barrier barrier(static_cast<std::size_t>(P), plan.wavefront.barrier);
  detail::TeamCounters counters;

  auto report = run_team(static_cast<std::size_t>(P), plan.pinning,
                         [&](std::size_t rank) {
    const Range block = blocks[rank];
    const auto p = static_cast<Index>(rank);
    std::uint64_t updates = 0;
    std::uint64_t phases = 0;
    for (int it = 0; it < plan.iterations; ++it) {
      for (Index s = 0; s < stages; ++s) {
        const Index k = s - p;
        if (k >= 0 && k < nk) {
          for (Index j = block.begin; j < block.end; ++j) {
            if (plan.instrument) {
              const std::array<std::pair<std::ptrdiff_t, int>, 5> reads{{
                  {detail::line_tag_index(g, k, j), it},
                  {detail::line_tag_index(g, k, j - 1), it + 1},
                  {detail::line_tag_index(g, k, j + 1), it},
                  {detail::line_tag_index(g, k - 1, j), it + 1},
                  {detail::line_tag_index(g, k + 1, j), it}}};
              for (auto [idx, level] : reads)
                if (idx >= 0)
                  tags.check(static_cast<std::size_t>(idx), level, counters.violations);
            }
            detail::gs_update(plan.kernel, g.line(k, j), g.line(k, j - 1),
                              g.line(k, j + 1), g.line(k - 1, j),
                              g.line(k + 1, j), ni, plan.coeffs.b);
            if (plan.instrument)
              tags.set(static_cast<std::size_t>(detail::line_tag_index(g, k, j)),
                       it + 1);
            ++updates;
            detail::shake(plan.instrument);
          }
        }
        barrier.wait(rank);
        ++phases;
      }
    }
    counters.line_updates.fetch_add(updates, std::memory_order_relaxed);
    if (rank == 0) counters.barrier_phases = phases;
  });

  detail::fill_stats(stats, counters, P, std::move(report));
  return g;
}

}  // namespace stencilwave
