#include <array>

#include "sweep_detail.hpp"

namespace stencilwave {

Grid3D run_threaded_jacobi(const SweepPlan& plan, Grid3D g, SweepStats* stats) {
  detail::validate_as(plan, g, Variant::threaded);
  const int P = plan.threads;
  if (plan.iterations == 0) {
    detail::reset_stats(stats, P);
    return g;
  }

  const Index ni = g.ni(), nj = g.nj();
  const auto slabs = partition_blocks(g.nk(), P);
  Grid3D other = g;
  std::array<Grid3D*, 2> grids{&g, &other};

  const auto lines = static_cast<std::size_t>(g.nk() * nj);
  std::array<detail::LineTags, 2> tags;
  if (plan.instrument) {
    tags[0] = detail::LineTags(lines, 0);
    tags[1] = detail::LineTags(lines, -1);
  }

  Barrier barrier(static_cast<std::size_t>(P), plan.wavefront.barrier);
  detail::TeamCounters counters;

  auto report = run_team(static_cast<std::size_t>(P), plan.pinning,
                         [&](std::size_t rank) {
    const Range slab = slabs[rank];
    std::uint64_t updates = 0;
    std::uint64_t phases = 0;
    for (int it = 0; it < plan.iterations; ++it) {
      const int s = it & 1;
      const Grid3D& src = *grids[s];
      Grid3D& dst = *grids[s ^ 1];
      for (Index k = slab.begin; k < slab.end; ++k) {
        for (Index j = 0; j < nj; ++j) {
          if (plan.instrument) {
            const std::array<std::ptrdiff_t, 5> reads{
                detail::line_tag_index(src, k, j),
                detail::line_tag_index(src, k, j - 1),
                detail::line_tag_index(src, k, j + 1),
                detail::line_tag_index(src, k - 1, j),
                detail::line_tag_index(src, k + 1, j)};
            for (auto r : reads)
              if (r >= 0)
                tags[s].check(static_cast<std::size_t>(r), it, counters.violations);
          }
          detail::jacobi_update(plan.nt_stores, src.line(k, j),
                                src.line(k, j - 1), src.line(k, j + 1),
                                src.line(k - 1, j), src.line(k + 1, j),
                                dst.line(k, j), ni, plan.coeffs);
          if (plan.instrument)
            tags[s ^ 1].set(static_cast<std::size_t>(detail::line_tag_index(dst, k, j)),
                            it + 1);
          ++updates;
          detail::shake(plan.instrument);
        }
      }
      if (plan.nt_stores) stream_fence();
      barrier.wait(rank);
      ++phases;
    }
    counters.line_updates.fetch_add(updates, std::memory_order_relaxed);
    if (rank == 0) counters.barrier_phases = phases;
  });

  detail::fill_stats(stats, counters, P, std::move(report));
  if (plan.iterations % 2 == 1) return other;
  return g;
}

}  // namespace stencilwave
