#include <cmath>
#include <string>

#include "stencilwave/error.hpp"
#include "stencilwave/sweeps.hpp"

namespace stencilwave {

std::string_view to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::jacobi: return "jacobi";
    case KernelKind::gs_naive: return "gs-naive";
    case KernelKind::gs_interleaved: return "gs-interleaved";
  }
  return "unknown";
}

std::string_view to_string(Variant variant) noexcept {
  switch (variant) {
    case Variant::serial: return "serial";
    case Variant::threaded: return "threaded";
    case Variant::pipeline: return "pipeline";
    case Variant::wavefront: return "wavefront";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view text) {
  if (text == "jacobi") return KernelKind::jacobi;
  if (text == "gs-naive" || text == "gs") return KernelKind::gs_naive;
  if (text == "gs-interleaved") return KernelKind::gs_interleaved;
  fail(ErrorCode::config, "unknown kernel '" + std::string(text) + "'");
}

Variant parse_variant(std::string_view text) {
  if (text == "serial") return Variant::serial;
  if (text == "threaded") return Variant::threaded;
  if (text == "pipeline") return Variant::pipeline;
  if (text == "wavefront") return Variant::wavefront;
  fail(ErrorCode::config, "unknown variant '" + std::string(text) + "'");
}

void validate_plan(const SweepPlan& plan, const Grid3D& g) {
  if (plan.iterations < 0) fail(ErrorCode::plan, "iteration count must be >= 0");
  if (!std::isfinite(plan.coeffs.a) || !std::isfinite(plan.coeffs.b))
    fail(ErrorCode::config, "stencil coefficients must be finite");

  int team = 1;
  switch (plan.variant) {
    case Variant::serial:
      break;
    case Variant::threaded:
      if (plan.kernel != KernelKind::jacobi)
        fail(ErrorCode::plan, "the threaded variant runs Jacobi only; "
                              "use pipeline for Gauss-Seidel");
      if (plan.threads < 1) fail(ErrorCode::config, "thread count must be >= 1");
      if (plan.threads > g.nk())
        fail(ErrorCode::partition,
             std::to_string(plan.threads) + " threads for only " +
                 std::to_string(g.nk()) + " planes");
      team = plan.threads;
      break;
    case Variant::pipeline:
      if (!is_gauss_seidel(plan.kernel))
        fail(ErrorCode::plan, "the pipeline variant runs Gauss-Seidel only");
      if (plan.threads < 1) fail(ErrorCode::config, "thread count must be >= 1");
      if (plan.threads > g.nj())
        fail(ErrorCode::partition,
             std::to_string(plan.threads) + " threads for only " +
                 std::to_string(g.nj()) + " lines per plane");
      team = plan.threads;
      break;
    case Variant::wavefront: {
      const auto& w = plan.wavefront;
      if (w.num_groups < 1 || w.threads_per_group < 1)
        fail(ErrorCode::config, "wavefront needs N >= 1 groups of t >= 1 threads");
      if (w.blocks < w.num_groups)
        fail(ErrorCode::config, "block count B = " + std::to_string(w.blocks) +
                                    " is below the group count N = " +
                                    std::to_string(w.num_groups));
      if (w.blocks > g.nj())
        fail(ErrorCode::partition, "B = " + std::to_string(w.blocks) +
                                       " blocks for nj = " +
                                       std::to_string(g.nj()));
      if (plan.iterations % w.threads_per_group != 0)
        fail(ErrorCode::plan, "iterations (" + std::to_string(plan.iterations) +
                                  ") must be a multiple of t = " +
                                  std::to_string(w.threads_per_group));
      if (plan.kernel == KernelKind::jacobi) {
        // Interface lines of an inner block feed its successor at two
        // adjacent positions per iteration level.
        const auto blocks = partition_blocks(g.nj(), w.blocks);
        for (std::size_t b = 1; b + 1 < blocks.size(); ++b)
          if (blocks[b].size() < 2)
            fail(ErrorCode::partition,
                 "wavefront Jacobi needs inner blocks of at least 2 lines; "
                 "reduce B or enlarge nj");
      }
      team = w.total_threads();
      break;
    }
  }
  if (!plan.pinning.empty() && static_cast<int>(plan.pinning.size()) < team)
    fail(ErrorCode::config, "pinning list shorter than the team");
}

Grid3D run_sweeps(const SweepPlan& plan, Grid3D g, SweepStats* stats) {
  validate_plan(plan, g);
  switch (plan.variant) {
    case Variant::serial: return run_serial(plan, std::move(g), stats);
    case Variant::threaded: return run_threaded_jacobi(plan, std::move(g), stats);
    case Variant::pipeline: return run_pipeline_gs(plan, std::move(g), stats);
    case Variant::wavefront:
      return plan.kernel == KernelKind::jacobi
                 ? run_wavefront_jacobi(plan, std::move(g), stats)
                 : run_wavefront_gs(plan, std::move(g), stats);
  }
  return g;
}

}  // namespace stencilwave
