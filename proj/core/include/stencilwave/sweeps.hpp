#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stencilwave/barrier.hpp"
#include "stencilwave/grid.hpp"
#include "stencilwave/kernels.hpp"
#include "stencilwave/topology.hpp"

namespace stencilwave {

enum class KernelKind { jacobi, gs_naive, gs_interleaved };
enum class Variant { serial, threaded, pipeline, wavefront };

std::string_view to_string(KernelKind kind) noexcept;
std::string_view to_string(Variant variant) noexcept;
KernelKind parse_kernel_kind(std::string_view text);
Variant parse_variant(std::string_view text);

inline bool is_gauss_seidel(KernelKind kind) noexcept {
  return kind != KernelKind::jacobi;
}

/// Thread-group geometry of the wavefront engines: N groups of t threads,
/// the j-range cut into B blocks. t is also the temporal blocking factor.
struct WavefrontConfig {
  int num_groups = 1;
  int threads_per_group = 1;
  int blocks = 1;
  BarrierKind barrier = BarrierKind::central_spin;

  /// Planes in the per-group temporary ring (Jacobi only).
  int temp_planes() const noexcept { return 2 * threads_per_group; }
  int total_threads() const noexcept { return num_groups * threads_per_group; }
};

struct SweepPlan {
  KernelKind kernel = KernelKind::jacobi;
  Variant variant = Variant::serial;
  int iterations = 1;
  StencilCoeffs coeffs;
  WavefrontConfig wavefront;
  /// Team size P of the threaded and pipeline variants. Their barrier kind
  /// comes from wavefront.barrier as well.
  int threads = 1;
  /// Non-temporal stores for Jacobi writes to the main grid.
  bool nt_stores = false;
  /// Tag every stored line with its iteration level and check each read.
  bool instrument = false;
  /// Hardware thread per team rank; empty runs unpinned.
  std::vector<int> pinning;
};

struct SweepStats {
  std::uint64_t line_updates = 0;
  /// Barrier phases completed by each team member.
  std::uint64_t barrier_phases = 0;
  /// Reads that observed a line at the wrong iteration level (instrumented
  /// runs only).
  std::uint64_t violations = 0;
  int team_size = 1;
  bool pinned = false;
  std::vector<std::string> warnings;
};

/// Half-open index range.
struct Range {
  Index begin = 0;
  Index end = 0;
  Index size() const noexcept { return end - begin; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// `count` contiguous, disjoint ranges covering [0, extent); sizes differ by
/// at most one, larger ranges first.
std::vector<Range> partition_blocks(Index extent, int count);

/// Estimated bytes a thread group keeps live: t + 2 source planes plus 2t
/// ring planes, each (ni + 2) x (block_nj + 2) doubles.
std::uint64_t wavefront_working_set_bytes(int threads_per_group, Index ni,
                                          Index block_nj);

/// Share of the outermost cache a group's working set may occupy.
inline constexpr double kCacheBudgetFraction = 0.5;

/// Smallest block count whose largest block fits the cache budget, clamped
/// to [num_groups, nj]. Falls back to num_groups (with a warning) when the
/// cache size is unknown.
int choose_block_size(const Topology& topo, int threads_per_group, Index ni,
                      Index nj, int num_groups,
                      std::vector<std::string>* warnings = nullptr);

/// Stages of one pipeline-parallel Gauss-Seidel sweep: nk + P - 1.
Index pipeline_stage_count(Index nk, int threads) noexcept;

/// Throws plan/partition/config errors for plans the engines reject.
void validate_plan(const SweepPlan& plan, const Grid3D& g);

/// Reference order: k, j ascending, one sweep after another. Jacobi swaps
/// between two grids; the variant field is ignored.
Grid3D run_serial(const SweepPlan& plan, Grid3D g, SweepStats* stats = nullptr);

/// P threads on contiguous k-slabs, one barrier per sweep.
Grid3D run_threaded_jacobi(const SweepPlan& plan, Grid3D g,
                           SweepStats* stats = nullptr);

/// P threads on contiguous j-blocks; thread p works on plane s - p at stage
/// s, which preserves the lexicographic update order.
Grid3D run_pipeline_gs(const SweepPlan& plan, Grid3D g,
                       SweepStats* stats = nullptr);

/// Wavefront temporal blocking, t sweeps per pass over the grid, no second
/// grid. Requires iterations to be a multiple of t.
Grid3D run_wavefront_jacobi(const SweepPlan& plan, Grid3D g,
                            SweepStats* stats = nullptr);

/// In-place wavefront Gauss-Seidel with groups pipelined along j.
Grid3D run_wavefront_gs(const SweepPlan& plan, Grid3D g,
                        SweepStats* stats = nullptr);

/// Dispatches on plan.variant after validate_plan.
Grid3D run_sweeps(const SweepPlan& plan, Grid3D g, SweepStats* stats = nullptr);

}  // namespace stencilwave
