#include <algorithm>
#include <cmath>
#include <string>

#include "stencilwave/error.hpp"
#include "stencilwave/sweeps.hpp"
#include "sweep_detail.hpp"

namespace stencilwave {

std::vector<Range> partition_blocks(Index extent, int count) {
  if (count < 1 || count > extent)
    fail(ErrorCode::partition, "cannot cut extent " + std::to_string(extent) +
                                   " into " + std::to_string(count) + " blocks");
  const Index base = extent / count;
  const Index larger = extent % count;
  std::vector<Range> ranges;
  ranges.reserve(static_cast<std::size_t>(count));
  Index begin = 0;
  for (int b = 0; b < count; ++b) {
    const Index size = base + (b < larger ? 1 : 0);
    ranges.push_back(Range{begin, begin + size});
    begin += size;
  }
  return ranges;
}

std::uint64_t wavefront_working_set_bytes(int threads_per_group, Index ni,
                                          Index block_nj) {
  const auto t = static_cast<std::uint64_t>(threads_per_group);
  const auto planes = (t + 2) + 2 * t;
  return planes * static_cast<std::uint64_t>(ni + 2) *
         static_cast<std::uint64_t>(block_nj + 2) * sizeof(double);
}

int choose_block_size(const Topology& topo, int threads_per_group, Index ni,
                      Index nj, int num_groups,
                      std::vector<std::string>* warnings) {
  const int lo = static_cast<int>(std::min<Index>(num_groups, nj));
  const auto cache = topo.outer_cache_bytes();
  if (!cache) {
    if (warnings)
      warnings->push_back("outermost cache size unknown; using B = N = " +
                          std::to_string(lo));
    return lo;
  }
  const double budget = kCacheBudgetFraction * static_cast<double>(*cache);
  for (Index b = lo; b <= nj; ++b) {
    const Index largest = (nj + b - 1) / b;
    if (static_cast<double>(wavefront_working_set_bytes(threads_per_group, ni,
                                                        largest)) <= budget)
      return static_cast<int>(b);
  }
  if (warnings)
    warnings->push_back("even single-line blocks exceed the cache budget");
  return static_cast<int>(nj);
}

Index pipeline_stage_count(Index nk, int threads) noexcept {
  return nk + threads - 1;
}

namespace detail {

std::string cache_fit_warning(const WavefrontConfig& w, const Grid3D& g) {
  static const std::optional<std::uint64_t> cache = detect_topology().outer_cache_bytes();
  if (!cache) return {};
  const Index largest = (g.nj() + w.blocks - 1) / w.blocks;
  const auto bytes = wavefront_working_set_bytes(w.threads_per_group, g.ni(), largest);
  if (static_cast<double>(bytes) <= kCacheBudgetFraction * static_cast<double>(*cache))
    return {};
  return "group working set of " + std::to_string(bytes) +
         " B exceeds half of the " + std::to_string(*cache) +
         " B outermost cache; raise B";
}

}  // namespace detail

}  // namespace stencilwave
