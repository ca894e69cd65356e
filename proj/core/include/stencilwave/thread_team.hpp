#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace stencilwave {

struct TeamReport {
  /// True when every member was pinned as requested.
  bool pinned = false;
  std::vector<std::string> warnings;
};

/// Spawns `size` threads, pins member r to pinning[r] when a pinning list is
/// given, runs body(r) on each and joins. Pinning failures are reported, not
/// thrown: the member keeps running unpinned. `body` must not throw once
/// other members may be waiting on it.
TeamReport run_team(std::size_t size, const std::vector<int>& pinning,
                    const std::function<void(std::size_t)>& body);

}  // namespace stencilwave
