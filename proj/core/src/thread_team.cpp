#include "stencilwave/thread_team.hpp"

#include <mutex>
#include <thread>

#include "stencilwave/error.hpp"
#include "stencilwave/topology.hpp"

namespace stencilwave {

TeamReport run_team(std::size_t size, const std::vector<int>& pinning,
                    const std::function<void(std::size_t)>& body) {
  if (size == 0) fail(ErrorCode::config, "thread team must not be empty");
  const bool want_pinning = !pinning.empty();
  if (want_pinning && pinning.size() < size)
    fail(ErrorCode::config, "pinning list has " + std::to_string(pinning.size()) +
                                " entries for a team of " + std::to_string(size));

  TeamReport report;
  report.pinned = want_pinning;
  std::mutex report_mutex;
  {
    std::vector<std::jthread> members;
    members.reserve(size);
    for (std::size_t rank = 0; rank < size; ++rank) {
      members.emplace_back([&, rank] {
        if (want_pinning) {
          try {
            pin_current_thread(pinning[rank]);
          } catch (const Error& e) {
            std::lock_guard lock(report_mutex);
            report.pinned = false;
            report.warnings.push_back("rank " + std::to_string(rank) +
                                      " unpinned: " + e.what());
          }
        }
        body(rank);
      });
    }
  }
  return report;
}

}  // namespace stencilwave
