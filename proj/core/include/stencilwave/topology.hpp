#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stencilwave {

enum class TopologySource { os_introspection, manual_file, fallback };

std::string_view to_string(TopologySource source) noexcept;

/// Hardware threads sharing one data/unified cache instance.
struct CacheGroup {
  int level = 0;
  /// Unknown when the platform does not report it.
  std::optional<std::uint64_t> size_bytes;
  std::vector<int> hw_threads;  // ascending
};

struct HwThread {
  int id = 0;
  int core = 0;   // index into Topology::smt_siblings
  int group = 0;  // index into Topology::outer_groups()
};

struct Topology {
  std::vector<HwThread> threads;              // ascending by id
  std::vector<std::vector<int>> smt_siblings; // one entry per physical core
  std::vector<CacheGroup> cache_groups;       // every level, ascending level
  TopologySource source = TopologySource::fallback;
  std::vector<std::string> warnings;

  int physical_cores() const noexcept {
    return static_cast<int>(smt_siblings.size());
  }
  int outermost_level() const noexcept;
  /// Groups of the outermost cache level; each hardware thread is in one.
  std::vector<CacheGroup> outer_groups() const;
  /// Size of the outermost cache shared by one group, if known.
  std::optional<std::uint64_t> outer_cache_bytes() const;
  bool contains(int hw_thread) const noexcept;
  const HwThread* find(int hw_thread) const noexcept;
};

struct DetectOptions {
  std::filesystem::path sysfs_root = "/sys/devices/system/cpu";
  /// Overrides OS introspection when set.
  std::optional<std::filesystem::path> manual_file;
  /// Consult STENCILWAVE_TOPOLOGY_FILE when manual_file is unset.
  bool use_environment = true;
};

inline constexpr const char* kTopologyFileEnv = "STENCILWAVE_TOPOLOGY_FILE";

/// Manual file when forced, else OS introspection, else a single group of
/// all hardware threads with unknown cache size. Never throws; degraded
/// sources are recorded in `source` and `warnings`.
Topology detect_topology(const DetectOptions& options = {});

/// Linux sysfs cpu/cache hierarchy under `root`. Throws an io error when the
/// hierarchy is missing.
Topology read_sysfs_topology(const std::filesystem::path& root);

/// Text format, whitespace separated, '#' starts a comment:
///   <hw-thread-id> <core-id> <cache-group-id> <cache-bytes> [cache-level]
/// One line per hardware thread; cache-level defaults to 3.
Topology parse_topology_file(std::istream& in);
Topology load_topology_file(const std::filesystem::path& path);

Topology fallback_topology(unsigned hw_threads);

/// Parses a Linux cpulist such as "0-3,8,10-11".
std::vector<int> parse_cpu_list(std::string_view text);

/// Restricts the calling thread to exactly {hw_thread}. Throws a pinning
/// error when the OS refuses.
void pin_current_thread(int hw_thread);

/// The calling thread's affinity mask, ascending.
std::vector<int> current_affinity();

enum class SmtMode { off, on };

/// Ordered hardware-thread list for `groups` thread groups of
/// `threads_per_group` threads: group g occupies entries
/// [g*threads_per_group, (g+1)*threads_per_group), all inside one outermost
/// cache group. With SMT on, consecutive ranks fill sibling pairs first;
/// with SMT off only one hardware thread per core is used.
std::vector<int> plan_placement(const Topology& topo, int groups,
                                int threads_per_group, SmtMode smt);

}  // namespace stencilwave
