#include "stencilwave/topology.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>
#include <thread>

#include "stencilwave/error.hpp"

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

namespace stencilwave {

namespace fs = std::filesystem;

std::string_view to_string(TopologySource source) noexcept {
  switch (source) {
    case TopologySource::os_introspection: return "os-introspection";
    case TopologySource::manual_file: return "manual-file";
    case TopologySource::fallback: return "fallback";
  }
  return "unknown";
}

int Topology::outermost_level() const noexcept {
  int level = 0;
  for (const auto& g : cache_groups) level = std::max(level, g.level);
  return level;
}

std::vector<CacheGroup> Topology::outer_groups() const {
  const int level = outermost_level();
  std::vector<CacheGroup> out;
  for (const auto& g : cache_groups)
    if (g.level == level) out.push_back(g);
  return out;
}

std::optional<std::uint64_t> Topology::outer_cache_bytes() const {
  const auto groups = outer_groups();
  if (groups.empty()) return std::nullopt;
  return groups.front().size_bytes;
}

bool Topology::contains(int hw_thread) const noexcept {
  return find(hw_thread) != nullptr;
}

const HwThread* Topology::find(int hw_thread) const noexcept {
  auto it = std::lower_bound(
      threads.begin(), threads.end(), hw_thread,
      [](const HwThread& t, int id) { return t.id < id; });
  return it != threads.end() && it->id == hw_thread ? &*it : nullptr;
}

std::vector<int> parse_cpu_list(std::string_view text) {
  std::vector<int> ids;
  auto parse_int = [&](std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0)
      fail(ErrorCode::io, "malformed cpu list '" + std::string(text) + "'");
    return v;
  };
  const auto first = text.find_first_not_of(" \t\n");
  if (first == std::string_view::npos) return ids;
  text = text.substr(first, text.find_last_not_of(" \t\n") - first + 1);
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      ids.push_back(parse_int(item));
    } else {
      const int lo = parse_int(item.substr(0, dash));
      const int hi = parse_int(item.substr(dash + 1));
      for (int v = lo; v <= hi; ++v) ids.push_back(v);
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

namespace {

std::optional<std::string> read_first_line(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return std::nullopt;
  std::string line;
  std::getline(in, line);
  return line;
}

std::uint64_t parse_cache_size(const std::string& text) {
  std::uint64_t value = 0;
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
    value = value * 10 + static_cast<std::uint64_t>(text[pos] - '0');
    ++pos;
  }
  if (pos < text.size()) {
    switch (text[pos]) {
      case 'K': case 'k': value <<= 10; break;
      case 'M': case 'm': value <<= 20; break;
      case 'G': case 'g': value <<= 30; break;
      default: break;
    }
  }
  return value;
}

// Completes a topology from per-thread (core key, outer group) assignments.
void build_derived(Topology& topo,
                   const std::map<int, std::vector<int>>& core_members) {
  topo.smt_siblings.clear();
  std::vector<std::vector<int>> cores;
  for (const auto& [key, members] : core_members) {
    auto m = members;
    std::sort(m.begin(), m.end());
    cores.push_back(std::move(m));
  }
  std::sort(cores.begin(), cores.end());
  topo.smt_siblings = cores;
  for (std::size_t c = 0; c < cores.size(); ++c)
    for (int id : cores[c])
      for (auto& t : topo.threads)
        if (t.id == id) t.core = static_cast<int>(c);

  const auto outer = topo.outer_groups();
  for (auto& t : topo.threads) {
    for (std::size_t g = 0; g < outer.size(); ++g) {
      const auto& ids = outer[g].hw_threads;
      if (std::binary_search(ids.begin(), ids.end(), t.id))
        t.group = static_cast<int>(g);
    }
  }
}

void validate(const Topology& topo) {
  const auto outer = topo.outer_groups();
  std::map<int, int> seen;
  for (const auto& g : outer)
    for (int id : g.hw_threads) ++seen[id];
  for (const auto& t : topo.threads) {
    if (seen[t.id] != 1)
      fail(ErrorCode::config, "hardware thread " + std::to_string(t.id) +
                                  " is not in exactly one outermost cache group");
  }
  for (const auto& g : topo.cache_groups)
    if (g.size_bytes && *g.size_bytes == 0)
      fail(ErrorCode::config, "cache group with zero size");
}

}  // namespace

Topology read_sysfs_topology(const fs::path& root) {
  Topology topo;
  topo.source = TopologySource::os_introspection;

  std::vector<int> online;
  if (auto text = read_first_line(root / "online")) {
    online = parse_cpu_list(*text);
  } else {
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
      const auto name = entry.path().filename().string();
      if (name.size() > 3 && name.rfind("cpu", 0) == 0 &&
          std::all_of(name.begin() + 3, name.end(),
                      [](char c) { return c >= '0' && c <= '9'; }))
        online.push_back(std::stoi(name.substr(3)));
    }
    std::sort(online.begin(), online.end());
  }
  if (online.empty()) fail(ErrorCode::io, "no cpus under " + root.string());
  const std::set<int> online_set(online.begin(), online.end());
  auto restrict_online = [&](std::vector<int> ids) {
    std::erase_if(ids, [&](int id) { return online_set.count(id) == 0; });
    return ids;
  };

  std::map<int, std::vector<int>> core_members;
  std::map<std::pair<int, std::vector<int>>, std::optional<std::uint64_t>>
      groups;
  bool missing_cache = false;
  for (int id : online) {
    const fs::path cpu = root / ("cpu" + std::to_string(id));
    topo.threads.push_back(HwThread{id, 0, 0});

    // Sibling sets identify cores; the lowest sibling id keys the core.
    int core_key = id;
    if (auto s = read_first_line(cpu / "topology" / "thread_siblings_list")) {
      auto sib = restrict_online(parse_cpu_list(*s));
      if (!sib.empty()) core_key = sib.front();
    }
    core_members[core_key].push_back(id);

    const fs::path cache = cpu / "cache";
    bool any = false;
    for (int index = 0;; ++index) {
      const fs::path dir = cache / ("index" + std::to_string(index));
      if (!fs::exists(dir)) break;
      const auto type = read_first_line(dir / "type").value_or("Unified");
      if (type == "Instruction") continue;
      const auto level = read_first_line(dir / "level");
      const auto shared = read_first_line(dir / "shared_cpu_list");
      if (!level || !shared) continue;
      std::optional<std::uint64_t> size;
      if (auto s = read_first_line(dir / "size")) {
        const auto bytes = parse_cache_size(*s);
        if (bytes > 0) size = bytes;
      }
      auto members = restrict_online(parse_cpu_list(*shared));
      if (members.empty()) members.push_back(id);
      groups[{std::stoi(*level), members}] = size;
      any = true;
    }
    if (!any) missing_cache = true;
  }

  if (missing_cache || groups.empty()) {
    topo.warnings.push_back("cache hierarchy not exposed by the OS; "
                            "assuming one group with unknown cache size");
    groups.clear();
    groups[{0, online}] = std::nullopt;
  }
  for (const auto& [key, size] : groups)
    topo.cache_groups.push_back(CacheGroup{key.first, size, key.second});
  std::stable_sort(topo.cache_groups.begin(), topo.cache_groups.end(),
                   [](const CacheGroup& a, const CacheGroup& b) {
                     return a.level < b.level;
                   });
  build_derived(topo, core_members);
  validate(topo);
  return topo;
}

Topology parse_topology_file(std::istream& in) {
  struct Row {
    int id, core, group;
    std::uint64_t bytes;
    int level;
  };
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    Row r{};
    if (!(fields >> r.id)) continue;  // blank or comment-only
    if (!(fields >> r.core >> r.group >> r.bytes) || r.id < 0 || r.bytes == 0)
      fail(ErrorCode::config, "topology file line " + std::to_string(lineno) +
                                  ": expected <id> <core> <group> <bytes>");
    r.level = 3;
    if (int level; fields >> level) r.level = level;
    rows.push_back(r);
  }
  if (rows.empty()) fail(ErrorCode::config, "topology file lists no hardware threads");

  Topology topo;
  topo.source = TopologySource::manual_file;
  std::map<int, std::vector<int>> core_members;
  std::map<int, CacheGroup> groups;
  std::set<int> ids;
  for (const auto& r : rows) {
    if (!ids.insert(r.id).second)
      fail(ErrorCode::config, "duplicate hardware thread " + std::to_string(r.id));
    topo.threads.push_back(HwThread{r.id, 0, 0});
    core_members[r.core].push_back(r.id);
    auto& g = groups[r.group];
    if (!g.hw_threads.empty() && (g.size_bytes != r.bytes || g.level != r.level))
      fail(ErrorCode::config, "cache group " + std::to_string(r.group) +
                                  " declared with inconsistent size or level");
    g.level = r.level;
    g.size_bytes = r.bytes;
    g.hw_threads.push_back(r.id);
  }
  std::sort(topo.threads.begin(), topo.threads.end(),
            [](const HwThread& a, const HwThread& b) { return a.id < b.id; });
  for (auto& [id, g] : groups) {
    std::sort(g.hw_threads.begin(), g.hw_threads.end());
    topo.cache_groups.push_back(g);
  }
  // Siblings must share every cache level.
  for (const auto& [core, members] : core_members) {
    std::set<int> group_ids;
    for (const auto& r : rows)
      if (r.core == core) group_ids.insert(r.group);
    if (group_ids.size() != 1)
      fail(ErrorCode::config, "SMT siblings of core " + std::to_string(core) +
                                  " span several cache groups");
  }
  build_derived(topo, core_members);
  validate(topo);
  return topo;
}

Topology load_topology_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open topology file " + path.string());
  return parse_topology_file(in);
}

Topology fallback_topology(unsigned hw_threads) {
  if (hw_threads == 0) hw_threads = 1;
  Topology topo;
  topo.source = TopologySource::fallback;
  CacheGroup group;
  group.level = 0;
  std::map<int, std::vector<int>> cores;
  for (unsigned id = 0; id < hw_threads; ++id) {
    topo.threads.push_back(HwThread{static_cast<int>(id), 0, 0});
    group.hw_threads.push_back(static_cast<int>(id));
    cores[static_cast<int>(id)].push_back(static_cast<int>(id));
  }
  topo.cache_groups.push_back(group);
  build_derived(topo, cores);
  topo.warnings.push_back(
      "no topology information available; using one group of " +
      std::to_string(hw_threads) + " threads with unknown cache size");
  return topo;
}

Topology detect_topology(const DetectOptions& options) {
  std::optional<fs::path> file = options.manual_file;
  if (!file && options.use_environment) {
    if (const char* env = std::getenv(kTopologyFileEnv); env && *env)
      file = fs::path(env);
  }
  std::vector<std::string> notes;
  if (file) {
    try {
      return load_topology_file(*file);
    } catch (const Error& e) {
      notes.push_back(std::string("manual topology file rejected: ") + e.what());
    }
  }
  try {
    auto topo = read_sysfs_topology(options.sysfs_root);
    topo.warnings.insert(topo.warnings.begin(), notes.begin(), notes.end());
    return topo;
  } catch (const Error& e) {
    notes.push_back(std::string("OS topology introspection failed: ") + e.what());
  }
  auto topo = fallback_topology(std::thread::hardware_concurrency());
  topo.warnings.insert(topo.warnings.begin(), notes.begin(), notes.end());
  return topo;
}

void pin_current_thread(int hw_thread) {
#if defined(__linux__)
  if (hw_thread < 0 || hw_thread >= CPU_SETSIZE)
    fail(ErrorCode::pinning, "hardware thread " + std::to_string(hw_thread) +
                                 " outside the affinity mask range");
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(hw_thread, &set);
  const int rc = pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
  if (rc != 0)
    fail(ErrorCode::pinning, "cannot pin to hardware thread " +
                                 std::to_string(hw_thread) + ": " +
                                 std::strerror(rc));
#else
  fail(ErrorCode::pinning, "thread pinning is not supported on this platform");
#endif
}

std::vector<int> current_affinity() {
  std::vector<int> ids;
#if defined(__linux__)
  cpu_set_t set;
  CPU_ZERO(&set);
  const int rc = pthread_getaffinity_np(pthread_self(), sizeof(set), &set);
  if (rc != 0)
    fail(ErrorCode::pinning, std::string("cannot query affinity: ") +
                                 std::strerror(rc));
  for (int id = 0; id < CPU_SETSIZE; ++id)
    if (CPU_ISSET(id, &set)) ids.push_back(id);
#endif
  return ids;
}

std::vector<int> plan_placement(const Topology& topo, int groups,
                                int threads_per_group, SmtMode smt) {
  if (groups < 1 || threads_per_group < 1)
    fail(ErrorCode::placement, "need at least one group of one thread");

  // Candidate slots per outermost cache group, cores in order of their
  // lowest hardware thread, siblings adjacent.
  const auto outer = topo.outer_groups();
  std::vector<std::vector<int>> slots(outer.size());
  for (const auto& siblings : topo.smt_siblings) {
    if (siblings.empty()) continue;
    const HwThread* first = topo.find(siblings.front());
    if (first == nullptr) continue;
    auto& dst = slots[static_cast<std::size_t>(first->group)];
    if (smt == SmtMode::on)
      dst.insert(dst.end(), siblings.begin(), siblings.end());
    else
      dst.push_back(siblings.front());
  }

  const long required = static_cast<long>(groups) * threads_per_group;
  long capacity = 0;
  for (const auto& s : slots) capacity += static_cast<long>(s.size());
  if (required > capacity)
    fail(ErrorCode::placement,
         std::to_string(required) + " threads requested but only " +
             std::to_string(capacity) +
             (smt == SmtMode::on ? " hardware threads" : " physical cores") +
             " are available");

  std::vector<int> plan;
  std::size_t cache_group = 0;
  std::size_t used = 0;
  for (int g = 0; g < groups; ++g) {
    while (cache_group < slots.size() &&
           slots[cache_group].size() - used <
               static_cast<std::size_t>(threads_per_group)) {
      ++cache_group;
      used = 0;
    }
    if (cache_group == slots.size())
      fail(ErrorCode::placement,
           "a thread group of " + std::to_string(threads_per_group) +
               " does not fit inside one outermost cache group");
    for (int t = 0; t < threads_per_group; ++t)
      plan.push_back(slots[cache_group][used++]);
  }
  return plan;
}

}  // namespace stencilwave
