#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "stencilwave/error.hpp"
#include "stencilwave/perf.hpp"

namespace stencilwave {

namespace {

std::string cpu_model_name() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) break;
      auto value = line.substr(colon + 1);
      value.erase(0, value.find_first_not_of(' '));
      return value;
    }
  }
  return "unknown";
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string summarize_topology(const Topology& topo) {
  std::ostringstream os;
  const auto groups = topo.outer_groups();
  os << topo.threads.size() << " hw threads, " << topo.physical_cores()
     << " cores, " << groups.size() << " L" << topo.outermost_level()
     << " group(s)";
  if (auto bytes = topo.outer_cache_bytes()) os << " of " << *bytes << " B";
  os << ", source " << to_string(topo.source);
  return os.str();
}

}  // namespace

HostFingerprint host_fingerprint(const Topology& topo) {
  HostFingerprint fp;
  char name[256] = {};
  if (gethostname(name, sizeof name - 1) == 0) fp.hostname = name;
  fp.cpu_model = cpu_model_name();
  fp.hardware_threads = std::thread::hardware_concurrency();
  fp.topology = summarize_topology(topo);
  fp.timestamp = utc_timestamp();
#if defined(__VERSION__)
  fp.compiler = __VERSION__;
#endif
  return fp;
}

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::config, "median of an empty sample");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mlups(std::uint64_t updates, double seconds) {
  if (!(seconds > 0.0)) fail(ErrorCode::domain, "elapsed time must be positive");
  return static_cast<double>(updates) / seconds / 1e6;
}

double timer_resolution() {
  using clock = std::chrono::steady_clock;
  auto best = clock::duration::max();
  for (int i = 0; i < 16; ++i) {
    const auto t0 = clock::now();
    auto t1 = clock::now();
    while (t1 == t0) t1 = clock::now();
    best = std::min(best, t1 - t0);
  }
  return std::chrono::duration<double>(best).count();
}

Measurement measure(const std::function<double()>& timed_run,
                    std::uint64_t updates_per_rep, MeasureOptions opts) {
  if (opts.repetitions < 1) fail(ErrorCode::config, "repetitions must be >= 1");
  if (opts.warmup < 0) fail(ErrorCode::config, "warmup must be >= 0");
  for (int i = 0; i < opts.warmup; ++i) timed_run();

  Measurement m;
  m.updates_per_rep = updates_per_rep;
  m.seconds.reserve(static_cast<std::size_t>(opts.repetitions));
  for (int i = 0; i < opts.repetitions; ++i) m.seconds.push_back(timed_run());
  m.median_seconds = median(m.seconds);
  if (m.median_seconds > 0.0) {
    m.mlups = mlups(updates_per_rep, m.median_seconds);
    if (timer_resolution() > 0.01 * m.median_seconds)
      m.warnings.push_back("timer resolution exceeds 1% of a repetition; "
                           "increase the iteration count");
  } else {
    m.warnings.push_back("repetition too short to time; increase the iteration count");
  }
  return m;
}

Measurement measure_plan(const SweepPlan& plan, const Grid3D& input,
                         MeasureOptions opts, Grid3D* last_output) {
  validate_plan(plan, input);
  bool pinned = !plan.pinning.empty();
  std::vector<std::string> warnings;
  auto run = [&] {
    Grid3D g = input;
    SweepStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    g = run_sweeps(plan, std::move(g), &stats);
    const auto t1 = std::chrono::steady_clock::now();
    if (last_output) *last_output = std::move(g);
    pinned = pinned && stats.pinned;
    for (auto& w : stats.warnings)
      if (std::find(warnings.begin(), warnings.end(), w) == warnings.end())
        warnings.push_back(std::move(w));
    return std::chrono::duration<double>(t1 - t0).count();
  };
  const auto updates = static_cast<std::uint64_t>(plan.iterations) *
                       static_cast<std::uint64_t>(input.interior_cells());
  Measurement m = measure(run, updates, opts);
  m.pinned = pinned;
  m.warnings.insert(m.warnings.end(), warnings.begin(), warnings.end());
  return m;
}

}  // namespace stencilwave
