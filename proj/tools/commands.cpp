#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "cli.hpp"
#include "stencilwave/error.hpp"
#include "stencilwave/perf.hpp"
#include "stencilwave/topology.hpp"

namespace stencilwave::cli {

namespace {

using Json = nlohmann::ordered_json;

/// One result: scalar fields in a fixed order plus optional per-repetition
/// times. JSON nests the times in a `reps` array of {rep, seconds}; CSV
/// writes one row per repetition and a summary row, with `rep` and
/// `seconds` as the last two columns. Flattened, both carry the same fields.
struct Record {
  Json fields = Json::object();
  bool has_reps = false;
  std::vector<double> reps;
  double summary_seconds = 0.0;
};

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, v);
  return buf;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string s;
  for (const auto& x : items) {
    if (!s.empty()) s += sep;
    s += x;
  }
  return s;
}

std::string format_cpus(const std::vector<int>& cpus) {
  std::vector<std::string> parts;
  for (int c : cpus) parts.push_back(std::to_string(c));
  return join(parts, ",");
}

Json to_json(const Record& r) {
  Json j = r.fields;
  if (r.has_reps) {
    Json reps = Json::array();
    for (std::size_t i = 0; i < r.reps.size(); ++i)
      reps.push_back(Json{{"rep", i}, {"seconds", r.reps[i]}});
    j["reps"] = std::move(reps);
  }
  return j;
}

std::string csv_cell(const Json& v) {
  std::string s;
  if (v.is_string()) {
    s = v.get<std::string>();
  } else if (v.is_array()) {
    std::vector<std::string> parts;
    for (const auto& x : v) parts.push_back(x.is_string() ? x.get<std::string>() : x.dump());
    s = join(parts, "; ");
  } else if (v.is_null()) {
    s = "";
  } else {
    s = v.dump();
  }
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

void write_csv(std::ostream& os, const std::vector<Record>& records) {
  if (records.empty()) return;
  const auto& first = records.front();
  std::vector<std::string> header;
  for (const auto& [key, _] : first.fields.items()) header.push_back(key);
  if (first.has_reps) {
    header.push_back("rep");
    header.push_back("seconds");
  }
  os << join(header, ",") << '\n';
  for (const auto& r : records) {
    std::string prefix;
    for (const auto& [key, value] : r.fields.items()) {
      if (!prefix.empty()) prefix += ',';
      prefix += csv_cell(value);
    }
    if (!r.has_reps) {
      os << prefix << '\n';
      continue;
    }
    for (std::size_t i = 0; i < r.reps.size(); ++i)
      os << prefix << ',' << i << ',' << Json(r.reps[i]).dump() << '\n';
    os << prefix << ",summary," << Json(r.summary_seconds).dump() << '\n';
  }
}

void emit(const RunConfig& cfg, std::ostream& out,
          const std::vector<Record>& records, bool as_array) {
  std::ofstream file;
  std::ostream* os = &out;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) fail(ErrorCode::io, "cannot open " + cfg.output + " for writing");
    os = &file;
  }
  if (cfg.format == "csv") {
    write_csv(*os, records);
  } else if (as_array) {
    Json arr = Json::array();
    for (const auto& r : records) arr.push_back(to_json(r));
    *os << arr.dump(2) << '\n';
  } else {
    *os << to_json(records.front()).dump(2) << '\n';
  }
  if (!*os) fail(ErrorCode::io, "failed writing results");
}

void add_host(Json& j, const Topology& topo) {
  const auto fp = host_fingerprint(topo);
  j["hostname"] = fp.hostname;
  j["cpu_model"] = fp.cpu_model;
  j["hardware_threads"] = fp.hardware_threads;
  j["topology"] = fp.topology;
  j["timestamp"] = fp.timestamp;
  j["compiler"] = fp.compiler;
}

int team_size(const RunConfig& cfg) {
  switch (cfg.variant) {
    case Variant::serial: return 1;
    case Variant::threaded:
    case Variant::pipeline: return cfg.threads;
    case Variant::wavefront: return cfg.groups * cfg.threads_per_group;
  }
  return 1;
}

struct Pinning {
  std::vector<int> cpus;
  bool failed = false;  // requested pinning could not be honored
};

/// Resolves --pinning. "auto" places groups inside outer cache groups and
/// falls back to unpinned with a warning; an explicit list is checked
/// against the detected hardware threads.
Pinning resolve_pinning(const std::string& request, const Topology& topo,
                        int groups, int per_group, bool smt,
                        std::vector<std::string>& warnings) {
  Pinning p;
  if (request == "none") return p;
  if (request == "auto") {
    try {
      p.cpus = plan_placement(topo, groups, per_group,
                              smt ? SmtMode::on : SmtMode::off);
    } catch (const Error& e) {
      p.failed = true;
      warnings.push_back(std::string("automatic placement failed, running unpinned: ") +
                         e.what());
    }
    return p;
  }
  try {
    p.cpus = parse_cpu_list(request);
  } catch (const Error& e) {
    throw UsageError{std::string("--pinning: ") + e.what()};
  }
  if (static_cast<int>(p.cpus.size()) < groups * per_group)
    throw UsageError{"--pinning lists " + std::to_string(p.cpus.size()) +
                     " cpus for a team of " + std::to_string(groups * per_group)};
  for (int c : p.cpus) {
    if (!topo.contains(c)) {
      p.failed = true;
      warnings.push_back("hardware thread " + std::to_string(c) +
                         " is not present, running unpinned");
    }
  }
  if (p.failed) p.cpus.clear();
  return p;
}

struct PlanSetup {
  SweepPlan plan;
  Pinning pinning;
  std::vector<std::string> warnings;
};

PlanSetup make_plan(const RunConfig& cfg, const Topology& topo) {
  PlanSetup s;
  auto& plan = s.plan;
  plan.kernel = cfg.kernel;
  plan.variant = cfg.variant;
  plan.iterations = cfg.iterations;
  plan.threads = cfg.threads;
  plan.nt_stores = cfg.nt_stores;
  plan.wavefront.num_groups = cfg.groups;
  plan.wavefront.threads_per_group = cfg.threads_per_group;
  plan.wavefront.blocks = cfg.blocks;
  if (cfg.variant == Variant::wavefront && cfg.blocks == 0) {
    if (cfg.groups < 1 || cfg.threads_per_group < 1)
      fail(ErrorCode::config, "groups and threads per group must be positive");
    plan.wavefront.blocks =
        choose_block_size(topo, cfg.threads_per_group, cfg.size.ni, cfg.size.nj,
                          cfg.groups, &s.warnings);
  }
  const int team = team_size(cfg);
  if (team < 1) fail(ErrorCode::config, "team size must be positive");
  plan.wavefront.barrier =
      cfg.barrier ? *cfg.barrier
                  : default_barrier_kind(static_cast<std::size_t>(team),
                                         static_cast<std::size_t>(
                                             std::max(1, topo.physical_cores())));
  // The serial engine runs on the calling thread and is never pinned.
  if (cfg.variant == Variant::serial) return s;
  const bool grouped = cfg.variant == Variant::wavefront;
  s.pinning = resolve_pinning(cfg.pinning, topo, grouped ? cfg.groups : team,
                              grouped ? cfg.threads_per_group : 1, cfg.smt,
                              s.warnings);
  plan.pinning = s.pinning.cpus;
  return s;
}

Grid3D make_input(const RunConfig& cfg) {
  return create_grid(cfg.size.ni, cfg.size.nj, cfg.size.nk,
                     pattern::SeededRandom{cfg.seed});
}

void add_plan_echo(Json& j, const RunConfig& cfg, const SweepPlan& plan,
                   const PlanSetup& setup) {
  j["command"] = cfg.command;
  j["kernel"] = std::string(to_string(cfg.kernel));
  j["variant"] = std::string(to_string(cfg.variant));
  j["size"] = format_extent(cfg.size);
  j["ni"] = cfg.size.ni;
  j["nj"] = cfg.size.nj;
  j["nk"] = cfg.size.nk;
  j["iterations"] = cfg.iterations;
  j["groups"] = cfg.groups;
  j["tpg"] = cfg.threads_per_group;
  j["blocks"] = plan.variant == Variant::wavefront ? plan.wavefront.blocks : 0;
  j["threads"] = cfg.threads;
  j["team_size"] = team_size(cfg);
  j["smt"] = cfg.smt;
  j["barrier"] = std::string(to_string(plan.wavefront.barrier));
  j["pinning"] = cfg.pinning;
  j["cpus"] = format_cpus(plan.pinning);
  j["pinning_failed"] = setup.pinning.failed;
  j["nt_stores"] = cfg.nt_stores;
  j["seed"] = cfg.seed;
}

/// The command line that reproduces the run, with automatic choices fixed.
std::string echo_args(RunConfig cfg, const SweepPlan& plan) {
  cfg.matrix = false;
  cfg.matrix_sizes.clear();
  cfg.matrix_variants.clear();
  cfg.matrix_t.clear();
  cfg.output.clear();
  if (plan.variant == Variant::wavefront) cfg.blocks = plan.wavefront.blocks;
  cfg.barrier = plan.wavefront.barrier;
  return join_args(to_args(cfg));
}

struct Bandwidth {
  std::optional<double> value;
  std::string source;
  std::vector<std::string> warnings;
};

Bandwidth bench_bandwidth(const RunConfig& cfg, const Topology& topo, int team) {
  Bandwidth bw;
  if (cfg.bandwidth) {
    bw.value = *cfg.bandwidth;
    bw.source = "cli";
    return bw;
  }
  try {
    StreamOptions so;
    so.threads = team;
    so.elements = default_stream_elements(topo.outer_cache_bytes(), 1ull << 28);
    so.repetitions = 3;
    so.nt_stores = true;
    const auto r = stream_triad(so);
    bw.value = r.bandwidth;
    bw.source = "triad";
    bw.warnings = r.warnings;
  } catch (const Error& e) {
    bw.source = "unavailable";
    bw.warnings.push_back(std::string("bandwidth measurement failed: ") + e.what());
  }
  return bw;
}

struct BenchOutcome {
  Record record;
  bool mismatch = false;
};

BenchOutcome bench_one(const RunConfig& cfg, const Topology& topo,
                       const Bandwidth& bw, const std::string& verbatim_args) {
  auto setup = make_plan(cfg, topo);
  const auto& plan = setup.plan;
  const Grid3D input = make_input(cfg);
  validate_plan(plan, input);

  Grid3D last(1, 1, 1);
  const auto m = measure_plan(plan, input,
                              MeasureOptions{cfg.repetitions, cfg.warmup}, &last);

  BenchOutcome out;
  std::string verified = "skipped";
  if (cfg.verify) {
    auto oracle = run_serial(plan, input);
    out.mismatch = !bitwise_equal(oracle, last);
    verified = out.mismatch ? "fail" : "pass";
  }

  auto& j = out.record.fields;
  add_plan_echo(j, cfg, plan, setup);
  j["repetitions"] = cfg.repetitions;
  j["warmup"] = cfg.warmup;
  j["args"] = echo_args(cfg, plan);
  j["invoked_as"] = verbatim_args;
  add_host(j, topo);
  j["median_seconds"] = m.median_seconds;
  j["mlups"] = m.mlups;
  j["updates_per_rep"] = m.updates_per_rep;
  j["pinned"] = m.pinned;

  const int t = plan.variant == Variant::wavefront ? cfg.threads_per_group : 1;
  const double bytes = predict_traffic(cfg.kernel, cfg.variant, t, cfg.nt_stores);
  j["bandwidth"] = bw.value ? Json(*bw.value) : Json(nullptr);
  j["ms_source"] = bw.source;
  j["bytes_per_lup"] = bytes;
  j["p0_mlups"] = bw.value ? Json(predict_p0(*bw.value, bytes) / 1e6) : Json(nullptr);
  j["verified"] = verified;
  j["checksum"] = hex64(summarize(last).checksum);

  std::vector<std::string> warnings = setup.warnings;
  warnings.insert(warnings.end(), m.warnings.begin(), m.warnings.end());
  warnings.insert(warnings.end(), bw.warnings.begin(), bw.warnings.end());
  j["warnings"] = warnings;

  out.record.has_reps = true;
  out.record.reps = m.seconds;
  out.record.summary_seconds = m.median_seconds;
  return out;
}

int cmd_bench(const RunConfig& cfg, const std::string& verbatim, std::ostream& out,
              std::ostream& err) {
  const auto topo = detect_topology();
  std::vector<Record> records;
  bool mismatch = false;

  if (!cfg.matrix) {
    const Grid3D probe(cfg.size.ni, cfg.size.nj, cfg.size.nk);  // extent check
    (void)probe;
    const auto bw = bench_bandwidth(cfg, topo, std::max(1, team_size(cfg)));
    auto r = bench_one(cfg, topo, bw, verbatim);
    mismatch = r.mismatch;
    records.push_back(std::move(r.record));
    emit(cfg, out, records, false);
    if (mismatch) err << "verification failed: result differs from the serial oracle\n";
    return mismatch ? kMismatch : kSuccess;
  }

  std::vector<Extent> sizes;
  for (const auto& s : cfg.matrix_sizes) sizes.push_back(parse_extent(s));
  if (sizes.empty()) sizes = {{100, 50, 50}, {200, 100, 100}, {400, 200, 200}};
  std::vector<Variant> variants = cfg.matrix_variants;
  if (variants.empty()) {
    variants = {Variant::serial, Variant::wavefront};
    variants.insert(variants.begin() + 1, is_gauss_seidel(cfg.kernel)
                                              ? Variant::pipeline
                                              : Variant::threaded);
  }
  std::vector<int> ts = cfg.matrix_t;
  if (ts.empty()) ts = {cfg.threads_per_group};

  int max_team = 1;
  for (Variant v : variants) {
    RunConfig c = cfg;
    c.variant = v;
    for (int t : ts) {
      c.threads_per_group = t;
      max_team = std::max(max_team, team_size(c));
    }
  }
  const auto bw = bench_bandwidth(cfg, topo, max_team);

  for (const auto& size : sizes) {
    for (Variant v : variants) {
      if (v == Variant::threaded && is_gauss_seidel(cfg.kernel)) continue;
      if (v == Variant::pipeline && !is_gauss_seidel(cfg.kernel)) continue;
      const auto t_list = v == Variant::wavefront ? ts : std::vector<int>{0};
      for (int t : t_list) {
        RunConfig c = cfg;
        c.matrix = false;
        c.size = size;
        c.variant = v;
        if (v == Variant::wavefront) {
          c.threads_per_group = t;
          if (t >= 1 && c.iterations % t != 0) {
            c.iterations = (c.iterations / t + 1) * t;
            err << "note: iterations raised to " << c.iterations
                << " for t=" << t << '\n';
          }
        }
        auto r = bench_one(c, topo, bw, verbatim);
        mismatch = mismatch || r.mismatch;
        records.push_back(std::move(r.record));
      }
    }
  }
  emit(cfg, out, records, true);
  return mismatch ? kMismatch : kSuccess;
}

std::string describe(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto topo = detect_topology();
  auto setup = make_plan(cfg, topo);
  auto plan = setup.plan;
  plan.instrument = true;
  const Grid3D input = make_input(cfg);

  SweepStats stats;
  Grid3D result = run_sweeps(plan, input, &stats);
  SweepPlan oracle_plan = plan;
  oracle_plan.kernel = cfg.oracle_kernel.value_or(cfg.kernel);
  oracle_plan.variant = Variant::serial;
  oracle_plan.pinning.clear();
  const Grid3D oracle = run_serial(oracle_plan, input);

  if (!cfg.dump.empty()) write_binary(result, cfg.dump);

  const auto diff = first_difference(result, oracle);
  const bool equal = !diff && bitwise_equal(result, oracle);
  const bool ok = equal && stats.violations == 0;

  Record rec;
  auto& j = rec.fields;
  add_plan_echo(j, cfg, plan, setup);
  j["oracle_kernel"] = std::string(to_string(oracle_plan.kernel));
  j["args"] = echo_args(cfg, plan);
  j["equal"] = equal;
  j["violations"] = stats.violations;
  j["diff_k"] = diff ? Json(diff->k) : Json(nullptr);
  j["diff_j"] = diff ? Json(diff->j) : Json(nullptr);
  j["diff_i"] = diff ? Json(diff->i) : Json(nullptr);
  j["variant_value"] = diff ? Json(describe(diff->lhs)) : Json(nullptr);
  j["oracle_value"] = diff ? Json(describe(diff->rhs)) : Json(nullptr);
  j["checksum"] = hex64(summarize(result).checksum);
  j["oracle_checksum"] = hex64(summarize(oracle).checksum);
  std::vector<std::string> warnings = setup.warnings;
  warnings.insert(warnings.end(), stats.warnings.begin(), stats.warnings.end());
  j["warnings"] = warnings;
  emit(cfg, out, {rec}, false);

  if (!ok) {
    if (diff) {
      err << "mismatch at (k=" << diff->k << ", j=" << diff->j << ", i=" << diff->i
          << "): " << to_string(cfg.variant) << " " << to_string(cfg.kernel) << " = "
          << describe(diff->lhs) << ", serial " << to_string(oracle_plan.kernel)
          << " = " << describe(diff->rhs) << '\n';
    } else if (!equal) {
      err << "mismatch in the halo\n";
    }
    if (stats.violations)
      err << stats.violations << " reads observed a line at the wrong level\n";
    err << "config: " << echo_args(cfg, plan) << '\n';
    return kMismatch;
  }
  return kSuccess;
}

int cmd_stream(const RunConfig& cfg, std::ostream& out) {
  const auto topo = detect_topology();
  std::vector<std::string> warnings;
  StreamOptions so;
  so.threads = cfg.threads;
  so.nt_stores = cfg.stream_nt;
  so.repetitions = cfg.repetitions;
  // Arrays below 4x the outer cache are run anyway, with a warning, when the
  // size was given explicitly or the default hit its memory cap.
  so.elements = cfg.elements ? *cfg.elements
                             : default_stream_elements(topo.outer_cache_bytes(), 1ull << 30);
  const auto cache = topo.outer_cache_bytes();
  if (cache && so.elements * 24 < 4 * *cache)
    warnings.push_back("arrays are smaller than 4x the outer cache; bandwidth may reflect the cache");
  if (cfg.threads < 1) fail(ErrorCode::config, "threads must be positive");
  const auto pin = resolve_pinning(cfg.pinning, topo, cfg.threads, 1, cfg.smt, warnings);
  so.pinning = pin.cpus;

  const auto r = stream_triad(so);

  Record rec;
  auto& j = rec.fields;
  j["command"] = "stream";
  j["threads"] = cfg.threads;
  j["elements"] = so.elements;
  j["nt_requested"] = cfg.stream_nt;
  j["nt_stores"] = r.nt_stores;
  j["pinning"] = cfg.pinning;
  j["cpus"] = format_cpus(so.pinning);
  j["pinning_failed"] = pin.failed;
  j["args"] = join_args(to_args(cfg));
  add_host(j, topo);
  j["bandwidth"] = r.bandwidth;
  j["bandwidth_gbs"] = r.bandwidth / 1e9;
  j["bytes_per_element"] = r.bytes_per_element;
  j["median_seconds"] = median(r.seconds);
  j["validated"] = r.validated;
  j["pinned"] = r.pinned;
  warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
  j["warnings"] = warnings;
  rec.has_reps = true;
  rec.reps = r.seconds;
  rec.summary_seconds = median(r.seconds);
  emit(cfg, out, {rec}, false);
  return kSuccess;
}

Json topology_json(const Topology& topo) {
  Json j;
  j["source"] = std::string(to_string(topo.source));
  j["hw_threads"] = topo.threads.size();
  j["physical_cores"] = topo.physical_cores();
  j["outermost_level"] = topo.outermost_level();
  const auto outer = topo.outer_cache_bytes();
  j["outer_cache_bytes"] = outer ? Json(*outer) : Json(nullptr);
  Json threads = Json::array();
  for (const auto& t : topo.threads)
    threads.push_back(Json{{"id", t.id}, {"core", t.core}, {"group", t.group}});
  j["threads"] = threads;
  j["smt_siblings"] = topo.smt_siblings;
  Json caches = Json::array();
  for (const auto& c : topo.cache_groups) {
    caches.push_back(Json{{"level", c.level},
                          {"size_bytes", c.size_bytes ? Json(*c.size_bytes) : Json(nullptr)},
                          {"hw_threads", c.hw_threads}});
  }
  j["cache_groups"] = caches;
  j["warnings"] = topo.warnings;
  return j;
}

int cmd_topo(const RunConfig& cfg, std::ostream& out) {
  RunConfig c = cfg;
  c.format = "json";
  Record rec;
  rec.fields = topology_json(detect_topology());
  emit(c, out, {rec}, false);
  return kSuccess;
}

int cmd_model(const RunConfig& cfg, std::ostream& out) {
  const double bandwidth = cfg.bandwidth.value_or(0.0);
  std::string source = "cli";
  double bytes = 0.0;
  if (cfg.bytes_per_lup) {
    bytes = *cfg.bytes_per_lup;
  } else {
    const int t = cfg.variant == Variant::wavefront ? cfg.threads_per_group : 1;
    bytes = predict_traffic(cfg.kernel, cfg.variant, t, cfg.nt_stores);
    source = "derived";
  }
  const auto model = make_perf_model(bandwidth, bytes);

  Record rec;
  auto& j = rec.fields;
  j["command"] = "model";
  j["kernel"] = std::string(to_string(cfg.kernel));
  j["variant"] = std::string(to_string(cfg.variant));
  j["tpg"] = cfg.threads_per_group;
  j["nt_stores"] = cfg.nt_stores;
  j["bandwidth"] = model.bandwidth;
  j["bytes_per_lup"] = model.bytes_per_lup;
  j["bytes_source"] = source;
  j["p0_lups"] = model.p0;
  j["p0_mlups"] = model.p0 / 1e6;
  j["args"] = join_args(to_args(cfg));
  emit(cfg, out, {rec}, false);
  return kSuccess;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  RunConfig cfg;
  try {
    std::string help;
    cfg = parse_run_config(args, &help);
    if (cfg.command.empty()) {
      out << help;
      return kSuccess;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.message << "\nRun with --help for options.\n";
    return e.exit_code;
  }

  try {
    const auto verbatim = join_args(args);
    if (cfg.command == "bench") return cmd_bench(cfg, verbatim, out, err);
    if (cfg.command == "verify") return cmd_verify(cfg, out, err);
    if (cfg.command == "stream") return cmd_stream(cfg, out);
    if (cfg.command == "topo") return cmd_topo(cfg, out);
    if (cfg.command == "model") return cmd_model(cfg, out);
    err << "unknown command " << cfg.command << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.message << '\n';
    return e.exit_code;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace stencilwave::cli
