#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <sstream>

#include "cli.hpp"
#include "stencilwave/error.hpp"

namespace stencilwave::cli {

namespace {

// Text form of every option before conversion to typed fields.
struct RawOptions {
  std::string kernel;
  std::string variant;
  std::string size;
  std::string barrier = "auto";
  std::string oracle_kernel;
  std::vector<std::string> variants;
  std::uint64_t elements = 0;
  bool no_nt = false;
  double ms = 0.0;
  double bytes = 0.0;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void add_plan_options(CLI::App* app, RunConfig& cfg, RawOptions& raw) {
  app->add_option("--kernel", raw.kernel,
                  "jacobi, gs-naive (alias gs) or gs-interleaved")
      ->capture_default_str();
  app->add_option("--variant", raw.variant,
                  "serial, threaded, pipeline or wavefront")
      ->capture_default_str();
  app->add_option("--size", raw.size, "Interior extent NIxNJxNK")
      ->capture_default_str();
  app->add_option("--iters", cfg.iterations, "Sweeps per run")
      ->capture_default_str();
  app->add_option("--groups", cfg.groups, "Wavefront thread groups N")
      ->capture_default_str();
  app->add_option("--tpg", cfg.threads_per_group,
                  "Threads per group t, also the temporal blocking factor")
      ->capture_default_str();
  app->add_option("--blocks", cfg.blocks,
                  "Wavefront j-blocks B; 0 sizes blocks to the cache")
      ->capture_default_str();
  app->add_option("--threads", cfg.threads,
                  "Team size P of the threaded and pipeline variants")
      ->capture_default_str();
  app->add_flag("--smt", cfg.smt, "Place consecutive ranks on SMT siblings");
  app->add_option("--barrier", raw.barrier,
                  "central, tree, or auto (by team size and cores)")
      ->capture_default_str();
  app->add_option("--pinning", cfg.pinning,
                  "auto, none, or a cpu list such as 0-3,8")
      ->capture_default_str();
  app->add_flag("--nt-stores", cfg.nt_stores,
                "Non-temporal stores for Jacobi writes to the grid");
  app->add_option("--seed", cfg.seed, "Seed of the random initial grid")
      ->capture_default_str();
}

void add_output_options(CLI::App* app, RunConfig& cfg) {
  app->add_option("--output,-o", cfg.output, "Result file; stdout when empty");
  app->add_option("--format", cfg.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

void add_timing_options(CLI::App* app, RunConfig& cfg) {
  app->add_option("--reps", cfg.repetitions, "Timed repetitions")
      ->capture_default_str();
  app->add_option("--warmup", cfg.warmup, "Untimed warmup runs")
      ->capture_default_str();
}

template <typename F>
auto convert(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw UsageError{what + ": " + e.what()};
  }
}

}  // namespace

Extent parse_extent(const std::string& text) {
  Extent e;
  Index* parts[] = {&e.ni, &e.nj, &e.nk};
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int d = 0; d < 3; ++d) {
    auto [next, ec] = std::from_chars(p, end, *parts[d]);
    if (ec != std::errc{}) break;
    p = next;
    if (d == 2) {
      if (p == end) return e;
      break;
    }
    if (p == end || (*p != 'x' && *p != 'X')) break;
    ++p;
  }
  fail(ErrorCode::config, "size must look like NIxNJxNK, got '" + text + "'");
}

std::string format_extent(const Extent& e) {
  return std::to_string(e.ni) + "x" + std::to_string(e.nj) + "x" +
         std::to_string(e.nk);
}

RunConfig parse_run_config(const std::vector<std::string>& args,
                           std::string* help) {
  RunConfig cfg;
  RawOptions raw;
  raw.kernel = std::string(to_string(cfg.kernel));
  raw.variant = std::string(to_string(cfg.variant));
  raw.size = format_extent(cfg.size);

  CLI::App app{"Wavefront temporal-blocking stencil benchmark harness",
               "stencilwave"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "Time a sweep plan and report MLUP/s");
  add_plan_options(bench, cfg, raw);
  add_timing_options(bench, cfg);
  add_output_options(bench, cfg);
  bench->add_flag("--verify", cfg.verify,
                  "Compare the last repetition with the serial oracle");
  bench->add_option("--ms", raw.ms,
                    "Memory bandwidth in B/s for the predicted ceiling; "
                    "measured with a short triad when absent");
  bench->add_flag("--matrix", cfg.matrix,
                  "Sweep sizes x variants x t and emit one record each");
  bench->add_option("--sizes", cfg.matrix_sizes, "Matrix sizes")
      ->delimiter(',');
  bench->add_option("--variants", raw.variants, "Matrix variants")
      ->delimiter(',');
  bench->add_option("--t-values", cfg.matrix_t,
                    "Matrix threads per group for the wavefront variant")
      ->delimiter(',');

  auto* verify = app.add_subcommand(
      "verify", "Run a plan and the serial oracle; exit 1 unless bitwise equal");
  add_plan_options(verify, cfg, raw);
  add_output_options(verify, cfg);
  verify->add_option("--oracle-kernel", raw.oracle_kernel,
                     "Kernel of the serial oracle; defaults to --kernel");
  verify->add_option("--dump", cfg.dump,
                     "Write the result grid as a binary dump");

  auto* stream = app.add_subcommand("stream", "STREAM triad bandwidth");
  stream->add_option("--threads", cfg.threads, "Team size")
      ->capture_default_str();
  stream->add_option("--elements", raw.elements,
                     "Elements per array; sized to defeat the cache when absent");
  stream->add_flag("--no-nt", raw.no_nt, "Use ordinary stores");
  stream->add_option("--reps", cfg.repetitions, "Timed repetitions")
      ->capture_default_str();
  stream->add_option("--pinning", cfg.pinning, "auto, none, or a cpu list")
      ->capture_default_str();
  stream->add_flag("--smt", cfg.smt, "Place consecutive ranks on SMT siblings");
  add_output_options(stream, cfg);

  auto* topo = app.add_subcommand("topo", "Print the detected topology as JSON");
  topo->add_option("--output,-o", cfg.output, "Result file; stdout when empty");

  auto* model = app.add_subcommand("model", "Bandwidth-bound performance ceiling");
  model->add_option("--ms", raw.ms, "Memory bandwidth in B/s")->required();
  model->add_option("--bytes", raw.bytes,
                    "Bytes per lattice update; derived from the plan when absent");
  model->add_option("--kernel", raw.kernel, "Kernel for derived traffic")
      ->capture_default_str();
  model->add_option("--variant", raw.variant, "Variant for derived traffic")
      ->capture_default_str();
  model->add_option("--tpg", cfg.threads_per_group,
                    "Temporal blocking factor for derived traffic")
      ->capture_default_str();
  model->add_flag("--nt-stores", cfg.nt_stores, "Streaming stores");
  add_output_options(model, cfg);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream os;
    app.exit(e, os, os);
    if (help) *help = os.str();
    return RunConfig{};
  } catch (const CLI::CallForAllHelp& e) {
    std::ostringstream os;
    app.exit(e, os, os);
    if (help) *help = os.str();
    return RunConfig{};
  } catch (const CLI::ParseError& e) {
    throw UsageError{e.what()};
  }

  auto* chosen = app.get_subcommands().front();
  cfg.command = chosen->get_name();

  // Fields that belong to other subcommands keep their defaults so that
  // to_args round-trips.
  if (cfg.command == "bench" || cfg.command == "verify" ||
      cfg.command == "model") {
    cfg.kernel = convert("--kernel", [&] { return parse_kernel_kind(raw.kernel); });
    cfg.variant = convert("--variant", [&] { return parse_variant(raw.variant); });
  }
  if (cfg.command == "bench" || cfg.command == "verify") {
    if (cfg.command == "verify" && chosen->count("--size") == 0)
      raw.size = "34x34x34";
    cfg.size = convert("--size", [&] { return parse_extent(raw.size); });
    if (raw.barrier != "auto")
      cfg.barrier =
          convert("--barrier", [&] { return parse_barrier_kind(raw.barrier); });
  }
  if (cfg.command == "bench") {
    if (chosen->count("--ms")) cfg.bandwidth = raw.ms;
    for (const auto& v : raw.variants)
      cfg.matrix_variants.push_back(
          convert("--variants", [&] { return parse_variant(v); }));
    for (const auto& s : cfg.matrix_sizes)
      convert("--sizes", [&] { return parse_extent(s); });
  }
  if (cfg.command == "verify" && !raw.oracle_kernel.empty())
    cfg.oracle_kernel = convert("--oracle-kernel",
                                [&] { return parse_kernel_kind(raw.oracle_kernel); });
  if (cfg.command == "stream") {
    if (chosen->count("--elements")) cfg.elements = raw.elements;
    cfg.stream_nt = !raw.no_nt;
  }
  if (cfg.command == "model") {
    cfg.bandwidth = raw.ms;
    if (chosen->count("--bytes")) cfg.bytes_per_lup = raw.bytes;
  }
  return cfg;
}

std::vector<std::string> to_args(const RunConfig& cfg) {
  std::vector<std::string> a{cfg.command};
  auto opt = [&](const char* name, const std::string& value) {
    a.push_back(name);
    a.push_back(value);
  };
  auto flag = [&](const char* name, bool on) {
    if (on) a.push_back(name);
  };
  auto output = [&] {
    if (!cfg.output.empty()) opt("--output", cfg.output);
  };
  auto join = [](const auto& items, auto&& fmt) {
    std::string s;
    for (const auto& x : items) {
      if (!s.empty()) s += ',';
      s += fmt(x);
    }
    return s;
  };

  if (cfg.command == "bench" || cfg.command == "verify") {
    opt("--kernel", std::string(to_string(cfg.kernel)));
    opt("--variant", std::string(to_string(cfg.variant)));
    opt("--size", format_extent(cfg.size));
    opt("--iters", std::to_string(cfg.iterations));
    opt("--groups", std::to_string(cfg.groups));
    opt("--tpg", std::to_string(cfg.threads_per_group));
    opt("--blocks", std::to_string(cfg.blocks));
    opt("--threads", std::to_string(cfg.threads));
    flag("--smt", cfg.smt);
    opt("--barrier",
        cfg.barrier ? std::string(to_string(*cfg.barrier)) : std::string("auto"));
    opt("--pinning", cfg.pinning);
    flag("--nt-stores", cfg.nt_stores);
    opt("--seed", std::to_string(cfg.seed));
    output();
    opt("--format", cfg.format);
  }
  if (cfg.command == "bench") {
    opt("--reps", std::to_string(cfg.repetitions));
    opt("--warmup", std::to_string(cfg.warmup));
    flag("--verify", cfg.verify);
    if (cfg.bandwidth) opt("--ms", format_double(*cfg.bandwidth));
    flag("--matrix", cfg.matrix);
    if (!cfg.matrix_sizes.empty())
      opt("--sizes", join(cfg.matrix_sizes, [](const std::string& s) { return s; }));
    if (!cfg.matrix_variants.empty())
      opt("--variants", join(cfg.matrix_variants, [](Variant v) {
            return std::string(to_string(v));
          }));
    if (!cfg.matrix_t.empty())
      opt("--t-values", join(cfg.matrix_t, [](int t) { return std::to_string(t); }));
  }
  if (cfg.command == "verify") {
    if (cfg.oracle_kernel)
      opt("--oracle-kernel", std::string(to_string(*cfg.oracle_kernel)));
    if (!cfg.dump.empty()) opt("--dump", cfg.dump);
  }
  if (cfg.command == "stream") {
    opt("--threads", std::to_string(cfg.threads));
    if (cfg.elements) opt("--elements", std::to_string(*cfg.elements));
    flag("--no-nt", !cfg.stream_nt);
    opt("--reps", std::to_string(cfg.repetitions));
    opt("--pinning", cfg.pinning);
    flag("--smt", cfg.smt);
    output();
    opt("--format", cfg.format);
  }
  if (cfg.command == "topo") output();
  if (cfg.command == "model") {
    if (cfg.bandwidth) opt("--ms", format_double(*cfg.bandwidth));
    if (cfg.bytes_per_lup) opt("--bytes", format_double(*cfg.bytes_per_lup));
    opt("--kernel", std::string(to_string(cfg.kernel)));
    opt("--variant", std::string(to_string(cfg.variant)));
    opt("--tpg", std::to_string(cfg.threads_per_group));
    flag("--nt-stores", cfg.nt_stores);
    output();
    opt("--format", cfg.format);
  }
  return a;
}

std::string join_args(const std::vector<std::string>& args) {
  std::ostringstream os;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) os << ' ';
    os << args[i];
  }
  return os.str();
}

}  // namespace stencilwave::cli
