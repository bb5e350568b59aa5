// mrx: single runs, batch experiments, map generation and log replay.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "mrx/config.hpp"
#include "mrx/experiment.hpp"
#include "mrx/mapgen.hpp"
#include "mrx/render.hpp"
#include "mrx/simulator.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kIncomplete = 1;
constexpr int kConfigError = 2;

std::string default_out_dir() {
  const char* env = std::getenv("MRX_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : "out";
}

std::string frame_name(long tick) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%07ld.svg", tick);
  return buf;
}

// Observer writing an SVG every `every` seconds and at the final tick.
mrx::TickObserver frame_writer(const fs::path& dir, double every, const mrx::ScenarioConfig& cfg) {
  const long stride = std::max(1L, static_cast<long>(std::ceil(every / cfg.tick - 1e-9)));
  const long cap = static_cast<long>(std::ceil(cfg.time_cap / cfg.tick - 1e-9));
  return [=](const mrx::World& w, const mrx::Strategy&) {
    if (w.tick() % stride == 0 || w.complete() || w.tick() >= cap) {
      mrx::write_file((dir / frame_name(w.tick())).string(), mrx::render_snapshot(w));
    }
    return true;
  };
}

void print_summary(const mrx::ScenarioConfig& cfg, const mrx::Metrics& m) {
  std::printf("%s %s robots=%d seed=%llu complete=%d aet=%.1f adt=%.1f aor=%.3f coverage=%.4f plans=%d idle=%ld\n",
              mrx::scenario_name(cfg.map_name).c_str(), std::string(mrx::to_string(cfg.strategy)).c_str(),
              cfg.robots, static_cast<unsigned long long>(cfg.seed), m.complete ? 1 : 0, m.aet, m.adt, m.aor,
              m.coverage, m.plans, m.idle_while_planning);
}

struct ExploreArgs {
  std::string config;
  std::string map;
  int robots = 1;
  std::string strategy = "hierarchical";
  std::uint64_t seed = 1;
  std::string out;
  double snapshot_every = 0.0;
  double resolution = 0.1;
  double time_cap = 3000.0;
  double latency = 0.3;
};

int explore(const ExploreArgs& a, const CLI::App& cmd) {
  mrx::ScenarioConfig cfg;
  double resolution = a.resolution;
  std::string map = a.map;
  if (!a.config.empty()) {
    const auto file = mrx::parse_scenario(mrx::read_file(a.config));
    cfg = file.config;
    if (cmd.count("--resolution") == 0) resolution = file.resolution;
    if (map.empty()) {
      map = file.map_path;
      if (fs::path(map).is_relative() && !fs::exists(map)) {
        const fs::path beside = fs::path(a.config).parent_path() / map;
        if (fs::exists(beside)) map = beside.string();
      }
    }
  }
  if (map.empty()) throw mrx::ConfigError("--map or --config is required");
  cfg.map_name = map;
  if (a.config.empty() || cmd.count("--robots")) cfg.robots = a.robots;
  if (a.config.empty() || cmd.count("--seed")) cfg.seed = a.seed;
  if (a.config.empty() || cmd.count("--time-cap")) cfg.time_cap = a.time_cap;
  if (a.config.empty() || cmd.count("--latency")) cfg.center_latency = a.latency;
  if (a.config.empty() || cmd.count("--strategy")) {
    const auto k = mrx::parse_strategy(a.strategy);
    if (!k) throw mrx::ConfigError("unknown strategy '" + a.strategy + "'");
    cfg.strategy = *k;
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw mrx::ConfigError(e.what());
  }
  if (!(a.snapshot_every >= 0.0)) throw mrx::ConfigError("--snapshot-every must be non-negative");

  const mrx::GroundTruth truth = mrx::load_or_generate(map, resolution);
  const fs::path out = a.out.empty() ? fs::path(default_out_dir()) : fs::path(a.out);
  fs::create_directories(out);
  mrx::TickObserver observer;
  if (a.snapshot_every > 0.0) {
    fs::create_directories(out / "frames");
    observer = frame_writer(out / "frames", a.snapshot_every, cfg);
  }
  mrx::RunResult res;
  try {
    res = mrx::run(truth, cfg, observer);
  } catch (const std::invalid_argument& e) {
    throw mrx::ConfigError(e.what());
  }
  mrx::write_file((out / "events.log").string(), res.log);
  mrx::write_file((out / "metrics.csv").string(),
                  mrx::metrics_csv_header() + "\n" + mrx::metrics_csv_row(cfg, res.metrics) + "\n");
  print_summary(cfg, res.metrics);
  return res.metrics.complete ? kOk : kIncomplete;
}

int bench(const std::string& spec_path, std::optional<int> jobs, const std::string& out_arg, bool logs) {
  const mrx::ExperimentSpec spec = mrx::parse_experiment(mrx::read_file(spec_path));
  const fs::path out = !out_arg.empty()               ? fs::path(out_arg)
                       : !spec.output_dir.empty() ? fs::path(spec.output_dir)
                                                  : fs::path(default_out_dir());
  const int n = jobs.value_or(spec.jobs);
  if (n < 1) throw mrx::ConfigError("--jobs must be at least 1");
  const auto records = mrx::run_experiments(spec, n, [](const mrx::RunRecord& r, std::size_t done, std::size_t total) {
    std::fprintf(stderr, "[%zu/%zu] ", done, total);
    std::fflush(stderr);
    print_summary(r.config, r.metrics);
    std::fflush(stdout);
  });
  fs::create_directories(out);
  const auto aggregates = mrx::aggregate(records);
  mrx::write_file((out / "results.csv").string(), mrx::experiment_csv(records, aggregates));
  if (logs) {
    fs::create_directories(out / "logs");
    for (const auto& r : records) {
      const std::string name = r.scenario + "_" + std::string(mrx::to_string(r.config.strategy)) + "_r" +
                               std::to_string(r.config.robots) + "_s" + std::to_string(r.config.seed) + ".log";
      mrx::write_file((out / "logs" / name).string(), r.log);
    }
  }
  std::printf("wrote %s (%zu runs)\n", (out / "results.csv").string().c_str(), records.size());
  for (const auto& r : records) {
    if (!r.metrics.complete) return kIncomplete;
  }
  return kOk;
}

int genmap(const std::string& kind_name, std::uint64_t seed, const std::string& out_arg) {
  const auto kind = mrx::parse_map_kind(kind_name);
  if (!kind) throw mrx::ConfigError("unknown map kind '" + kind_name + "'");
  const mrx::OccupancyGrid g = mrx::generate_map(*kind, seed);
  fs::path out = out_arg.empty() ? fs::path(default_out_dir()) / (kind_name + ".map") : fs::path(out_arg);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  mrx::write_file(out.string(), mrx::to_map_text(g));
  std::printf("wrote %s (%dx%d cells, %zu obstacle)\n", out.string().c_str(), g.width(), g.height(),
              g.count(mrx::Cell::Obstacle));
  return kOk;
}

int render(const std::string& log_path, const std::string& map_arg, double every, double resolution,
           const std::string& out_arg) {
  const std::string text = mrx::read_file(log_path);
  const std::string first = text.substr(0, text.find('\n'));
  mrx::ScenarioConfig cfg = mrx::parse_config_line(first);
  const std::string map = map_arg.empty() ? cfg.map_name : map_arg;
  if (map.empty()) throw mrx::ConfigError("log does not name its map; pass --map");
  if (!(every > 0.0)) throw mrx::ConfigError("--every must be positive");
  const mrx::GroundTruth truth = mrx::load_or_generate(map, resolution);
  const fs::path out = out_arg.empty() ? fs::path(default_out_dir()) / "frames" : fs::path(out_arg);
  fs::create_directories(out);
  const auto res = mrx::run(truth, cfg, frame_writer(out, every, cfg));
  if (res.log != text) {
    std::fprintf(stderr, "replay diverged from %s; frames may not match the recorded run\n", log_path.c_str());
    return kConfigError;
  }
  std::printf("replayed %s into %s\n", log_path.c_str(), out.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot exploration planner and simulator"};
  app.require_subcommand(1);

  ExploreArgs ex;
  auto* explore_cmd = app.add_subcommand("explore", "Run one exploration");
  explore_cmd->add_option("--config", ex.config, "Scenario file");
  explore_cmd->add_option("--map", ex.map, "Map file, or empty|grid|random|campus");
  explore_cmd->add_option("--robots", ex.robots, "Robot count");
  explore_cmd->add_option("--strategy", ex.strategy, "hierarchical|ctr|mtsp|gre");
  explore_cmd->add_option("--seed", ex.seed, "Random seed");
  explore_cmd->add_option("--out", ex.out, "Output directory (default $MRX_OUT_DIR or ./out)");
  explore_cmd->add_option("--snapshot-every", ex.snapshot_every, "Seconds between SVG frames, 0 for none");
  explore_cmd->add_option("--resolution", ex.resolution, "Map resolution in meters");
  explore_cmd->add_option("--time-cap", ex.time_cap, "Simulated seconds before giving up");
  explore_cmd->add_option("--latency", ex.latency, "Center planning latency in seconds");

  std::string spec_path;
  std::optional<int> jobs;
  std::string bench_out;
  bool bench_logs = false;
  auto* bench_cmd = app.add_subcommand("bench", "Run an experiment file");
  bench_cmd->add_option("spec", spec_path, "Experiment file")->required();
  bench_cmd->add_option("--jobs", jobs, "Parallel runs");
  bench_cmd->add_option("--out", bench_out, "Output directory");
  bench_cmd->add_flag("--logs", bench_logs, "Also write every event log");

  std::string kind;
  std::uint64_t map_seed = mrx::kBundledMapSeed;
  std::string map_out;
  auto* genmap_cmd = app.add_subcommand("genmap", "Generate a 50 m x 30 m map");
  genmap_cmd->add_option("kind", kind, "empty|grid|random|campus")->required();
  genmap_cmd->add_option("--seed", map_seed, "Generator seed");
  genmap_cmd->add_option("--out", map_out, "Output file");

  std::string log_path;
  std::string render_map;
  std::string render_out;
  double every = 10.0;
  double render_res = 0.1;
  auto* render_cmd = app.add_subcommand("render", "Replay an event log to SVG frames");
  render_cmd->add_option("log", log_path, "Event log")->required();
  render_cmd->add_option("--map", render_map, "Map file (default: the one named in the log)");
  render_cmd->add_option("--every", every, "Seconds between frames");
  render_cmd->add_option("--resolution", render_res, "Map resolution in meters");
  render_cmd->add_option("--out", render_out, "Frame directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*explore_cmd) return explore(ex, *explore_cmd);
    if (*bench_cmd) return bench(spec_path, jobs, bench_out, bench_logs);
    if (*genmap_cmd) return genmap(kind, map_seed, map_out);
    if (*render_cmd) return render(log_path, render_map, every, render_res, render_out);
  } catch (const mrx::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const mrx::FormatError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
  return kOk;
}
