#pragma once

// Batch runs over an ExperimentSpec and their CSV summary.

#include <functional>
#include <string>
#include <vector>

#include "mrx/config.hpp"
#include "mrx/simulator.hpp"

namespace mrx {

struct RunRecord {
  std::string scenario;  // map file stem
  ScenarioConfig config;
  Metrics metrics;
  std::string log;
};

struct Aggregate {
  std::string scenario;
  StrategyKind strategy = StrategyKind::Hierarchical;
  int robots = 0;
  int runs = 0;
  int completed = 0;
  double aet = 0.0;
  double adt = 0.0;
  double aor = 0.0;
  double coverage = 0.0;
};

/// "grid" for "maps/grid.map".
std::string scenario_name(const std::string& map_path);

/// Loads a map file, or generates the bundled map when `path` names a map
/// kind ("empty", "grid", "random", "campus") and no such file exists.
GroundTruth load_or_generate(const std::string& path, double resolution);

/// Pinned generator seed of the bundled maps.
inline constexpr std::uint64_t kBundledMapSeed = 7;

using RunCallback = std::function<void(const RunRecord&, std::size_t done, std::size_t total)>;

/// Loads every referenced map first (throws ConfigError naming the first
/// missing one), then runs all combinations on up to `jobs` threads.
/// Records come back in spec order regardless of completion order; the
/// callback is serialized.
std::vector<RunRecord> run_experiments(const ExperimentSpec& spec, int jobs, const RunCallback& progress = {});

/// Means per (scenario, strategy, robots), in first-appearance order.
std::vector<Aggregate> aggregate(const std::vector<RunRecord>& records);

/// Columns: row,scenario,strategy,robots,seed,complete,aet,adt,aor,coverage.
/// Run rows have row=run. Aggregate rows have row=mean, seed = run count,
/// complete = completed run count.
std::string experiment_csv_header();
std::string experiment_csv(const std::vector<RunRecord>& records, const std::vector<Aggregate>& aggregates);

}  // namespace mrx
