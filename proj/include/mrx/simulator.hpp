#pragma once

// Grid navigation, the discrete-time simulation loop and run metrics.

#include <functional>
#include <string>
#include <vector>

#include "mrx/gridmap.hpp"
#include "mrx/world.hpp"

namespace mrx {

/// Shortest 8-connected path over Free cells of `grid` (no corner cutting),
/// as metric positions from `from` to `to`. Empty when no path exists.
/// Throws std::invalid_argument when either end is outside the grid.
std::vector<Point2> astar_path(const OccupancyGrid& grid, Point2 from, Point2 to);

/// Length of a polyline.
double path_length(const std::vector<Point2>& path);

/// Free start positions near the lower-left corner, 1 m apart.
std::vector<Point2> default_starts(const OccupancyGrid& grid, int robots);

struct Metrics {
  bool complete = false;
  double aet = 0.0;  // s
  double adt = 0.0;  // m
  double aor = 1.0;
  double coverage = 0.0;
  long ticks = 0;
  long idle_while_planning = 0;  // robot-ticks
  int plans = 0;
  std::vector<double> odometers;
  std::vector<double> credits;  // m^2
  std::vector<double> curve;    // union explored area per tick, m^2
};

struct RunResult {
  Metrics metrics;
  std::string log;
};

/// Called once after the strategy starts and after each tick; return false
/// to stop early.
using TickObserver = std::function<bool(const World&, const Strategy&)>;

RunResult run(const GroundTruth& truth, const ScenarioConfig& cfg, const TickObserver& observer = {});

/// The CONFIG line written at the top of every event log.
std::string config_line(const ScenarioConfig& cfg);

/// CSV header and row for a run: scenario,strategy,robots,seed,complete,aet,adt,aor,coverage.
std::string metrics_csv_header();
std::string metrics_csv_row(const ScenarioConfig& cfg, const Metrics& m);

}  // namespace mrx
