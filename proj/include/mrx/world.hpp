#pragma once

// Simulated world state shared by the simulator loop and the strategies
// that drive the robots.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrx/gridmap.hpp"
#include "mrx/perception.hpp"
#include "mrx/planner.hpp"
#include "mrx/regiongraph.hpp"
#include "mrx/routing.hpp"

namespace mrx {

enum class StrategyKind { Hierarchical, Ctr, Mtsp, Gre };

std::string_view to_string(StrategyKind k);
/// Accepts "hierarchical", "ctr", "mtsp", "gre" (case-insensitive).
std::optional<StrategyKind> parse_strategy(std::string_view s);

struct GreedyConfig {
  double alpha = 1.0;     // utility per m^2 of unknown area around a point
  double beta = 1.0;      // utility per meter of travel
  double gamma = 0.3;     // gain discount near assigned points
  double discount_radius = 6.0;
};

struct ScenarioConfig {
  std::string map_name;  // informational; the grid is passed separately
  int robots = 1;
  std::vector<Point2> starts;  // empty: default placement
  double robot_speed = 1.0;
  double sensor_radius = 6.0;
  double tick = 0.1;
  StrategyKind strategy = StrategyKind::Hierarchical;
  std::uint64_t seed = 1;
  double center_latency = 0.3;
  double message_latency = 0.0;
  double solver_budget_ms = 100.0;
  Objective objective = Objective::MinMax;
  double w_threshold = 120.0;
  double progress_period = 1.0;
  double time_cap = 3000.0;
  /// Seconds without any robot holding work before a strategy replans.
  double idle_retry = 2.0;
  SamplingConfig sampling;
  RrgGrowthConfig growth;
  GreedyConfig greedy;

  /// Throws std::invalid_argument on non-positive physical quantities.
  void validate() const;
  PlannerConfig planner() const;
};

struct RobotSim {
  int id = 0;
  Pose pose;
  std::vector<Point2> path;
  std::size_t next = 0;  // index of the next waypoint
  double odometer = 0.0;
  double credit = 0.0;  // m^2 of cells this robot revealed
  bool moved = false;   // displacement during the current tick
  bool arrived = false; // finished its path during the current tick
  bool frozen = false;

  bool has_path() const { return next < path.size(); }
};

/// Line-oriented event log: "<time> <node> <EVENT> [fields]".
class EventLog {
 public:
  void header(std::string line) { lines_.insert(lines_.begin(), std::move(line)); }
  void add(long tick, double dt, std::string_view node, std::string_view event, std::string_view fields = {});
  const std::vector<std::string>& lines() const { return lines_; }
  std::string text() const;

 private:
  std::vector<std::string> lines_;
};

/// Regions, routes and roadmap of the most recent global plan, for rendering.
struct PlanView {
  std::vector<RegionVertex> regions;
  std::vector<std::vector<int>> routes;
  std::vector<Point2> robots;
};

class World {
 public:
  World(const GroundTruth& truth, const ScenarioConfig& cfg);

  const GroundTruth& truth() const { return *truth_; }
  const ScenarioConfig& config() const { return cfg_; }
  const OccupancyGrid& known() const { return known_; }
  Rrg& rrg() { return rrg_; }
  const Rrg& rrg() const { return rrg_; }
  std::vector<RobotSim>& robots() { return robots_; }
  const std::vector<RobotSim>& robots() const { return robots_; }
  std::vector<Point2> positions() const;

  long tick() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * cfg_.tick; }
  long ticks_for(double seconds) const;

  EventLog& log() { return log_; }
  void event(std::string_view node, std::string_view ev, std::string_view fields = {}) {
    log_.add(tick_, cfg_.tick, node, ev, fields);
  }
  static std::string robot_node(int id) { return "robot" + std::to_string(id); }

  /// Area revealed after the initial scan (m^2) and robot odometers.
  WorkloadStats stats() const;
  double cell_area() const { return known_.resolution() * known_.resolution(); }

  /// Plans an A* path on the known map and assigns it. False when no path.
  bool navigate(int robot, Point2 goal);
  void set_path(int robot, std::vector<Point2> path);
  void stop(int robot);

  /// Unique seed for the n-th planning call of this run.
  std::uint64_t next_seed() { return cfg_.seed * 1000003ULL + planning_calls_++; }

  PlanView& plan_view() { return plan_view_; }
  const PlanView& plan_view() const { return plan_view_; }

  // Simulator internals.
  void advance_tick() { ++tick_; }
  void move_robots();
  /// Reveals around every robot; returns the number of cells revealed.
  std::size_t sense();
  bool complete() const { return observed_ == observable_; }
  double coverage() const;
  double union_area() const { return static_cast<double>(revealed_) * cell_area(); }
  std::size_t revealed_cells() const { return revealed_; }

 private:
  const GroundTruth* truth_;
  ScenarioConfig cfg_;
  OccupancyGrid known_;
  Rrg rrg_;
  std::vector<RobotSim> robots_;
  std::vector<std::optional<Point2>> last_sensed_;
  long tick_ = 0;
  EventLog log_;
  std::size_t revealed_ = 0;
  std::size_t initial_revealed_ = 0;
  std::size_t observed_ = 0;
  std::size_t observable_ = 0;
  std::uint64_t planning_calls_ = 0;
  bool initial_done_ = false;
  PlanView plan_view_;
};

/// Drives the robots. The simulator calls begin() once at t = 0, then per
/// tick before_motion() (message delivery) and after_motion() (callbacks
/// and planning countdowns).
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual void begin(World& w) = 0;
  virtual void before_motion(World& w) { (void)w; }
  virtual void after_motion(World& w) = 0;
  /// True while a central planner is computing a plan.
  virtual bool planning() const = 0;
  /// True when the robot has assigned, unfinished work.
  virtual bool holds_work(int robot) const = 0;
  virtual int plans() const = 0;
};

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const ScenarioConfig& cfg);

}  // namespace mrx
