#pragma once

// Comparison strategies: centralized VRP replanning (CTR), Voronoi
// partition plus per-robot TSP (MTSP) and greedy utility assignment (GRE).

#include <optional>
#include <vector>

#include "mrx/planner.hpp"
#include "mrx/world.hpp"

namespace mrx {

/// Owner robot of every region: each cell goes to its nearest robot
/// (Euclidean, ties to the lower id) and a region goes to the robot owning
/// most of its cells among the robots with a finite cost to reach it (ties
/// to the lower id). -1 when no robot can reach the region.
std::vector<int> region_owners(const OccupancyGrid& map, const RegionGraph& graph, std::span<const Point2> robots,
                               const CostMatrix& matrix);

/// Unknown area (m^2) inside the sensor disk around `p`.
double unknown_gain(const OccupancyGrid& map, Point2 p, double radius);

struct GreedyCandidate {
  Point2 position;
  double gain = 0.0;           // m^2
  std::vector<double> travel;  // per robot, +inf when unreachable
};

/// Greedy assignment by utility alpha * gain - beta * travel. The best
/// robot/candidate pair is fixed first (ties to the lower robot, then the
/// lower candidate) and the gain of every candidate within the discount
/// radius of a chosen point is scaled by gamma. `active` selects the robots
/// to assign; `taken` lists points already held by other robots, which
/// discount their surroundings too. Returns a candidate index or -1 per robot.
std::vector<int> greedy_assign(std::vector<GreedyCandidate> candidates, const std::vector<bool>& active,
                               std::span<const Point2> taken, const GreedyConfig& cfg);

/// Shared goal bookkeeping: one navigation goal per robot, replanned when a
/// robot arrives or after the idle retry period.
class GoalStrategy : public Strategy {
 public:
  explicit GoalStrategy(const ScenarioConfig& cfg);

  void begin(World& w) override;
  void after_motion(World& w) override;
  bool planning() const override { return false; }
  bool holds_work(int robot) const override { return goals_[static_cast<std::size_t>(robot)].has_value(); }
  int plans() const override { return plans_; }

 protected:
  /// Computes goals for the robots in `active`; others keep theirs.
  virtual std::vector<std::optional<Point2>> plan(World& w, const std::vector<bool>& active) = 0;
  /// Assigns the planned goals and logs them.
  void apply(World& w, const std::vector<std::optional<Point2>>& goals, const std::vector<bool>& active);
  /// Clears the goals of robots that finished their path and returns the
  /// robots needing a plan this tick (all false when none is due).
  std::vector<bool> due(World& w);
  /// True when replanning covers every robot, not only the ones without work.
  virtual bool replan_all() const { return true; }

  ScenarioConfig cfg_;
  PlannerConfig planner_;
  std::vector<std::optional<Point2>> goals_;
  long last_plan_ = 0;
  int plans_ = 0;
};

class CtrStrategy : public GoalStrategy {
 public:
  using GoalStrategy::GoalStrategy;
  void begin(World& w) override;
  void after_motion(World& w) override;
  bool planning() const override { return pending_.has_value(); }

 protected:
  std::vector<std::optional<Point2>> plan(World& w, const std::vector<bool>& active) override;

 private:
  void start(World& w, const std::vector<bool>& active);
  std::optional<std::vector<std::optional<Point2>>> pending_;
  std::vector<bool> pending_active_;
  long ready_at_ = 0;
};

class MtspStrategy : public GoalStrategy {
 public:
  using GoalStrategy::GoalStrategy;

 protected:
  std::vector<std::optional<Point2>> plan(World& w, const std::vector<bool>& active) override;
};

class GreStrategy : public GoalStrategy {
 public:
  using GoalStrategy::GoalStrategy;

 protected:
  std::vector<std::optional<Point2>> plan(World& w, const std::vector<bool>& active) override;
  bool replan_all() const override { return false; }
};

}  // namespace mrx
