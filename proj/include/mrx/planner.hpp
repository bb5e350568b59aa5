#pragma once

// The perception -> region graph -> cost matrix pipeline shared by the
// hierarchical center and client nodes and by the baselines.

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mrx/perception.hpp"
#include "mrx/regiongraph.hpp"
#include "mrx/routing.hpp"

namespace mrx {

struct PlannerConfig {
  SamplingConfig sampling;
  RrgGrowthConfig growth;
  double sensor_radius = 6.0;
  /// Viewpoints are scored on frontier cells within sensor_radius - margin,
  /// so that the unknown neighbors of a scored cell are still in range.
  double view_margin = 0.5;
  double snap_radius = 1.0;
  SolverOptions solver;
  bool grow_roadmap = true;
};

struct PlanningInputs {
  const OccupancyGrid* map = nullptr;
  const RoiMask* roi = nullptr;
  std::vector<Point2> robots;
  WorkloadStats stats;
  std::uint64_t seed = 0;
};

/// Frontiers, viewpoints and RRG distances for one planning round.
struct PerceptionSnapshot {
  /// The persistent roadmap plus this round's robot and viewpoint vertices.
  Rrg roadmap;
  std::vector<Frontier> frontiers;  // all detected frontiers
  std::vector<Frontier> surviving;  // with a viewpoint reachable by some robot
  std::vector<Viewpoint> viewpoints;
  std::vector<int> robot_vertices;  // -1 when a robot could not be anchored
  std::vector<ShortestPathTree> trees;
  std::unordered_map<int, std::size_t> tree_of;

  bool complete() const { return frontiers.empty(); }
  /// RRG distance between two vertices, at least one of which is a tree
  /// source (robot or viewpoint vertex).
  double distance(int a, int b) const;
  RrgDistance distance_fn() const;
  std::vector<Point2> path(int from, int to) const;
};

/// Grows the persistent roadmap, then anchors robots and samples viewpoints
/// on a working copy so that per-round vertices do not accumulate.
PerceptionSnapshot perceive(Rrg& rrg, const PlanningInputs& in, const PlannerConfig& cfg);

/// Region graph plus the robot-augmented cost matrix over a snapshot.
struct RegionModel {
  RegionGraph graph;
  CostMatrix matrix;
};

RegionModel build_model(const PerceptionSnapshot& snap, const PlanningInputs& in, const PlannerConfig& cfg);

struct VrpOutcome {
  RoutePlan plan;
  std::vector<std::vector<Point2>> guide_paths;  // nonempty iff the route is
};

/// Solves the VRP on the model; regions unreachable from every robot are
/// left out of the plan.
VrpOutcome plan_routes(const PerceptionSnapshot& snap, const RegionModel& model, const SolverOptions& opts);

/// Navigation goal for visiting a region: its viewpoint, or the closest
/// frontier cell when the robot already stands on the viewpoint.
Point2 region_goal(const RegionVertex& v, const OccupancyGrid& map, Point2 robot);

/// Cost matrix restricted to one robot and a subset of regions.
CostMatrix sub_matrix(const CostMatrix& m, std::size_t robot, std::span<const int> regions);

}  // namespace mrx
