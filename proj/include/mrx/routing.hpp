#pragma once

// Open VRP modelling on top of a RegionGraph: workload folding, the
// robot-augmented cost matrix, exact and heuristic solvers, guide paths.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrx/perception.hpp"
#include "mrx/regiongraph.hpp"

namespace mrx {

/// Region-to-region costs with the vertex workloads spread onto the edges:
/// d*_ij = (w_i + w_j) / 2 + d_ij. A distinct type so a folded graph cannot
/// be folded a second time.
class FoldedEdges {
 public:
  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

 private:
  friend FoldedEdges fold_weights(const RegionGraph& g);
  std::size_t n_ = 0;
  std::vector<double> d_;
};

FoldedEdges fold_weights(const RegionGraph& g);

/// (robots + regions)^2 matrix, robots first. Region-to-robot and
/// robot-to-robot entries are zero, which turns the VRP into an open one.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t robots, std::size_t regions);

  std::size_t robots() const { return robots_; }
  std::size_t regions() const { return regions_; }
  std::size_t size() const { return robots_ + regions_; }
  double at(std::size_t from, std::size_t to) const { return d_[from * size() + to]; }
  void set(std::size_t from, std::size_t to, double v) { d_[from * size() + to] = v; }

  /// Region index -> matrix index.
  std::size_t region_node(std::size_t region) const { return robots_ + region; }

  /// Cost of robot -> seq[0] -> ... -> seq.back(); 0 for an empty route.
  double route_cost(std::size_t robot, std::span<const int> seq) const;

  /// Keeps one robot row/column and all regions.
  CostMatrix single_robot(std::size_t robot) const;

  /// Header "from,to_0,...", one row per node, "inf" for +infinity.
  std::string to_csv() const;

 private:
  std::size_t robots_ = 0;
  std::size_t regions_ = 0;
  std::vector<double> d_;
};

struct RobotAnchor {
  Point2 position;
  int rrg_vertex = -1;
};

/// robot -> region: RRG distance to the viewpoint plus half the region
/// workload; region -> region: folded cost; everything into a robot: 0.
CostMatrix build_matrix(const RegionGraph& g, std::span<const RobotAnchor> robots,
                        const RrgDistance& rrg_distance);

enum class Objective { MinMax, Total };
enum class SolveMode { Exact, Heuristic };

struct SolverOptions {
  SolveMode mode = SolveMode::Heuristic;
  Objective objective = Objective::MinMax;
  /// Search budget. Converted to a deterministic count of move
  /// evaluations so that results do not depend on machine speed.
  double time_budget_ms = 100.0;
  std::uint64_t seed = 1;
  int restarts = 8;
};

struct RoutePlan {
  std::vector<std::vector<int>> routes;  // per robot, region indices
  std::vector<double> route_costs;
  double objective = 0.0;  // max route cost (MinMax) or sum (Total)
  double total = 0.0;
};

/// Thrown when some region cannot be reached from any robot.
class UnreachableRegions : public std::runtime_error {
 public:
  explicit UnreachableRegions(std::vector<int> ids);
  const std::vector<int>& ids() const { return ids_; }

 private:
  std::vector<int> ids_;
};

/// Largest instance the exact solver accepts.
inline constexpr std::size_t kExactMaxRegions = 12;

RoutePlan solve_vrp(const CostMatrix& matrix, const SolverOptions& opts = {});

/// Open-path TSP from the single robot of `matrix`: Held-Karp up to 15
/// regions, otherwise the VRP heuristic.
std::vector<int> solve_tsp(const CostMatrix& matrix, const SolverOptions& opts = {});

/// Evaluates a plan under an objective (used by solvers and tests).
RoutePlan evaluate_plan(const CostMatrix& matrix, std::vector<std::vector<int>> routes,
                        Objective objective);

/// RRG shortest path from the robot vertex to the first region's viewpoint.
/// Throws std::runtime_error when disconnected, std::invalid_argument on an
/// empty sequence.
std::vector<Point2> guide_path(std::span<const int> sequence, const RegionGraph& g, const Rrg& rrg,
                               int robot_vertex);

}  // namespace mrx
