#pragma once

// Voronoi-like partition of unexplored space around frontiers and the
// weighted RegionGraph built on top of it.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mrx/gridmap.hpp"
#include "mrx/perception.hpp"

namespace mrx {

/// Unknown cells assigned to one frontier.
struct RegionCells {
  int frontier_id = 0;
  std::vector<CellIndex> cells;  // ascending
};

/// Distance traveled and area explored so far; the ratio converts area into
/// expected travel.
struct WorkloadStats {
  std::vector<double> distances;  // per robot, meters
  double explored_area = 0.0;     // m^2

  double total_distance() const;
  std::size_t robot_count() const { return distances.size(); }
};

/// Assigns every Unknown cell inside roi to the frontier with the smallest
/// Euclidean cell-center distance (min over frontier cells); ties go to the
/// earlier frontier in the list. Regions come back in frontier order, empty
/// ones omitted.
std::vector<RegionCells> partition_regions(const OccupancyGrid& grid, const RoiMask& roi,
                                           std::span<const Frontier> frontiers);

/// Meters of travel per m^2 of exploration. Falls back to 1 / (2 r) while
/// nothing has been explored yet.
double workload_rate(const WorkloadStats& stats, double sensor_radius);

/// Expected travel to explore `area`.
double vertex_weight(const WorkloadStats& stats, double area, double sensor_radius);

/// Travel between two regions: 0 for direct transit, otherwise the RRG
/// distance between their viewpoints (+inf when disconnected).
inline double edge_weight(bool direct_transit, double viewpoint_distance) {
  return direct_transit ? 0.0 : viewpoint_distance;
}

/// Pairs (i, j), i < j, of regions whose cell sets touch (8-adjacency).
std::vector<std::pair<int, int>> adjacent_regions(const OccupancyGrid& grid,
                                                  std::span<const RegionCells> regions);

struct RegionVertex {
  int id = 0;
  std::vector<CellIndex> cells;
  double area = 0.0;
  Frontier frontier;
  Viewpoint viewpoint;
  double weight = 0.0;
};

struct RegionEdge {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

/// Complete graph over regions restricted to finite-weight pairs.
struct RegionGraph {
  std::vector<RegionVertex> vertices;
  std::vector<RegionEdge> edges;  // lexicographic (i, j), i < j
  std::vector<double> edge_matrix;  // n x n, +inf where no edge, 0 on the diagonal

  std::size_t size() const { return vertices.size(); }
  double edge(int i, int j) const { return edge_matrix[static_cast<std::size_t>(i) * size() + static_cast<std::size_t>(j)]; }
  double total_area() const;

  /// "VERTEX id frontier area weight vx vy" and "EDGE i j weight" lines.
  std::string dump() const;
};

/// Distance between two RRG vertices.
using RrgDistance = std::function<double(int, int)>;

/// Builds the graph over the surviving frontiers. `frontiers` and
/// `viewpoints` are parallel arrays.
RegionGraph build_region_graph(const OccupancyGrid& grid, const RoiMask& roi,
                               std::span<const Frontier> frontiers,
                               std::span<const Viewpoint> viewpoints, const RrgDistance& rrg_distance,
                               const WorkloadStats& stats, double sensor_radius);

}  // namespace mrx
