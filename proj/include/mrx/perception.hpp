#pragma once

// Frontier detection and clustering, the rapidly-exploring random graph
// (RRG) over traversable space, viewpoint sampling and RRG shortest paths.

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mrx/gridmap.hpp"
#include "mrx/random.hpp"

namespace mrx {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Frontier {
  int id = 0;
  std::vector<CellIndex> cells;  // ascending
  Point2 centroid;
};

struct SamplingConfig {
  int max_iterations = 30;
  double sampling_radius = 6.0;
  double fov_threshold = 0.3;
  double connect_radius = 5.0;
  double sensor_radius = 6.0;

  void validate() const;
};

/// Parameters of the incremental roadmap growth between plans.
struct RrgGrowthConfig {
  int samples = 150;
  double step = 3.0;
  double min_spacing = 1.5;
  double connect_radius = 5.0;
};

/// Undirected roadmap over free space. Vertices are never removed.
class Rrg {
 public:
  struct Edge {
    int to = 0;
    double length = 0.0;
  };

  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }
  Point2 vertex(int v) const { return vertices_.at(static_cast<std::size_t>(v)); }
  std::span<const Point2> vertices() const { return vertices_; }
  const std::vector<Edge>& neighbors(int v) const { return adjacency_.at(static_cast<std::size_t>(v)); }
  std::size_t edge_count() const { return edge_count_; }

  int add_vertex(Point2 p);
  /// No-op when the edge already exists or a == b.
  void add_edge(int a, int b);
  bool has_edge(int a, int b) const;

  /// Vertex ids within radius of p, ascending.
  std::vector<int> within(Point2 p, double radius) const;
  std::optional<int> nearest(Point2 p) const;

  /// Line-oriented dump: "V id x y" lines, then "E a b length" lines (a < b).
  std::string dump() const;
  static Rrg parse(std::string_view text);

 private:
  static constexpr double kBucket = 2.5;
  long long bucket_key(int bx, int by) const { return (static_cast<long long>(bx) << 32) ^ static_cast<unsigned>(by); }

  std::vector<Point2> vertices_;
  std::vector<std::vector<Edge>> adjacency_;
  std::unordered_map<long long, std::vector<int>> buckets_;
  std::size_t edge_count_ = 0;
};

/// Free cells with an 8-neighbor that is Unknown and inside roi, grouped
/// into 8-connected components and split until each cluster's diameter is
/// at most sensor_radius. Ordered and numbered by smallest cell index.
std::vector<Frontier> detect_frontiers(const OccupancyGrid& grid, const RoiMask& roi,
                                       double sensor_radius);

/// Fraction of frontier cells within radius of point and in line of sight.
double fov(Point2 point, const Frontier& frontier, const OccupancyGrid& grid, double radius);

/// Adds p with edges to every vertex within connect_radius reachable by a
/// free straight segment. Fails (returns nullopt, graph unchanged) when the
/// graph is non-empty and no such edge exists.
std::optional<int> rrg_connect(Rrg& rrg, Point2 p, const OccupancyGrid& grid, double connect_radius);

/// Returns an existing vertex within snap_radius in line of sight, else
/// falls back to rrg_connect.
std::optional<int> rrg_snap_or_connect(Rrg& rrg, Point2 p, const OccupancyGrid& grid,
                                       double snap_radius, double connect_radius);

/// Joins p to the closest vertex along a shortest free-cell path, adding
/// waypoint vertices wherever the straight segment would leave free space.
/// Returns nullopt (graph unchanged) when no vertex is reachable.
std::optional<int> rrg_connect_via_grid(Rrg& rrg, Point2 p, const OccupancyGrid& grid);

/// Random roadmap growth: sample accessible cells, steer from the nearest
/// vertex, keep vertices at least min_spacing apart.
void grow_rrg(Rrg& rrg, const OccupancyGrid& grid, std::span<const std::uint8_t> accessible,
              const RrgGrowthConfig& cfg, Rng& rng);

struct Viewpoint {
  int frontier_id = 0;
  Point2 position;
  double fov_score = 0.0;
  int rrg_vertex = -1;
};

struct ViewpointSampling {
  std::vector<Viewpoint> viewpoints;
  std::vector<Frontier> surviving;  // same order as viewpoints
};

/// Viewpoint selection per frontier. `accessible` marks cells a robot can
/// reach; when empty, accessibility is the free component of the RRG
/// vertices (any free cell if the RRG is empty).
ViewpointSampling sample_viewpoints(std::span<const Frontier> frontiers, const OccupancyGrid& grid,
                                    Rrg& rrg, const SamplingConfig& cfg, std::uint64_t rng_seed,
                                    std::span<const std::uint8_t> accessible = {});

/// Dense all-pairs distance table, +inf for disconnected pairs.
class DistanceTable {
 public:
  DistanceTable() = default;
  explicit DistanceTable(std::size_t n) : n_(n), d_(n * n, kInfinity) {}
  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  double& at(std::size_t i, std::size_t j) { return d_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

/// Directed weighted graph used by the generic Johnson implementation.
struct WeightedDigraph {
  struct Arc {
    int to = 0;
    double weight = 0.0;
  };
  std::vector<std::vector<Arc>> arcs;
};

/// Johnson's algorithm: Bellman-Ford potentials, reweighting, Dijkstra from
/// every source. nullopt on a negative cycle.
std::optional<DistanceTable> johnson(const WeightedDigraph& g);

DistanceTable johnson_all_pairs(const Rrg& rrg);

/// Single-source shortest path tree on the RRG.
struct ShortestPathTree {
  int source = -1;
  std::vector<double> dist;
  std::vector<int> pred;

  /// Vertex ids from source to target; empty when unreachable.
  std::vector<int> vertex_path(int target) const;
};

ShortestPathTree dijkstra(const Rrg& rrg, int source);

/// One tree per source, sharing a single adjacency build.
std::vector<ShortestPathTree> dijkstra_many(const Rrg& rrg, std::span<const int> sources);

/// Positions along a minimum-length path; empty when disconnected. Throws
/// std::out_of_range for unknown vertices.
std::vector<Point2> shortest_path(const Rrg& rrg, int from, int to);

}  // namespace mrx
