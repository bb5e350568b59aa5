#include "mrx/regiongraph.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

namespace mrx {

double WorkloadStats::total_distance() const {
  return std::accumulate(distances.begin(), distances.end(), 0.0);
}

namespace {

constexpr long long kFar = std::numeric_limits<long long>::max();

// Lower envelope of the parabolas (x - q)^2 + g[q] for the site columns q.
struct Envelope {
  std::vector<int> v;
  std::vector<double> z;

  void build(const std::vector<int>& cols, const std::vector<long long>& g) {
    v.assign(cols.size(), 0);
    z.assign(cols.size() + 1, 0.0);
    int k = -1;
    for (std::size_t idx = 0; idx < cols.size(); ++idx) {
      if (g[idx] == kFar) continue;
      const int q = cols[idx];
      const long long fq = g[idx] + static_cast<long long>(q) * q;
      if (k < 0) {
        k = 0;
        v[0] = static_cast<int>(idx);
        z[0] = -kInfinity;
        z[1] = kInfinity;
        continue;
      }
      double s = 0;
      for (;;) {
        const auto top = static_cast<std::size_t>(v[static_cast<std::size_t>(k)]);
        const int p = cols[top];
        const long long fp = g[top] + static_cast<long long>(p) * p;
        s = static_cast<double>(fq - fp) / static_cast<double>(2 * (q - p));
        if (s > z[static_cast<std::size_t>(k)]) break;
        --k;  // z[0] is -inf, so this stops at k == 0
      }
      ++k;
      v[static_cast<std::size_t>(k)] = static_cast<int>(idx);
      z[static_cast<std::size_t>(k)] = s;
      z[static_cast<std::size_t>(k) + 1] = kInfinity;
    }
    v.resize(static_cast<std::size_t>(k + 1));
    z.resize(static_cast<std::size_t>(k + 2));
  }
};

}  // namespace

std::vector<RegionCells> partition_regions(const OccupancyGrid& grid, const RoiMask& roi,
                                           std::span<const Frontier> frontiers) {
  if (!roi.matches(grid)) throw std::invalid_argument("roi does not match grid dimensions");
  if (frontiers.empty()) return {};

  int x0 = grid.width();
  int y0 = grid.height();
  int x1 = -1;
  int y1 = -1;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto i = static_cast<CellIndex>(k);
    if (grid.at(i) != Cell::Unknown || !roi.contains(i)) continue;
    const CellCoord c = grid.coord(i);
    x0 = std::min(x0, c.x);
    x1 = std::max(x1, c.x);
    y0 = std::min(y0, c.y);
    y1 = std::max(y1, c.y);
  }
  if (x1 < 0) return {};

  const int bw = x1 - x0 + 1;
  const int bh = y1 - y0 + 1;
  std::vector<long long> best(static_cast<std::size_t>(bw) * static_cast<std::size_t>(bh), kFar);
  std::vector<int> label(best.size(), -1);

  std::vector<std::size_t> order(frontiers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frontiers[a].id < frontiers[b].id; });

  Envelope env;
  for (std::size_t f : order) {
    // Site rows grouped by column.
    std::vector<int> cols;
    std::vector<std::vector<int>> rows_by_col;
    {
      std::vector<CellCoord> sites;
      sites.reserve(frontiers[f].cells.size());
      for (CellIndex c : frontiers[f].cells) sites.push_back(grid.coord(c));
      std::sort(sites.begin(), sites.end(),
                [](CellCoord a, CellCoord b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
      for (const CellCoord& s : sites) {
        if (cols.empty() || cols.back() != s.x) {
          cols.push_back(s.x);
          rows_by_col.emplace_back();
        }
        rows_by_col.back().push_back(s.y);
      }
    }
    if (cols.empty()) continue;
    std::vector<long long> g(cols.size());
    for (int y = y0; y <= y1; ++y) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& rows = rows_by_col[c];
        const auto it = std::lower_bound(rows.begin(), rows.end(), y);
        long long dy = kFar;
        if (it != rows.end()) dy = *it - y;
        if (it != rows.begin()) dy = std::min<long long>(dy, y - *(it - 1));
        g[c] = dy * dy;
      }
      env.build(cols, g);
      std::size_t k = 0;
      long long* brow = best.data() + static_cast<std::size_t>(y - y0) * static_cast<std::size_t>(bw);
      int* lrow = label.data() + static_cast<std::size_t>(y - y0) * static_cast<std::size_t>(bw);
      for (int x = x0; x <= x1; ++x) {
        while (env.z[k + 1] < x) ++k;
        const auto site = static_cast<std::size_t>(env.v[k]);
        const long long dx = x - cols[site];
        const long long d = dx * dx + g[site];
        const auto off = static_cast<std::size_t>(x - x0);
        if (d < brow[off]) {
          brow[off] = d;
          lrow[off] = static_cast<int>(f);
        }
      }
    }
  }

  std::vector<std::vector<CellIndex>> buckets(frontiers.size());
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const CellIndex i = grid.index(x, y);
      if (grid.at(i) != Cell::Unknown || !roi.contains(i)) continue;
      const int l = label[static_cast<std::size_t>(y - y0) * static_cast<std::size_t>(bw) + static_cast<std::size_t>(x - x0)];
      if (l >= 0) buckets[static_cast<std::size_t>(l)].push_back(i);
    }
  }
  std::vector<RegionCells> out;
  for (std::size_t f : order) {
    if (buckets[f].empty()) continue;
    out.push_back({frontiers[f].id, std::move(buckets[f])});
  }
  return out;
}

double workload_rate(const WorkloadStats& stats, double sensor_radius) {
  for (double d : stats.distances) {
    if (d < 0) throw std::invalid_argument("traveled distance must be non-negative");
  }
  if (stats.explored_area < 0) throw std::invalid_argument("explored area must be non-negative");
  if (!(sensor_radius > 0)) throw std::invalid_argument("sensor radius must be positive");
  constexpr double kEpsilon = 1e-9;
  if (stats.explored_area < kEpsilon) return 1.0 / (2.0 * sensor_radius);
  return stats.total_distance() / stats.explored_area;
}

double vertex_weight(const WorkloadStats& stats, double area, double sensor_radius) {
  if (area < 0) throw std::invalid_argument("region area must be non-negative");
  return workload_rate(stats, sensor_radius) * area;
}

std::vector<std::pair<int, int>> adjacent_regions(const OccupancyGrid& grid,
                                                  std::span<const RegionCells> regions) {
  std::vector<int> label(grid.size(), -1);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    for (CellIndex c : regions[r].cells) label[static_cast<std::size_t>(c)] = static_cast<int>(r);
  }
  std::set<std::pair<int, int>> pairs;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    for (CellIndex c : regions[r].cells) {
      const CellCoord cc = grid.coord(c);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!grid.in_bounds(cc.x + dx, cc.y + dy)) continue;
          const int other = label[static_cast<std::size_t>(grid.index(cc.x + dx, cc.y + dy))];
          if (other > static_cast<int>(r)) pairs.insert({static_cast<int>(r), other});
        }
      }
    }
  }
  return {pairs.begin(), pairs.end()};
}

double RegionGraph::total_area() const {
  double a = 0;
  for (const auto& v : vertices) a += v.area;
  return a;
}

std::string RegionGraph::dump() const {
  std::string out;
  char buf[192];
  for (const auto& v : vertices) {
    std::snprintf(buf, sizeof buf, "VERTEX %d %d %.9g %.9g %.9g %.9g %zu\n", v.id, v.frontier.id, v.area,
                  v.weight, v.viewpoint.position.x, v.viewpoint.position.y, v.cells.size());
    out += buf;
  }
  for (const auto& e : edges) {
    std::snprintf(buf, sizeof buf, "EDGE %d %d %.9g\n", e.i, e.j, e.weight);
    out += buf;
  }
  return out;
}

RegionGraph build_region_graph(const OccupancyGrid& grid, const RoiMask& roi,
                               std::span<const Frontier> frontiers,
                               std::span<const Viewpoint> viewpoints, const RrgDistance& rrg_distance,
                               const WorkloadStats& stats, double sensor_radius) {
  if (frontiers.size() != viewpoints.size()) {
    throw std::invalid_argument("every surviving frontier needs exactly one viewpoint");
  }
  RegionGraph g;
  auto regions = partition_regions(grid, roi, frontiers);
  const double cell_area = grid.resolution() * grid.resolution();
  const double rate = workload_rate(stats, sensor_radius);

  for (auto& rc : regions) {
    std::size_t idx = 0;
    while (frontiers[idx].id != rc.frontier_id) ++idx;
    RegionVertex v;
    v.id = static_cast<int>(g.vertices.size());
    v.area = static_cast<double>(rc.cells.size()) * cell_area;
    v.cells = rc.cells;
    v.frontier = frontiers[idx];
    v.viewpoint = viewpoints[idx];
    v.weight = rate * v.area;
    g.vertices.push_back(std::move(v));
  }

  const std::size_t n = g.vertices.size();
  g.edge_matrix.assign(n * n, kInfinity);
  for (std::size_t i = 0; i < n; ++i) g.edge_matrix[i * n + i] = 0.0;
  std::set<std::pair<int, int>> touching;
  for (const auto& p : adjacent_regions(grid, regions)) touching.insert(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool direct = touching.contains({static_cast<int>(i), static_cast<int>(j)});
      const double d = direct ? 0.0
                              : rrg_distance(g.vertices[i].viewpoint.rrg_vertex,
                                             g.vertices[j].viewpoint.rrg_vertex);
      const double w = edge_weight(direct, d);
      if (w == kInfinity) continue;
      g.edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
      g.edge_matrix[i * n + j] = w;
      g.edge_matrix[j * n + i] = w;
    }
  }
  return g;
}

}  // namespace mrx
