#include "mrx/perception.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numbers>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace mrx {

void SamplingConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(sampling_radius > 0)) throw std::invalid_argument("sampling_radius must be positive");
  if (!(fov_threshold >= 0 && fov_threshold <= 1)) throw std::invalid_argument("fov_threshold must lie in [0,1]");
  if (!(connect_radius > 0)) throw std::invalid_argument("connect_radius must be positive");
  if (!(sensor_radius > 0)) throw std::invalid_argument("sensor_radius must be positive");
}

// ---------------------------------------------------------------------------
// Frontiers

namespace {

double cell_distance2(const OccupancyGrid& g, CellIndex a, CellIndex b) {
  const CellCoord ca = g.coord(a);
  const CellCoord cb = g.coord(b);
  const double dx = ca.x - cb.x;
  const double dy = ca.y - cb.y;
  return dx * dx + dy * dy;
}

CellIndex farthest_from(const OccupancyGrid& g, const std::vector<CellIndex>& cells, CellIndex from) {
  CellIndex best = cells.front();
  double best_d = -1;
  for (CellIndex c : cells) {
    const double d = cell_distance2(g, c, from);
    if (d > best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

bool diameter_exceeds(const OccupancyGrid& g, const std::vector<CellIndex>& cells, double limit2) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      if (cell_distance2(g, cells[i], cells[j]) > limit2) return true;
    }
  }
  return false;
}

void split_cluster(const OccupancyGrid& g, std::vector<CellIndex> cells, double limit2,
                   std::vector<std::vector<CellIndex>>& out) {
  const CellIndex b = farthest_from(g, cells, cells.front());
  const CellIndex c = farthest_from(g, cells, b);
  if (cell_distance2(g, b, c) <= limit2 && !diameter_exceeds(g, cells, limit2)) {
    out.push_back(std::move(cells));
    return;
  }
  std::vector<CellIndex> near_b;
  std::vector<CellIndex> near_c;
  for (CellIndex x : cells) {
    (cell_distance2(g, x, b) <= cell_distance2(g, x, c) ? near_b : near_c).push_back(x);
  }
  split_cluster(g, std::move(near_b), limit2, out);
  split_cluster(g, std::move(near_c), limit2, out);
}

}  // namespace

std::vector<Frontier> detect_frontiers(const OccupancyGrid& grid, const RoiMask& roi,
                                       double sensor_radius) {
  if (!roi.matches(grid)) throw std::invalid_argument("roi does not match grid dimensions");
  const int w = grid.width();
  const int h = grid.height();
  std::vector<std::uint8_t> is_frontier(grid.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const CellIndex i = grid.index(x, y);
      if (grid.at(i) != Cell::Free) continue;
      bool hit = false;
      for (int dy = -1; dy <= 1 && !hit; ++dy) {
        for (int dx = -1; dx <= 1 && !hit; ++dx) {
          if ((dx == 0 && dy == 0) || !grid.in_bounds(x + dx, y + dy)) continue;
          const CellIndex n = grid.index(x + dx, y + dy);
          hit = grid.at(n) == Cell::Unknown && roi.contains(n);
        }
      }
      is_frontier[static_cast<std::size_t>(i)] = hit ? 1 : 0;
    }
  }

  const double limit_cells = sensor_radius / grid.resolution();
  const double limit2 = limit_cells * limit_cells;
  std::vector<std::vector<CellIndex>> clusters;
  std::vector<CellIndex> stack;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (is_frontier[k] != 1) continue;
    std::vector<CellIndex> component;
    is_frontier[k] = 2;
    stack.push_back(static_cast<CellIndex>(k));
    while (!stack.empty()) {
      const CellIndex i = stack.back();
      stack.pop_back();
      component.push_back(i);
      const CellCoord c = grid.coord(i);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!grid.in_bounds(c.x + dx, c.y + dy)) continue;
          const CellIndex n = grid.index(c.x + dx, c.y + dy);
          if (is_frontier[static_cast<std::size_t>(n)] == 1) {
            is_frontier[static_cast<std::size_t>(n)] = 2;
            stack.push_back(n);
          }
        }
      }
    }
    std::sort(component.begin(), component.end());
    split_cluster(grid, std::move(component), limit2, clusters);
  }

  for (auto& cl : clusters) std::sort(cl.begin(), cl.end());
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  std::vector<Frontier> out;
  out.reserve(clusters.size());
  for (auto& cl : clusters) {
    Frontier f;
    f.id = static_cast<int>(out.size());
    double sx = 0;
    double sy = 0;
    for (CellIndex c : cl) {
      const Point2 p = grid.center(c);
      sx += p.x;
      sy += p.y;
    }
    f.centroid = {sx / static_cast<double>(cl.size()), sy / static_cast<double>(cl.size())};
    f.cells = std::move(cl);
    out.push_back(std::move(f));
  }
  return out;
}

double fov(Point2 point, const Frontier& frontier, const OccupancyGrid& grid, double radius) {
  const auto origin = grid.cell_at(point);
  if (!origin || grid.at(*origin) != Cell::Free) throw std::invalid_argument("fov point must be a free cell");
  if (frontier.cells.empty()) return 0.0;
  const CellCoord o = grid.coord(*origin);
  const double r2 = radius * radius;
  std::size_t seen = 0;
  for (CellIndex c : frontier.cells) {
    const Point2 q = grid.center(c);
    const double dx = q.x - point.x;
    const double dy = q.y - point.y;
    if (dx * dx + dy * dy > r2) continue;
    if (line_of_sight(grid, o, grid.coord(c))) ++seen;
  }
  return static_cast<double>(seen) / static_cast<double>(frontier.cells.size());
}

// ---------------------------------------------------------------------------
// Roadmap

int Rrg::add_vertex(Point2 p) {
  const int id = static_cast<int>(vertices_.size());
  vertices_.push_back(p);
  adjacency_.emplace_back();
  const int bx = static_cast<int>(std::floor(p.x / kBucket));
  const int by = static_cast<int>(std::floor(p.y / kBucket));
  buckets_[bucket_key(bx, by)].push_back(id);
  return id;
}

bool Rrg::has_edge(int a, int b) const {
  const auto& adj = adjacency_.at(static_cast<std::size_t>(a));
  return std::any_of(adj.begin(), adj.end(), [b](const Edge& e) { return e.to == b; });
}

void Rrg::add_edge(int a, int b) {
  if (a == b || has_edge(a, b)) return;
  const double len = distance(vertex(a), vertex(b));
  adjacency_[static_cast<std::size_t>(a)].push_back({b, len});
  adjacency_[static_cast<std::size_t>(b)].push_back({a, len});
  ++edge_count_;
}

std::vector<int> Rrg::within(Point2 p, double radius) const {
  std::vector<int> out;
  const int bx0 = static_cast<int>(std::floor((p.x - radius) / kBucket));
  const int bx1 = static_cast<int>(std::floor((p.x + radius) / kBucket));
  const int by0 = static_cast<int>(std::floor((p.y - radius) / kBucket));
  const int by1 = static_cast<int>(std::floor((p.y + radius) / kBucket));
  for (int by = by0; by <= by1; ++by) {
    for (int bx = bx0; bx <= bx1; ++bx) {
      const auto it = buckets_.find(bucket_key(bx, by));
      if (it == buckets_.end()) continue;
      for (int v : it->second) {
        if (distance(vertices_[static_cast<std::size_t>(v)], p) <= radius) out.push_back(v);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<int> Rrg::nearest(Point2 p) const {
  std::optional<int> best;
  double best_d = kInfinity;
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    const double d = distance(vertices_[v], p);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(v);
    }
  }
  return best;
}

std::string Rrg::dump() const {
  std::string out;
  char buf[128];
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    std::snprintf(buf, sizeof buf, "V %zu %.9g %.9g\n", v, vertices_[v].x, vertices_[v].y);
    out += buf;
  }
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    for (const Edge& e : adjacency_[v]) {
      if (static_cast<std::size_t>(e.to) <= v) continue;
      std::snprintf(buf, sizeof buf, "E %zu %d %.9g\n", v, e.to, e.length);
      out += buf;
    }
  }
  return out;
}

Rrg Rrg::parse(std::string_view text) {
  Rrg rrg;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    char kind = 0;
    ls >> kind;
    if (kind == 'V') {
      std::size_t id = 0;
      Point2 p;
      ls >> id >> p.x >> p.y;
      if (!ls || id != rrg.size()) throw FormatError("bad RRG vertex line: " + line);
      rrg.add_vertex(p);
    } else if (kind == 'E') {
      int a = 0;
      int b = 0;
      double len = 0;
      ls >> a >> b >> len;
      if (!ls || a < 0 || b < 0 || static_cast<std::size_t>(std::max(a, b)) >= rrg.size()) {
        throw FormatError("bad RRG edge line: " + line);
      }
      rrg.add_edge(a, b);
    } else {
      throw FormatError("bad RRG line: " + line);
    }
  }
  return rrg;
}

std::optional<int> rrg_connect(Rrg& rrg, Point2 p, const OccupancyGrid& grid, double connect_radius) {
  const auto cell = grid.cell_at(p);
  if (!cell || grid.at(*cell) != Cell::Free) throw std::invalid_argument("RRG vertex must be a free cell");
  if (rrg.empty()) return rrg.add_vertex(p);
  const CellCoord c = grid.coord(*cell);
  std::vector<int> linked;
  for (int v : rrg.within(p, connect_radius)) {
    const auto vc = grid.cell_at(rrg.vertex(v));
    if (vc && segment_free(grid, c, grid.coord(*vc))) linked.push_back(v);
  }
  if (linked.empty()) return std::nullopt;
  const int id = rrg.add_vertex(p);
  for (int v : linked) rrg.add_edge(id, v);
  return id;
}

std::optional<int> rrg_snap_or_connect(Rrg& rrg, Point2 p, const OccupancyGrid& grid,
                                       double snap_radius, double connect_radius) {
  const auto cell = grid.cell_at(p);
  if (!cell || grid.at(*cell) != Cell::Free) throw std::invalid_argument("RRG vertex must be a free cell");
  std::optional<int> best;
  double best_d = kInfinity;
  for (int v : rrg.within(p, snap_radius)) {
    const double d = distance(rrg.vertex(v), p);
    const auto vc = grid.cell_at(rrg.vertex(v));
    if (d < best_d && vc && segment_free(grid, grid.coord(*cell), grid.coord(*vc))) {
      best_d = d;
      best = v;
    }
  }
  if (best) return best;
  return rrg_connect(rrg, p, grid, connect_radius);
}

std::optional<int> rrg_connect_via_grid(Rrg& rrg, Point2 p, const OccupancyGrid& grid) {
  const auto start = grid.cell_at(p);
  if (!start || grid.at(*start) != Cell::Free) throw std::invalid_argument("RRG vertex must be a free cell");
  std::unordered_map<CellIndex, int> vertex_at;
  for (std::size_t v = 0; v < rrg.size(); ++v) {
    if (const auto c = grid.cell_at(rrg.vertex(static_cast<int>(v)))) vertex_at.emplace(*c, static_cast<int>(v));
  }
  if (vertex_at.empty()) return std::nullopt;
  std::vector<CellIndex> parent(grid.size(), -2);
  std::deque<CellIndex> queue{*start};
  parent[static_cast<std::size_t>(*start)] = -1;
  std::optional<CellIndex> hit;
  while (!queue.empty() && !hit) {
    const CellIndex c = queue.front();
    queue.pop_front();
    if (vertex_at.contains(c)) {
      hit = c;
      break;
    }
    const CellCoord cc = grid.coord(c);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if ((dx == 0 && dy == 0) || !grid.in_bounds(cc.x + dx, cc.y + dy)) continue;
        if (dx != 0 && dy != 0 &&
            (grid.at(cc.x + dx, cc.y) != Cell::Free || grid.at(cc.x, cc.y + dy) != Cell::Free)) {
          continue;
        }
        const CellIndex n = grid.index(cc.x + dx, cc.y + dy);
        if (grid.at(n) != Cell::Free || parent[static_cast<std::size_t>(n)] != -2) continue;
        parent[static_cast<std::size_t>(n)] = c;
        queue.push_back(n);
      }
    }
  }
  if (!hit) return std::nullopt;
  std::vector<CellIndex> cells;
  for (CellIndex c = *hit; c != -1; c = parent[static_cast<std::size_t>(c)]) cells.push_back(c);
  std::reverse(cells.begin(), cells.end());

  // String-pull the cell path into straight free segments.
  const int first = rrg.add_vertex(p);
  int prev = first;
  std::size_t at = 0;
  while (at + 1 < cells.size()) {
    std::size_t far = at + 1;
    for (std::size_t j = cells.size() - 1; j > at + 1; --j) {
      if (segment_free(grid, grid.coord(cells[at]), grid.coord(cells[j]))) {
        far = j;
        break;
      }
    }
    const int next = far + 1 == cells.size() ? vertex_at.at(cells.back()) : rrg.add_vertex(grid.center(cells[far]));
    rrg.add_edge(prev, next);
    prev = next;
    at = far;
  }
  if (cells.size() == 1) rrg.add_edge(first, vertex_at.at(cells.back()));
  return first;
}

void grow_rrg(Rrg& rrg, const OccupancyGrid& grid, std::span<const std::uint8_t> accessible,
              const RrgGrowthConfig& cfg, Rng& rng) {
  std::vector<CellIndex> pool;
  for (std::size_t i = 0; i < accessible.size(); ++i) {
    if (accessible[i] && grid.at(static_cast<CellIndex>(i)) == Cell::Free) pool.push_back(static_cast<CellIndex>(i));
  }
  if (pool.empty()) return;
  for (int s = 0; s < cfg.samples; ++s) {
    const Point2 target = grid.center(pool[uniform_index(rng, pool.size())]);
    if (rrg.empty()) {
      rrg_connect(rrg, target, grid, cfg.connect_radius);
      continue;
    }
    const int near = *rrg.nearest(target);
    const Point2 from = rrg.vertex(near);
    const double d = distance(from, target);
    Point2 q = target;
    if (d > cfg.step) {
      q = {from.x + (target.x - from.x) * cfg.step / d, from.y + (target.y - from.y) * cfg.step / d};
    }
    const auto qc = grid.cell_at(q);
    if (!qc || grid.at(*qc) != Cell::Free || !accessible[static_cast<std::size_t>(*qc)]) continue;
    if (!rrg.within(q, cfg.min_spacing).empty()) continue;
    rrg_connect(rrg, q, grid, cfg.connect_radius);
  }
}

ViewpointSampling sample_viewpoints(std::span<const Frontier> frontiers, const OccupancyGrid& grid,
                                    Rrg& rrg, const SamplingConfig& cfg, std::uint64_t rng_seed,
                                    std::span<const std::uint8_t> accessible) {
  cfg.validate();
  ViewpointSampling out;
  if (frontiers.empty()) return out;

  std::vector<std::uint8_t> derived;
  if (accessible.empty()) {
    std::vector<CellIndex> seeds;
    for (const Point2& p : rrg.vertices()) {
      if (const auto c = grid.cell_at(p)) seeds.push_back(*c);
    }
    if (seeds.empty()) {
      derived.assign(grid.size(), 0);
      for (std::size_t i = 0; i < grid.size(); ++i) derived[i] = grid.at(static_cast<CellIndex>(i)) == Cell::Free;
    } else {
      derived = reachable_free_multi(grid, seeds);
    }
    accessible = derived;
  }

  Rng rng(rng_seed);
  struct Candidate {
    Point2 p;
    double score;
  };
  for (const Frontier& f : frontiers) {
    std::vector<Candidate> candidates;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      const double rad = cfg.sampling_radius * std::sqrt(uniform01(rng));
      const double ang = 2.0 * std::numbers::pi * uniform01(rng);
      const Point2 p{f.centroid.x + rad * std::cos(ang), f.centroid.y + rad * std::sin(ang)};
      const auto c = grid.cell_at(p);
      if (!c || grid.at(*c) != Cell::Free || !accessible[static_cast<std::size_t>(*c)]) continue;
      const double score = fov(p, f, grid, cfg.sensor_radius);
      if (score > cfg.fov_threshold) candidates.push_back({p, score});
    }
    // The frontier cell closest to the centroid is always a candidate.
    const CellIndex* medoid = nullptr;
    double medoid_d = kInfinity;
    for (const CellIndex& c : f.cells) {
      const double d = distance(grid.center(c), f.centroid);
      if (d < medoid_d) {
        medoid_d = d;
        medoid = &c;
      }
    }
    if (medoid && accessible[static_cast<std::size_t>(*medoid)]) {
      const Point2 p = grid.center(*medoid);
      const double score = fov(p, f, grid, cfg.sensor_radius);
      if (score > cfg.fov_threshold) candidates.push_back({p, score});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    bool placed = false;
    for (const Candidate& cand : candidates) {
      if (const auto v = rrg_connect(rrg, cand.p, grid, cfg.connect_radius)) {
        out.viewpoints.push_back({f.id, cand.p, cand.score, *v});
        out.surviving.push_back(f);
        placed = true;
        break;
      }
    }
    if (!placed && !candidates.empty()) {
      if (const auto v = rrg_connect_via_grid(rrg, candidates.front().p, grid)) {
        out.viewpoints.push_back({f.id, candidates.front().p, candidates.front().score, *v});
        out.surviving.push_back(f);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shortest paths

namespace {

using HeapEntry = std::pair<double, int>;

void dijkstra_into(const std::vector<std::vector<WeightedDigraph::Arc>>& arcs, int source,
                   std::vector<double>& dist, std::vector<int>* pred) {
  dist.assign(arcs.size(), kInfinity);
  if (pred) pred->assign(arcs.size(), -1);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
  dist[static_cast<std::size_t>(source)] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (const auto& a : arcs[static_cast<std::size_t>(u)]) {
      const double nd = d + a.weight;
      if (nd < dist[static_cast<std::size_t>(a.to)]) {
        dist[static_cast<std::size_t>(a.to)] = nd;
        if (pred) (*pred)[static_cast<std::size_t>(a.to)] = u;
        heap.push({nd, a.to});
      }
    }
  }
}

WeightedDigraph as_digraph(const Rrg& rrg) {
  WeightedDigraph g;
  g.arcs.resize(rrg.size());
  for (std::size_t v = 0; v < rrg.size(); ++v) {
    for (const auto& e : rrg.neighbors(static_cast<int>(v))) g.arcs[v].push_back({e.to, e.length});
  }
  return g;
}

}  // namespace

std::optional<DistanceTable> johnson(const WeightedDigraph& g) {
  const std::size_t n = g.arcs.size();
  // Bellman-Ford from a virtual source joined to every vertex by a 0 arc.
  std::vector<double> h(n, 0.0);
  bool changed = true;
  for (std::size_t round = 0; round <= n && changed; ++round) {
    changed = false;
    for (std::size_t u = 0; u < n; ++u) {
      for (const auto& a : g.arcs[u]) {
        if (h[u] + a.weight < h[static_cast<std::size_t>(a.to)]) {
          h[static_cast<std::size_t>(a.to)] = h[u] + a.weight;
          changed = true;
        }
      }
    }
    if (changed && round == n) return std::nullopt;
  }

  std::vector<std::vector<WeightedDigraph::Arc>> reweighted(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& a : g.arcs[u]) {
      const double w = a.weight + h[u] - h[static_cast<std::size_t>(a.to)];
      reweighted[u].push_back({a.to, std::max(0.0, w)});
    }
  }

  DistanceTable table(n);
  std::vector<double> dist;
  for (std::size_t s = 0; s < n; ++s) {
    dijkstra_into(reweighted, static_cast<int>(s), dist, nullptr);
    for (std::size_t t = 0; t < n; ++t) {
      table.at(s, t) = dist[t] == kInfinity ? kInfinity : dist[t] - h[s] + h[t];
    }
  }
  return table;
}

DistanceTable johnson_all_pairs(const Rrg& rrg) {
  // Edge lengths are Euclidean distances, so no negative cycle can exist.
  return *johnson(as_digraph(rrg));
}

std::vector<int> ShortestPathTree::vertex_path(int target) const {
  if (target < 0 || static_cast<std::size_t>(target) >= dist.size()) throw std::out_of_range("unknown RRG vertex");
  if (dist[static_cast<std::size_t>(target)] == kInfinity) return {};
  std::vector<int> path;
  for (int v = target; v != -1; v = pred[static_cast<std::size_t>(v)]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

ShortestPathTree dijkstra(const Rrg& rrg, int source) {
  const int sources[1] = {source};
  return std::move(dijkstra_many(rrg, sources).front());
}

std::vector<ShortestPathTree> dijkstra_many(const Rrg& rrg, std::span<const int> sources) {
  for (int s : sources) {
    if (s < 0 || static_cast<std::size_t>(s) >= rrg.size()) throw std::out_of_range("unknown RRG vertex");
  }
  const WeightedDigraph g = as_digraph(rrg);
  std::vector<ShortestPathTree> trees(sources.size());
  for (std::size_t k = 0; k < sources.size(); ++k) {
    trees[k].source = sources[k];
    dijkstra_into(g.arcs, sources[k], trees[k].dist, &trees[k].pred);
  }
  return trees;
}

std::vector<Point2> shortest_path(const Rrg& rrg, int from, int to) {
  if (from < 0 || to < 0 || static_cast<std::size_t>(std::max(from, to)) >= rrg.size()) {
    throw std::out_of_range("unknown RRG vertex");
  }
  const auto ids = dijkstra(rrg, from).vertex_path(to);
  std::vector<Point2> out;
  out.reserve(ids.size());
  for (int v : ids) out.push_back(rrg.vertex(v));
  return out;
}

}  // namespace mrx
