#include "mrx/planner.hpp"

#include <algorithm>

namespace mrx {

double PerceptionSnapshot::distance(int a, int b) const {
  if (a < 0 || b < 0) return kInfinity;
  if (a == b) return 0.0;
  if (const auto it = tree_of.find(a); it != tree_of.end()) {
    const auto& d = trees[it->second].dist;
    return static_cast<std::size_t>(b) < d.size() ? d[static_cast<std::size_t>(b)] : kInfinity;
  }
  if (const auto it = tree_of.find(b); it != tree_of.end()) {
    const auto& d = trees[it->second].dist;
    return static_cast<std::size_t>(a) < d.size() ? d[static_cast<std::size_t>(a)] : kInfinity;
  }
  return kInfinity;
}

RrgDistance PerceptionSnapshot::distance_fn() const {
  return [this](int a, int b) { return distance(a, b); };
}

std::vector<Point2> PerceptionSnapshot::path(int from, int to) const {
  if (from < 0 || to < 0) return {};
  const auto it = tree_of.find(from);
  if (it == tree_of.end()) return shortest_path(roadmap, from, to);
  std::vector<Point2> out;
  for (int v : trees[it->second].vertex_path(to)) out.push_back(roadmap.vertex(v));
  return out;
}

namespace {

// The robot's cell, or the closest free neighbor for a robot clipping an
// obstacle corner.
std::optional<CellIndex> free_cell(const OccupancyGrid& map, Point2 p) {
  const auto cell = map.cell_at(p);
  if (!cell) return std::nullopt;
  if (map.at(*cell) == Cell::Free) return cell;
  const CellCoord cc = map.coord(*cell);
  std::optional<CellIndex> best;
  double best_d = kInfinity;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (!map.in_bounds(cc.x + dx, cc.y + dy)) continue;
      const CellIndex n = map.index(cc.x + dx, cc.y + dy);
      if (map.at(n) != Cell::Free || distance(p, map.center(n)) >= best_d) continue;
      best_d = distance(p, map.center(n));
      best = n;
    }
  }
  return best;
}

int anchor(Rrg& rrg, Point2 p, const OccupancyGrid& map, const PlannerConfig& cfg) {
  const auto cell = free_cell(map, p);
  if (!cell) return -1;
  if (map.at(*map.cell_at(p)) != Cell::Free) p = map.center(*cell);
  const double r = cfg.sampling.connect_radius;
  if (auto v = rrg_snap_or_connect(rrg, p, map, cfg.snap_radius, r)) return *v;
  for (double scale : {2.0, 4.0}) {
    if (auto v = rrg_connect(rrg, p, map, r * scale)) return *v;
  }
  if (auto v = rrg_connect_via_grid(rrg, p, map)) return *v;
  return -1;
}

}  // namespace

PerceptionSnapshot perceive(Rrg& rrg, const PlanningInputs& in, const PlannerConfig& cfg) {
  const OccupancyGrid& map = *in.map;
  PerceptionSnapshot snap;

  std::vector<CellIndex> seeds;
  for (const Point2& p : in.robots) {
    if (const auto c = free_cell(map, p)) seeds.push_back(*c);
  }
  const auto accessible = reachable_free_multi(map, seeds);
  if (cfg.grow_roadmap) {
    Rng rng(in.seed * 0x9E3779B97F4A7C15ULL + 17);
    grow_rrg(rrg, map, accessible, cfg.growth, rng);
  }
  snap.roadmap = rrg;
  Rrg& work = snap.roadmap;
  for (const Point2& p : in.robots) snap.robot_vertices.push_back(anchor(work, p, map, cfg));

  snap.frontiers = detect_frontiers(map, *in.roi, cfg.sensor_radius);
  if (snap.frontiers.empty()) return snap;

  SamplingConfig scfg = cfg.sampling;
  scfg.sensor_radius = std::max(map.resolution(), cfg.sensor_radius - cfg.view_margin);
  auto sampled = sample_viewpoints(snap.frontiers, map, work, scfg, in.seed, accessible);

  std::vector<int> sources;
  for (int v : snap.robot_vertices) {
    if (v >= 0) sources.push_back(v);
  }
  const std::size_t robot_sources = sources.size();
  for (const auto& vp : sampled.viewpoints) sources.push_back(vp.rrg_vertex);
  std::vector<int> unique;
  for (int v : sources) {
    if (snap.tree_of.contains(v)) continue;
    snap.tree_of[v] = unique.size();
    unique.push_back(v);
  }
  snap.trees = dijkstra_many(work, unique);

  for (std::size_t k = 0; k < sampled.viewpoints.size(); ++k) {
    const int v = sampled.viewpoints[k].rrg_vertex;
    bool reachable = false;
    for (std::size_t s = 0; s < robot_sources && !reachable; ++s) {
      reachable = snap.distance(sources[s], v) < kInfinity;
    }
    if (!reachable) continue;
    snap.viewpoints.push_back(sampled.viewpoints[k]);
    snap.surviving.push_back(std::move(sampled.surviving[k]));
  }
  return snap;
}

RegionModel build_model(const PerceptionSnapshot& snap, const PlanningInputs& in, const PlannerConfig& cfg) {
  RegionModel model;
  const auto dist = snap.distance_fn();
  model.graph = build_region_graph(*in.map, *in.roi, snap.surviving, snap.viewpoints, dist, in.stats,
                                   cfg.sensor_radius);
  std::vector<RobotAnchor> anchors;
  for (std::size_t r = 0; r < in.robots.size(); ++r) anchors.push_back({in.robots[r], snap.robot_vertices[r]});
  model.matrix = build_matrix(model.graph, anchors, dist);
  return model;
}

namespace {

CostMatrix restrict_regions(const CostMatrix& m, std::span<const int> keep) {
  CostMatrix out(m.robots(), keep.size());
  auto src = [&](std::size_t k) {
    return k < m.robots() ? k : m.region_node(static_cast<std::size_t>(keep[k - m.robots()]));
  };
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) out.set(i, j, m.at(src(i), src(j)));
  }
  return out;
}

}  // namespace

Point2 region_goal(const RegionVertex& v, const OccupancyGrid& map, Point2 robot) {
  if (distance(v.viewpoint.position, robot) > map.resolution()) return v.viewpoint.position;
  Point2 best = v.viewpoint.position;
  double best_d = kInfinity;
  for (CellIndex c : v.frontier.cells) {
    const Point2 p = map.center(c);
    const double d = distance(p, robot);
    if (d > 0.5 * map.resolution() && d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

CostMatrix sub_matrix(const CostMatrix& m, std::size_t robot, std::span<const int> regions) {
  return restrict_regions(m.single_robot(robot), regions);
}

VrpOutcome plan_routes(const PerceptionSnapshot& snap, const RegionModel& model, const SolverOptions& opts) {
  VrpOutcome out;
  const CostMatrix& m = model.matrix;
  std::vector<int> keep(m.regions());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = static_cast<int>(i);
  RoutePlan plan;
  try {
    plan = solve_vrp(m, opts);
  } catch (const UnreachableRegions& e) {
    std::vector<int> reduced;
    for (int i : keep) {
      if (!std::binary_search(e.ids().begin(), e.ids().end(), i)) reduced.push_back(i);
    }
    plan = solve_vrp(restrict_regions(m, reduced), opts);
    for (auto& route : plan.routes) {
      for (int& r : route) r = reduced[static_cast<std::size_t>(r)];
    }
  }
  out.guide_paths.resize(plan.routes.size());
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    if (plan.routes[r].empty()) continue;
    const int target = model.graph.vertices[static_cast<std::size_t>(plan.routes[r].front())].viewpoint.rrg_vertex;
    out.guide_paths[r] = snap.path(snap.robot_vertices[r], target);
    if (out.guide_paths[r].empty()) plan.routes[r].clear();
  }
  out.plan = std::move(plan);
  return out;
}

}  // namespace mrx
