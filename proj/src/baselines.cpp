#include "mrx/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mrx {

std::vector<int> region_owners(const OccupancyGrid& map, const RegionGraph& graph, std::span<const Point2> robots,
                               const CostMatrix& matrix) {
  std::vector<int> owners(graph.size(), -1);
  std::vector<std::size_t> count(robots.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    std::fill(count.begin(), count.end(), 0);
    for (CellIndex c : graph.vertices[i].cells) {
      const Point2 p = map.center(c);
      std::size_t best = 0;
      double best_d = kInfinity;
      for (std::size_t r = 0; r < robots.size(); ++r) {
        const double d = distance(p, robots[r]);
        if (d < best_d) {
          best_d = d;
          best = r;
        }
      }
      ++count[best];
    }
    std::size_t best_count = 0;
    for (std::size_t r = 0; r < robots.size(); ++r) {
      if (!(matrix.at(r, matrix.region_node(i)) < kInfinity)) continue;
      if (owners[i] < 0 || count[r] > best_count) {
        owners[i] = static_cast<int>(r);
        best_count = count[r];
      }
    }
  }
  return owners;
}

double unknown_gain(const OccupancyGrid& map, Point2 p, double radius) {
  const double res = map.resolution();
  const int x0 = std::max(0, static_cast<int>(std::floor((p.x - radius) / res)));
  const int x1 = std::min(map.width() - 1, static_cast<int>(std::floor((p.x + radius) / res)));
  const int y0 = std::max(0, static_cast<int>(std::floor((p.y - radius) / res)));
  const int y1 = std::min(map.height() - 1, static_cast<int>(std::floor((p.y + radius) / res)));
  std::size_t n = 0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const CellIndex c = map.index(x, y);
      if (map.at(c) == Cell::Unknown && distance(map.center(c), p) <= radius) ++n;
    }
  }
  return static_cast<double>(n) * res * res;
}

std::vector<int> greedy_assign(std::vector<GreedyCandidate> candidates, const std::vector<bool>& active,
                               std::span<const Point2> taken, const GreedyConfig& cfg) {
  auto discount = [&](Point2 at) {
    for (auto& c : candidates) {
      if (distance(c.position, at) <= cfg.discount_radius) c.gain *= cfg.gamma;
    }
  };
  for (const Point2& t : taken) discount(t);
  std::vector<int> out(active.size(), -1);
  std::vector<bool> used(candidates.size(), false);
  std::vector<bool> open = active;
  for (;;) {
    int best_r = -1;
    int best_c = -1;
    double best_u = -kInfinity;
    for (std::size_t r = 0; r < open.size(); ++r) {
      if (!open[r]) continue;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (used[c] || r >= candidates[c].travel.size() || !(candidates[c].travel[r] < kInfinity)) continue;
        const double u = cfg.alpha * candidates[c].gain - cfg.beta * candidates[c].travel[r];
        if (u > best_u) {
          best_u = u;
          best_r = static_cast<int>(r);
          best_c = static_cast<int>(c);
        }
      }
    }
    if (best_r < 0) break;
    out[static_cast<std::size_t>(best_r)] = best_c;
    open[static_cast<std::size_t>(best_r)] = false;
    used[static_cast<std::size_t>(best_c)] = true;
    discount(candidates[static_cast<std::size_t>(best_c)].position);
  }
  return out;
}

GoalStrategy::GoalStrategy(const ScenarioConfig& cfg) : cfg_(cfg), planner_(cfg.planner()) {}

void GoalStrategy::begin(World& w) {
  goals_.assign(w.robots().size(), std::nullopt);
  const std::vector<bool> all(goals_.size(), true);
  apply(w, plan(w, all), all);
}

std::vector<bool> GoalStrategy::due(World& w) {
  const std::size_t n = goals_.size();
  bool arrived = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (goals_[k] && !w.robots()[k].has_path()) {
      goals_[k].reset();
      arrived = true;
      w.event(World::robot_node(static_cast<int>(k)), "REACHED", "goal");
    }
  }
  const bool idle = std::any_of(goals_.begin(), goals_.end(), [](const auto& g) { return !g; });
  const bool retry = idle && w.tick() - last_plan_ >= w.ticks_for(cfg_.idle_retry);
  std::vector<bool> active(n, false);
  if (!arrived && !retry) return active;
  for (std::size_t k = 0; k < n; ++k) active[k] = replan_all() || !goals_[k];
  return active;
}

void GoalStrategy::after_motion(World& w) {
  const auto active = due(w);
  if (std::find(active.begin(), active.end(), true) == active.end()) return;
  apply(w, plan(w, active), active);
}

void GoalStrategy::apply(World& w, const std::vector<std::optional<Point2>>& goals, const std::vector<bool>& active) {
  ++plans_;
  last_plan_ = w.tick();
  for (std::size_t k = 0; k < goals_.size(); ++k) {
    if (!active[k]) continue;
    const int id = static_cast<int>(k);
    goals_[k] = goals[k];
    if (goals_[k] && !w.navigate(id, *goals_[k])) goals_[k].reset();
    if (!goals_[k]) {
      w.stop(id);
      continue;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "x=%.3f y=%.3f", goals_[k]->x, goals_[k]->y);
    w.event(World::robot_node(id), "GOAL", buf);
  }
}

namespace {

PlanningInputs inputs_for(World& w, const RoiMask& roi) {
  PlanningInputs in;
  in.map = &w.known();
  in.roi = &roi;
  in.robots = w.positions();
  in.stats = w.stats();
  in.seed = w.next_seed();
  return in;
}

void log_plan(World& w, const char* node, std::size_t regions) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "regions=%zu", regions);
  w.event(node, "PLAN", buf);
}

}  // namespace

void CtrStrategy::begin(World& w) {
  goals_.assign(w.robots().size(), std::nullopt);
  start(w, std::vector<bool>(goals_.size(), true));
}

void CtrStrategy::start(World& w, const std::vector<bool>& active) {
  pending_ = plan(w, active);
  pending_active_ = active;
  ready_at_ = w.tick() + w.ticks_for(cfg_.center_latency);
  for (auto& r : w.robots()) r.frozen = true;
  if (w.tick() >= ready_at_) after_motion(w);
}

void CtrStrategy::after_motion(World& w) {
  if (pending_) {
    if (w.tick() < ready_at_) return;
    for (auto& r : w.robots()) r.frozen = false;
    auto goals = std::move(*pending_);
    pending_.reset();
    apply(w, goals, pending_active_);
    return;
  }
  const auto active = due(w);
  if (std::find(active.begin(), active.end(), true) != active.end()) start(w, active);
}

std::vector<std::optional<Point2>> CtrStrategy::plan(World& w, const std::vector<bool>& active) {
  (void)active;
  std::vector<std::optional<Point2>> goals(w.robots().size());
  const RoiMask roi = RoiMask::full(w.known());
  const PlanningInputs in = inputs_for(w, roi);
  const auto snap = perceive(w.rrg(), in, planner_);
  if (snap.surviving.empty()) {
    log_plan(w, "center", 0);
    return goals;
  }
  auto model = build_model(snap, in, planner_);
  auto routes = plan_routes(snap, model, planner_.solver);
  for (std::size_t r = 0; r < routes.plan.routes.size(); ++r) {
    const auto& seq = routes.plan.routes[r];
    if (!seq.empty()) goals[r] = region_goal(model.graph.vertices[static_cast<std::size_t>(seq.front())], *in.map, in.robots[r]);
  }
  log_plan(w, "center", model.graph.size());
  auto& view = w.plan_view();
  view.regions = std::move(model.graph.vertices);
  view.routes = std::move(routes.plan.routes);
  view.robots = in.robots;
  return goals;
}

std::vector<std::optional<Point2>> MtspStrategy::plan(World& w, const std::vector<bool>& active) {
  (void)active;
  std::vector<std::optional<Point2>> goals(w.robots().size());
  const RoiMask roi = RoiMask::full(w.known());
  const PlanningInputs in = inputs_for(w, roi);
  const auto snap = perceive(w.rrg(), in, planner_);
  if (snap.surviving.empty()) {
    log_plan(w, "planner", 0);
    return goals;
  }
  auto model = build_model(snap, in, planner_);
  const auto owners = region_owners(*in.map, model.graph, in.robots, model.matrix);
  std::vector<std::vector<int>> routes(in.robots.size());
  for (std::size_t r = 0; r < in.robots.size(); ++r) {
    std::vector<int> mine;
    for (std::size_t i = 0; i < owners.size(); ++i) {
      if (owners[i] == static_cast<int>(r)) mine.push_back(static_cast<int>(i));
    }
    if (mine.empty()) continue;
    std::vector<int> order;
    try {
      order = solve_tsp(sub_matrix(model.matrix, r, mine), planner_.solver);
      for (int& o : order) o = mine[static_cast<std::size_t>(o)];
    } catch (const UnreachableRegions&) {
      order = mine;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return model.matrix.at(r, model.matrix.region_node(static_cast<std::size_t>(a))) <
               model.matrix.at(r, model.matrix.region_node(static_cast<std::size_t>(b)));
      });
    }
    goals[r] = region_goal(model.graph.vertices[static_cast<std::size_t>(order.front())], *in.map, in.robots[r]);
    routes[r] = std::move(order);
  }
  log_plan(w, "planner", model.graph.size());
  auto& view = w.plan_view();
  view.regions = std::move(model.graph.vertices);
  view.routes = std::move(routes);
  view.robots = in.robots;
  return goals;
}

std::vector<std::optional<Point2>> GreStrategy::plan(World& w, const std::vector<bool>& active) {
  std::vector<std::optional<Point2>> goals(w.robots().size());
  const RoiMask roi = RoiMask::full(w.known());
  const PlanningInputs in = inputs_for(w, roi);
  const auto snap = perceive(w.rrg(), in, planner_);
  std::vector<GreedyCandidate> candidates;
  for (const auto& vp : snap.viewpoints) {
    GreedyCandidate c;
    c.position = vp.position;
    c.gain = unknown_gain(*in.map, vp.position, cfg_.sensor_radius);
    for (int rv : snap.robot_vertices) c.travel.push_back(snap.distance(rv, vp.rrg_vertex));
    candidates.push_back(std::move(c));
  }
  std::vector<Point2> taken;
  for (std::size_t k = 0; k < goals_.size(); ++k) {
    if (!active[k] && goals_[k]) taken.push_back(*goals_[k]);
  }
  const auto pick = greedy_assign(candidates, active, taken, cfg_.greedy);
  for (std::size_t r = 0; r < pick.size(); ++r) {
    if (pick[r] < 0) continue;
    const auto i = static_cast<std::size_t>(pick[r]);
    RegionVertex v;
    v.frontier = snap.surviving[i];
    v.viewpoint = snap.viewpoints[i];
    goals[r] = region_goal(v, *in.map, in.robots[r]);
  }
  log_plan(w, "planner", candidates.size());
  return goals;
}

}  // namespace mrx
