#include "mrx/world.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "mrx/simulator.hpp"

namespace mrx {

std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::Hierarchical: return "hierarchical";
    case StrategyKind::Ctr: return "ctr";
    case StrategyKind::Mtsp: return "mtsp";
    case StrategyKind::Gre: return "gre";
  }
  return "?";
}

std::optional<StrategyKind> parse_strategy(std::string_view s) {
  std::string low(s);
  for (char& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (StrategyKind k : {StrategyKind::Hierarchical, StrategyKind::Ctr, StrategyKind::Mtsp, StrategyKind::Gre}) {
    if (low == to_string(k)) return k;
  }
  if (low == "hier") return StrategyKind::Hierarchical;
  return std::nullopt;
}

void ScenarioConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
  };
  if (robots < 1) throw std::invalid_argument("robot count must be at least 1");
  if (!starts.empty() && starts.size() != static_cast<std::size_t>(robots)) {
    throw std::invalid_argument("start count does not match robot count");
  }
  positive(robot_speed, "robot_speed");
  positive(sensor_radius, "sensor_radius");
  positive(tick, "tick");
  positive(solver_budget_ms, "solver_budget_ms");
  positive(progress_period, "progress_period");
  positive(time_cap, "time_cap");
  positive(idle_retry, "idle_retry");
  if (center_latency < 0 || message_latency < 0) throw std::invalid_argument("latencies must be non-negative");
  if (w_threshold < 0) throw std::invalid_argument("w_threshold must be non-negative");
  if (greedy.gamma < 0 || greedy.gamma > 1) throw std::invalid_argument("greedy gamma must be in [0, 1]");
  sampling.validate();
}

PlannerConfig ScenarioConfig::planner() const {
  PlannerConfig p;
  p.sampling = sampling;
  p.growth = growth;
  p.sensor_radius = sensor_radius;
  p.solver.time_budget_ms = solver_budget_ms;
  p.solver.objective = objective;
  p.solver.seed = seed;
  return p;
}

void EventLog::add(long tick, double dt, std::string_view node, std::string_view event, std::string_view fields) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f ", static_cast<double>(tick) * dt);
  std::string line = buf;
  line.append(node);
  line += ' ';
  line.append(event);
  if (!fields.empty()) {
    line += ' ';
    line.append(fields);
  }
  lines_.push_back(std::move(line));
}

std::string EventLog::text() const {
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

World::World(const GroundTruth& truth, const ScenarioConfig& cfg)
    : truth_(&truth),
      cfg_(cfg),
      known_(truth.grid.width(), truth.grid.height(), truth.grid.resolution()) {
  cfg_.validate();
  if (cfg_.starts.empty()) cfg_.starts = default_starts(truth.grid, cfg_.robots);
  for (int r = 0; r < cfg_.robots; ++r) {
    const Point2 p = cfg_.starts[static_cast<std::size_t>(r)];
    const auto c = truth.grid.cell_at(p);
    if (!c || truth.grid.at(*c) != Cell::Free) throw std::invalid_argument("robot start must be a free cell");
    RobotSim rs;
    rs.id = r;
    rs.pose = Pose(p.x, p.y);
    robots_.push_back(std::move(rs));
  }
  last_sensed_.assign(robots_.size(), std::nullopt);
  observable_ = truth.observable_free_count();
}

std::vector<Point2> World::positions() const {
  std::vector<Point2> out;
  for (const auto& r : robots_) out.push_back(r.pose.position());
  return out;
}

long World::ticks_for(double seconds) const {
  return static_cast<long>(std::ceil(seconds / cfg_.tick - 1e-9));
}

WorkloadStats World::stats() const {
  WorkloadStats s;
  for (const auto& r : robots_) s.distances.push_back(r.odometer);
  s.explored_area = static_cast<double>(revealed_ - initial_revealed_) * cell_area();
  return s;
}

bool World::navigate(int robot, Point2 goal) {
  const Point2 from = robots_[static_cast<std::size_t>(robot)].pose.position();
  auto path = astar_path(known_, from, goal);
  if (path.empty()) {
    // A robot cutting a corner can stand in a non-free cell; leave via the
    // closest free neighbor.
    const auto c = known_.cell_at(from);
    if (c && known_.at(*c) != Cell::Free) {
      const CellCoord cc = known_.coord(*c);
      double best = kInfinity;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!known_.in_bounds(cc.x + dx, cc.y + dy)) continue;
          const CellIndex n = known_.index(cc.x + dx, cc.y + dy);
          if (known_.at(n) != Cell::Free) continue;
          auto alt = astar_path(known_, known_.center(n), goal);
          if (alt.empty()) continue;
          alt.insert(alt.begin(), from);
          const double len = path_length(alt);
          if (len < best) {
            best = len;
            path = std::move(alt);
          }
        }
      }
    }
  }
  if (path.empty()) return false;
  set_path(robot, std::move(path));
  return true;
}

void World::set_path(int robot, std::vector<Point2> path) {
  auto& r = robots_[static_cast<std::size_t>(robot)];
  r.path = std::move(path);
  r.next = 0;
}

void World::stop(int robot) {
  auto& r = robots_[static_cast<std::size_t>(robot)];
  r.path.clear();
  r.next = 0;
}

void World::move_robots() {
  const double step = cfg_.robot_speed * cfg_.tick;
  for (auto& r : robots_) {
    r.moved = false;
    r.arrived = false;
    if (r.frozen || !r.has_path()) continue;
    double budget = step;
    Point2 p = r.pose.position();
    double traveled = 0.0;
    double heading = r.pose.theta;
    while (r.has_path()) {
      const Point2 target = r.path[r.next];
      const double d = distance(p, target);
      if (d <= budget) {
        if (d > 0) heading = std::atan2(target.y - p.y, target.x - p.x);
        p = target;
        budget -= d;
        traveled += d;
        ++r.next;
        continue;
      }
      heading = std::atan2(target.y - p.y, target.x - p.x);
      p = {p.x + (target.x - p.x) * budget / d, p.y + (target.y - p.y) * budget / d};
      traveled += budget;
      break;
    }
    r.pose = Pose(p.x, p.y, heading);
    r.odometer += traveled;
    r.moved = traveled > 0;
    r.arrived = !r.has_path();
  }
}

std::size_t World::sense() {
  std::vector<std::vector<CellIndex>> seen(robots_.size());
  for (std::size_t k = 0; k < robots_.size(); ++k) {
    const Point2 p = robots_[k].pose.position();
    if (last_sensed_[k] && *last_sensed_[k] == p) continue;
    last_sensed_[k] = p;
    seen[k] = visible_unknown(known_, *truth_, p, cfg_.sensor_radius);
    robots_[k].credit += static_cast<double>(seen[k].size());
  }
  std::size_t fresh = 0;
  for (const auto& cells : seen) {
    for (CellIndex c : cells) {
      if (known_.at(c) != Cell::Unknown) continue;
      const Cell truth_cell = truth_->grid.at(c);
      known_.set(c, truth_cell);
      ++fresh;
      if (truth_cell == Cell::Free && !truth_->is_unreachable(c)) ++observed_;
    }
  }
  revealed_ += fresh;
  if (!initial_done_) {
    initial_done_ = true;
    initial_revealed_ = revealed_;
  }
  return fresh;
}

double World::coverage() const {
  const std::size_t total = observable_;
  return total == 0 ? 1.0 : static_cast<double>(observed_) / static_cast<double>(total);
}

}  // namespace mrx
