#include "mrx/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <tuple>
#include <stdexcept>

#include "mrx/baselines.hpp"
#include "mrx/framework.hpp"

namespace mrx {

std::vector<Point2> astar_path(const OccupancyGrid& grid, Point2 from, Point2 to) {
  const auto s = grid.cell_at(from);
  const auto t = grid.cell_at(to);
  if (!s || !t) throw std::invalid_argument("path endpoint outside the grid");
  if (grid.at(*s) != Cell::Free || grid.at(*t) != Cell::Free) return {};
  if (from == to) return {from};
  if (*s == *t) return {from, to};

  const double res = grid.resolution();
  const CellCoord goal = grid.coord(*t);
  auto h = [&](CellCoord c) {
    const double dx = std::abs(c.x - goal.x);
    const double dy = std::abs(c.y - goal.y);
    return res * (std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy));
  };
  const std::size_t n = grid.size();
  std::vector<double> g(n, kInfinity);
  std::vector<CellIndex> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  using Item = std::tuple<double, double, CellIndex>;  // f, -g, cell
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  g[static_cast<std::size_t>(*s)] = 0.0;
  open.emplace(h(grid.coord(*s)), 0.0, *s);
  while (!open.empty()) {
    const auto [f, neg_g, c] = open.top();
    open.pop();
    (void)f;
    (void)neg_g;
    if (closed[static_cast<std::size_t>(c)]) continue;
    closed[static_cast<std::size_t>(c)] = 1;
    if (c == *t) break;
    const CellCoord cc = grid.coord(c);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = cc.x + dx;
        const int ny = cc.y + dy;
        if (!grid.in_bounds(nx, ny) || grid.at(nx, ny) != Cell::Free) continue;
        if (dx != 0 && dy != 0 && (grid.at(cc.x + dx, cc.y) != Cell::Free || grid.at(cc.x, cc.y + dy) != Cell::Free)) {
          continue;
        }
        const CellIndex m = grid.index(nx, ny);
        const double ng = g[static_cast<std::size_t>(c)] + res * ((dx != 0 && dy != 0) ? std::sqrt(2.0) : 1.0);
        if (ng < g[static_cast<std::size_t>(m)]) {
          g[static_cast<std::size_t>(m)] = ng;
          parent[static_cast<std::size_t>(m)] = c;
          open.emplace(ng + h({nx, ny}), -ng, m);
        }
      }
    }
  }
  if (!closed[static_cast<std::size_t>(*t)]) return {};
  std::vector<CellIndex> cells;
  for (CellIndex c = parent[static_cast<std::size_t>(*t)]; c != *s; c = parent[static_cast<std::size_t>(c)]) {
    cells.push_back(c);
  }
  std::vector<Point2> out{from};
  for (auto it = cells.rbegin(); it != cells.rend(); ++it) out.push_back(grid.center(*it));
  out.push_back(to);
  return out;
}

double path_length(const std::vector<Point2>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += distance(path[i - 1], path[i]);
  return len;
}

std::vector<Point2> default_starts(const OccupancyGrid& grid, int robots) {
  std::optional<CellIndex> seed;
  double best = kInfinity;
  for (CellIndex c = 0; c < static_cast<CellIndex>(grid.size()); ++c) {
    if (grid.at(c) != Cell::Free) continue;
    const Point2 p = grid.center(c);
    const double d = p.x + p.y;
    if (d < best) {
      best = d;
      seed = c;
    }
  }
  if (!seed) throw std::invalid_argument("map has no free cell");
  // Breadth-first over free cells, keeping cells at least 1 m from the chosen ones.
  std::vector<Point2> out;
  std::vector<std::uint8_t> seen(grid.size(), 0);
  std::queue<CellIndex> q;
  q.push(*seed);
  seen[static_cast<std::size_t>(*seed)] = 1;
  while (!q.empty() && out.size() < static_cast<std::size_t>(robots)) {
    const CellIndex c = q.front();
    q.pop();
    const Point2 p = grid.center(c);
    if (std::all_of(out.begin(), out.end(), [&](Point2 o) { return distance(o, p) >= 1.0 - 1e-9; })) out.push_back(p);
    const CellCoord cc = grid.coord(c);
    const int dx[] = {1, 0, -1, 0};
    const int dy[] = {0, 1, 0, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = cc.x + dx[k];
      const int ny = cc.y + dy[k];
      if (!grid.in_bounds(nx, ny)) continue;
      const CellIndex m = grid.index(nx, ny);
      if (seen[static_cast<std::size_t>(m)] || grid.at(m) != Cell::Free) continue;
      seen[static_cast<std::size_t>(m)] = 1;
      q.push(m);
    }
  }
  if (out.size() < static_cast<std::size_t>(robots)) throw std::invalid_argument("not enough room for the robots");
  return out;
}

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const ScenarioConfig& cfg) {
  switch (kind) {
    case StrategyKind::Hierarchical: return std::make_unique<HierarchicalStrategy>(cfg);
    case StrategyKind::Ctr: return std::make_unique<CtrStrategy>(cfg);
    case StrategyKind::Mtsp: return std::make_unique<MtspStrategy>(cfg);
    case StrategyKind::Gre: return std::make_unique<GreStrategy>(cfg);
  }
  throw std::invalid_argument("unknown strategy");
}

namespace {

GroundTruth with_starts(const GroundTruth& truth, const std::vector<Point2>& starts) {
  GroundTruth out;
  out.grid = truth.grid;
  for (const Point2& p : starts) {
    const auto c = truth.grid.cell_at(p);
    if (!c || truth.grid.at(*c) != Cell::Free) throw std::invalid_argument("robot start must be a free cell");
    out.starts.push_back(*c);
  }
  const auto reach = reachable_free_multi(out.grid, out.starts);
  out.unreachable.assign(out.grid.size(), 0);
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    out.unreachable[i] = out.grid.at(static_cast<CellIndex>(i)) == Cell::Free && !reach[i];
  }
  return out;
}

}  // namespace

RunResult run(const GroundTruth& truth, const ScenarioConfig& cfg_in, const TickObserver& observer) {
  ScenarioConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.starts.empty()) cfg.starts = default_starts(truth.grid, cfg.robots);
  const GroundTruth gt = with_starts(truth, cfg.starts);
  World w(gt, cfg);
  w.log().header(config_line(cfg));
  auto strategy = make_strategy(cfg.strategy, cfg);

  Metrics m;
  w.sense();
  w.event("sim", "START");
  m.curve.push_back(w.union_area());
  if (!w.complete()) strategy->begin(w);
  bool go = !observer || observer(w, *strategy);
  const long cap = w.ticks_for(cfg.time_cap);
  while (go && !w.complete() && w.tick() < cap) {
    w.advance_tick();
    strategy->before_motion(w);
    const bool planning = strategy->planning();
    w.move_robots();
    if (planning) {
      for (const auto& r : w.robots()) {
        if (strategy->holds_work(r.id) && !r.moved) {
          ++m.idle_while_planning;
          w.event(World::robot_node(r.id), "IDLE");
        }
      }
    }
    w.sense();
    if (!w.complete()) strategy->after_motion(w);
    m.curve.push_back(w.union_area());
    if (observer && !observer(w, *strategy)) go = false;
  }

  m.complete = w.complete();
  m.ticks = w.tick();
  m.aet = w.time();
  m.coverage = w.coverage();
  m.plans = strategy->plans();
  double credit_cells = 0.0;
  for (const auto& r : w.robots()) {
    m.odometers.push_back(r.odometer);
    m.credits.push_back(r.credit * w.cell_area());
    credit_cells += r.credit;
    m.adt += r.odometer;
  }
  m.adt /= static_cast<double>(w.robots().size());
  const auto union_cells = static_cast<double>(w.revealed_cells());
  m.aor = union_cells > 0 ? credit_cells / union_cells : 1.0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "aet=%.3f adt=%.3f aor=%.6f coverage=%.6f plans=%d idle=%ld", m.aet, m.adt, m.aor,
                m.coverage, m.plans, m.idle_while_planning);
  w.event("sim", m.complete ? "COMPLETE" : "INCOMPLETE", buf);
  return {std::move(m), w.log().text()};
}

std::string metrics_csv_header() { return "scenario,strategy,robots,seed,complete,aet,adt,aor,coverage"; }

std::string metrics_csv_row(const ScenarioConfig& cfg, const Metrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%s,%d,%llu,%d,%.3f,%.3f,%.6f,%.6f", cfg.map_name.c_str(),
                std::string(to_string(cfg.strategy)).c_str(), cfg.robots, static_cast<unsigned long long>(cfg.seed),
                m.complete ? 1 : 0, m.aet, m.adt, m.aor, m.coverage);
  return buf;
}

}  // namespace mrx
