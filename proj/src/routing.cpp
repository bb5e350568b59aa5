#include "mrx/routing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <queue>

namespace mrx {

FoldedEdges fold_weights(const RegionGraph& g) {
  FoldedEdges out;
  const std::size_t n = g.size();
  out.n_ = n;
  out.d_.assign(n * n, kInfinity);
  for (std::size_t i = 0; i < n; ++i) {
    out.d_[i * n + i] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = g.edge(static_cast<int>(i), static_cast<int>(j));
      if (d == kInfinity) continue;
      out.d_[i * n + j] = 0.5 * (g.vertices[i].weight + g.vertices[j].weight) + d;
    }
  }
  return out;
}

CostMatrix::CostMatrix(std::size_t robots, std::size_t regions)
    : robots_(robots), regions_(regions), d_((robots + regions) * (robots + regions), 0.0) {}

double CostMatrix::route_cost(std::size_t robot, std::span<const int> seq) const {
  double c = 0.0;
  std::size_t prev = robot;
  for (int r : seq) {
    const std::size_t node = region_node(static_cast<std::size_t>(r));
    c += at(prev, node);
    prev = node;
  }
  return c;
}

CostMatrix CostMatrix::single_robot(std::size_t robot) const {
  CostMatrix m(1, regions_);
  auto src = [&](std::size_t k) { return k == 0 ? robot : robots_ + (k - 1); };
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) m.set(i, j, at(src(i), src(j)));
  }
  return m;
}

std::string CostMatrix::to_csv() const {
  auto name = [&](std::size_t k) {
    return k < robots_ ? "robot" + std::to_string(k) : "region" + std::to_string(k - robots_);
  };
  std::string out = "from";
  for (std::size_t j = 0; j < size(); ++j) out += "," + name(j);
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < size(); ++i) {
    out += name(i);
    for (std::size_t j = 0; j < size(); ++j) {
      const double v = at(i, j);
      if (v == kInfinity) {
        out += ",inf";
      } else {
        std::snprintf(buf, sizeof buf, ",%.9g", v);
        out += buf;
      }
    }
    out += "\n";
  }
  return out;
}

CostMatrix build_matrix(const RegionGraph& g, std::span<const RobotAnchor> robots,
                        const RrgDistance& rrg_distance) {
  const std::size_t nr = robots.size();
  const std::size_t n = g.size();
  CostMatrix m(nr, n);
  const FoldedEdges folded = fold_weights(g);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = rrg_distance(robots[r].rrg_vertex, g.vertices[i].viewpoint.rrg_vertex);
      m.set(r, m.region_node(i), d == kInfinity ? kInfinity : d + 0.5 * g.vertices[i].weight);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m.set(m.region_node(i), m.region_node(j), folded.at(i, j));
  }
  return m;
}

UnreachableRegions::UnreachableRegions(std::vector<int> ids)
    : std::runtime_error([&] {
        std::string msg = "regions unreachable from every robot:";
        for (int i : ids) msg += " " + std::to_string(i);
        return msg;
      }()),
      ids_(std::move(ids)) {}

namespace {

constexpr double kEvaluationsPerMs = 20000.0;

bool approx_equal(double a, double b) {
  if (a == b) return true;
  if (std::isinf(a) || std::isinf(b)) return false;
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

struct Key {
  double primary = 0;
  double secondary = 0;
};

// -1 when a is better, +1 when b is better, 0 on a tie.
int compare_keys(const Key& a, const Key& b) {
  if (!approx_equal(a.primary, b.primary)) return a.primary < b.primary ? -1 : 1;
  if (!approx_equal(a.secondary, b.secondary)) return a.secondary < b.secondary ? -1 : 1;
  return 0;
}

Key key_of(double max_cost, double total, Objective obj) {
  return obj == Objective::MinMax ? Key{max_cost, total} : Key{total, max_cost};
}

Key key_of(const RoutePlan& p, Objective obj) {
  double mx = 0;
  for (double c : p.route_costs) mx = std::max(mx, c);
  return key_of(mx, p.total, obj);
}

// -1 / 0 / +1 comparison including the lexicographic route tie-break.
int compare_plans(const RoutePlan& a, const RoutePlan& b, Objective obj) {
  const int k = compare_keys(key_of(a, obj), key_of(b, obj));
  if (k != 0) return k;
  if (a.routes == b.routes) return 0;
  return a.routes < b.routes ? -1 : 1;
}

void check_reachable(const CostMatrix& m) {
  std::vector<std::uint8_t> seen(m.size(), 0);
  std::queue<std::size_t> q;
  for (std::size_t r = 0; r < m.robots(); ++r) {
    seen[r] = 1;
    q.push(r);
  }
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t v = m.robots(); v < m.size(); ++v) {
      if (!seen[v] && m.at(u, v) != kInfinity) {
        seen[v] = 1;
        q.push(v);
      }
    }
  }
  std::vector<int> bad;
  for (std::size_t i = 0; i < m.regions(); ++i) {
    if (!seen[m.region_node(i)]) bad.push_back(static_cast<int>(i));
  }
  if (!bad.empty()) throw UnreachableRegions(std::move(bad));
}

// Suffix Held-Karp table: best[S * n + j] = cheapest path that starts at
// region j and visits every region of S (j in S).
class SubsetTable {
 public:
  explicit SubsetTable(const CostMatrix& m) : m_(m), n_(m.regions()) {
    const std::size_t full = std::size_t{1} << n_;
    best_.assign(full * n_, kInfinity);
    for (std::size_t s = 1; s < full; ++s) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (!(s >> j & 1)) continue;
        const std::size_t rest = s & ~(std::size_t{1} << j);
        if (rest == 0) {
          best_[s * n_ + j] = 0.0;
          continue;
        }
        double b = kInfinity;
        for (std::size_t k = 0; k < n_; ++k) {
          if (!(rest >> k & 1)) continue;
          b = std::min(b, link(j, k) + best_[rest * n_ + k]);
        }
        best_[s * n_ + j] = b;
      }
    }
  }

  double from_robot(std::size_t robot, std::size_t s) const {
    if (s == 0) return 0.0;
    double b = kInfinity;
    for (std::size_t j = 0; j < n_; ++j) {
      if (s >> j & 1) b = std::min(b, m_.at(robot, m_.region_node(j)) + best_[s * n_ + j]);
    }
    return b;
  }

  // Lexicographically smallest visiting order achieving from_robot(robot, s).
  std::vector<int> order(std::size_t robot, std::size_t s) const {
    std::vector<int> seq;
    if (s == 0) return seq;
    const double target = from_robot(robot, s);
    std::size_t cur = 0;
    for (std::size_t j = 0; j < n_; ++j) {
      if ((s >> j & 1) && approx_equal(m_.at(robot, m_.region_node(j)) + best_[s * n_ + j], target)) {
        cur = j;
        break;
      }
    }
    seq.push_back(static_cast<int>(cur));
    std::size_t rest = s & ~(std::size_t{1} << cur);
    while (rest != 0) {
      const double need = best_[(rest | (std::size_t{1} << cur)) * n_ + cur];
      std::size_t next = n_;
      for (std::size_t k = 0; k < n_; ++k) {
        if ((rest >> k & 1) && approx_equal(link(cur, k) + best_[rest * n_ + k], need)) {
          next = k;
          break;
        }
      }
      if (next == n_) {  // numerically unreachable; take any remaining region
        next = static_cast<std::size_t>(std::countr_zero(rest));
      }
      seq.push_back(static_cast<int>(next));
      rest &= ~(std::size_t{1} << next);
      cur = next;
    }
    return seq;
  }

 private:
  double link(std::size_t a, std::size_t b) const { return m_.at(m_.region_node(a), m_.region_node(b)); }

  const CostMatrix& m_;
  std::size_t n_;
  std::vector<double> best_;
};

RoutePlan solve_exact(const CostMatrix& m, Objective obj) {
  const std::size_t n = m.regions();
  const std::size_t nr = m.robots();
  if (n > kExactMaxRegions) throw std::invalid_argument("instance too large for the exact solver");
  double combos = std::pow(static_cast<double>(nr), static_cast<double>(n));
  if (combos > 2e7) throw std::invalid_argument("instance too large for the exact solver");

  const SubsetTable table(m);
  const std::size_t full = std::size_t{1} << n;
  std::vector<double> cost(nr * full);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t s = 0; s < full; ++s) cost[r * full + s] = table.from_robot(r, s);
  }

  std::vector<std::size_t> assign(n, 0);
  std::vector<std::size_t> masks(nr);
  Key best_key{kInfinity, kInfinity};
  std::vector<std::size_t> best_masks;
  RoutePlan best_plan;
  bool have = false;
  for (;;) {
    std::fill(masks.begin(), masks.end(), 0);
    for (std::size_t i = 0; i < n; ++i) masks[assign[i]] |= std::size_t{1} << i;
    double mx = 0;
    double total = 0;
    for (std::size_t r = 0; r < nr; ++r) {
      const double c = cost[r * full + masks[r]];
      mx = std::max(mx, c);
      total += c;
    }
    const Key k = key_of(mx, total, obj);
    const int cmp = have ? compare_keys(k, best_key) : -1;
    if (cmp <= 0) {
      std::vector<std::vector<int>> routes(nr);
      for (std::size_t r = 0; r < nr; ++r) routes[r] = table.order(r, masks[r]);
      RoutePlan plan = evaluate_plan(m, std::move(routes), obj);
      if (cmp < 0 || compare_plans(plan, best_plan, obj) < 0) {
        best_key = k;
        best_plan = std::move(plan);
        have = true;
      }
    }
    // Odometer over robot assignments.
    std::size_t i = 0;
    while (i < n && ++assign[i] == nr) assign[i++] = 0;
    if (i == n) break;
  }
  return best_plan;
}

class LocalSearch {
 public:
  LocalSearch(const CostMatrix& m, Objective obj, long long budget)
      : m_(m), obj_(obj), budget_(budget) {}

  bool exhausted() const { return used_ >= budget_; }

  /// Cheapest insertion in the given order, optionally after handing each
  /// robot its nearest region.
  RoutePlan construct(const std::vector<int>& insertion_order, bool seed_nearest) {
    const std::size_t nr = m_.robots();
    std::vector<std::vector<int>> routes(nr);
    std::vector<std::uint8_t> taken(m_.regions(), 0);
    for (std::size_t r = 0; r < nr && seed_nearest; ++r) {
      int pick = -1;
      double best = kInfinity;
      for (std::size_t j = 0; j < m_.regions(); ++j) {
        const double c = m_.at(r, m_.region_node(j));
        if (!taken[j] && c < best) {
          best = c;
          pick = static_cast<int>(j);
        }
      }
      if (pick >= 0) {
        routes[r].push_back(pick);
        taken[static_cast<std::size_t>(pick)] = 1;
      }
    }
    std::vector<double> costs(nr);
    for (std::size_t r = 0; r < nr; ++r) costs[r] = m_.route_cost(r, routes[r]);
    for (int region : insertion_order) {
      if (taken[static_cast<std::size_t>(region)]) continue;
      Key best_key{kInfinity, kInfinity};
      std::size_t best_r = 0;
      std::size_t best_pos = 0;
      bool found = false;
      for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t pos = 0; pos <= routes[r].size(); ++pos) {
          std::vector<int> trial = routes[r];
          trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(pos), region);
          const double c = m_.route_cost(r, trial);
          ++used_;
          const Key k = replaced_key(costs, r, c, r, costs[r]);
          if (!found || compare_keys(k, best_key) < 0) {
            best_key = k;
            best_r = r;
            best_pos = pos;
            found = true;
          }
        }
      }
      routes[best_r].insert(routes[best_r].begin() + static_cast<std::ptrdiff_t>(best_pos), region);
      costs[best_r] = m_.route_cost(best_r, routes[best_r]);
      taken[static_cast<std::size_t>(region)] = 1;
    }
    return evaluate_plan(m_, std::move(routes), obj_);
  }

  void improve(RoutePlan& plan) {
    while (!exhausted() && (two_opt(plan) || relocate(plan) || swap(plan))) {
    }
  }

 private:
  // Key after replacing the costs of routes a and b.
  Key replaced_key(const std::vector<double>& costs, std::size_t a, double ca, std::size_t b,
                   double cb) const {
    double mx = 0;
    double total = 0;
    for (std::size_t r = 0; r < costs.size(); ++r) {
      const double c = r == a ? ca : (r == b ? cb : costs[r]);
      mx = std::max(mx, c);
      total += c;
    }
    return key_of(mx, total, obj_);
  }

  void accept(RoutePlan& plan) { plan = evaluate_plan(m_, std::move(plan.routes), obj_); }

  bool two_opt(RoutePlan& plan) {
    const Key current = key_of(plan, obj_);
    for (std::size_t r = 0; r < plan.routes.size(); ++r) {
      auto& route = plan.routes[r];
      for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        for (std::size_t j = i + 1; j < route.size(); ++j) {
          if (exhausted()) return false;
          std::vector<int> trial = route;
          std::reverse(trial.begin() + static_cast<std::ptrdiff_t>(i),
                       trial.begin() + static_cast<std::ptrdiff_t>(j) + 1);
          const double c = m_.route_cost(r, trial);
          ++used_;
          if (compare_keys(replaced_key(plan.route_costs, r, c, r, c), current) < 0) {
            route = std::move(trial);
            accept(plan);
            return true;
          }
        }
      }
    }
    return false;
  }

  bool relocate(RoutePlan& plan) {
    const Key current = key_of(plan, obj_);
    const std::size_t nr = plan.routes.size();
    for (std::size_t a = 0; a < nr; ++a) {
      for (std::size_t i = 0; i < plan.routes[a].size(); ++i) {
        std::vector<int> from = plan.routes[a];
        const int region = from[i];
        from.erase(from.begin() + static_cast<std::ptrdiff_t>(i));
        const double ca = m_.route_cost(a, from);
        for (std::size_t b = 0; b < nr; ++b) {
          const std::vector<int>& base = a == b ? from : plan.routes[b];
          for (std::size_t pos = 0; pos <= base.size(); ++pos) {
            if (a == b && pos == i) continue;
            if (exhausted()) return false;
            std::vector<int> to = base;
            to.insert(to.begin() + static_cast<std::ptrdiff_t>(pos), region);
            const double cb = m_.route_cost(b, to);
            ++used_;
            const Key k = a == b ? replaced_key(plan.route_costs, a, cb, a, cb)
                                 : replaced_key(plan.route_costs, a, ca, b, cb);
            if (compare_keys(k, current) < 0) {
              if (a == b) {
                plan.routes[a] = std::move(to);
              } else {
                plan.routes[a] = std::move(from);
                plan.routes[b] = std::move(to);
              }
              accept(plan);
              return true;
            }
          }
        }
      }
    }
    return false;
  }

  bool swap(RoutePlan& plan) {
    const Key current = key_of(plan, obj_);
    const std::size_t nr = plan.routes.size();
    for (std::size_t a = 0; a < nr; ++a) {
      for (std::size_t b = a + 1; b < nr; ++b) {
        for (std::size_t i = 0; i < plan.routes[a].size(); ++i) {
          for (std::size_t j = 0; j < plan.routes[b].size(); ++j) {
            if (exhausted()) return false;
            std::vector<int> ra = plan.routes[a];
            std::vector<int> rb = plan.routes[b];
            std::swap(ra[i], rb[j]);
            const double ca = m_.route_cost(a, ra);
            const double cb = m_.route_cost(b, rb);
            ++used_;
            if (compare_keys(replaced_key(plan.route_costs, a, ca, b, cb), current) < 0) {
              plan.routes[a] = std::move(ra);
              plan.routes[b] = std::move(rb);
              accept(plan);
              return true;
            }
          }
        }
      }
    }
    return false;
  }

  const CostMatrix& m_;
  Objective obj_;
  long long budget_;
  long long used_ = 0;
};

RoutePlan solve_heuristic(const CostMatrix& m, const SolverOptions& opts) {
  const auto budget = static_cast<long long>(std::max(1.0, opts.time_budget_ms) * kEvaluationsPerMs);
  LocalSearch search(m, opts.objective, budget);
  Rng rng(opts.seed);
  std::vector<int> order(m.regions());
  std::iota(order.begin(), order.end(), 0);
  RoutePlan best;
  bool have = false;
  for (int start = 0; start < std::max(1, opts.restarts); ++start) {
    if (start > 0) {
      if (search.exhausted()) break;
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[uniform_index(rng, i)]);
      }
    }
    RoutePlan plan = search.construct(order, start == 0);
    search.improve(plan);
    if (!have || compare_plans(plan, best, opts.objective) < 0) {
      best = std::move(plan);
      have = true;
    }
  }
  return best;
}

}  // namespace

RoutePlan evaluate_plan(const CostMatrix& matrix, std::vector<std::vector<int>> routes,
                        Objective objective) {
  RoutePlan p;
  p.routes = std::move(routes);
  p.route_costs.resize(p.routes.size());
  double mx = 0;
  for (std::size_t r = 0; r < p.routes.size(); ++r) {
    p.route_costs[r] = matrix.route_cost(r, p.routes[r]);
    p.total += p.route_costs[r];
    mx = std::max(mx, p.route_costs[r]);
  }
  p.objective = objective == Objective::MinMax ? mx : p.total;
  return p;
}

RoutePlan solve_vrp(const CostMatrix& matrix, const SolverOptions& opts) {
  if (matrix.robots() < 1) throw std::invalid_argument("solve_vrp needs at least one robot");
  if (matrix.regions() == 0) {
    return evaluate_plan(matrix, std::vector<std::vector<int>>(matrix.robots()), opts.objective);
  }
  check_reachable(matrix);
  if (opts.mode == SolveMode::Exact) return solve_exact(matrix, opts.objective);
  return solve_heuristic(matrix, opts);
}

std::vector<int> solve_tsp(const CostMatrix& matrix, const SolverOptions& opts) {
  if (matrix.robots() != 1) throw std::invalid_argument("solve_tsp expects exactly one robot");
  if (matrix.regions() == 0) return {};
  check_reachable(matrix);
  if (matrix.regions() <= 15) {
    const SubsetTable table(matrix);
    return table.order(0, (std::size_t{1} << matrix.regions()) - 1);
  }
  SolverOptions h = opts;
  h.mode = SolveMode::Heuristic;
  return solve_heuristic(matrix, h).routes.front();
}

std::vector<Point2> guide_path(std::span<const int> sequence, const RegionGraph& g, const Rrg& rrg,
                               int robot_vertex) {
  if (sequence.empty()) throw std::invalid_argument("guide path needs a non-empty sequence");
  const int target = g.vertices.at(static_cast<std::size_t>(sequence.front())).viewpoint.rrg_vertex;
  auto path = shortest_path(rrg, robot_vertex, target);
  if (path.empty()) throw std::runtime_error("first region is disconnected from the robot in the RRG");
  return path;
}

}  // namespace mrx
