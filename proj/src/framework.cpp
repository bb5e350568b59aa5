#include "mrx/framework.hpp"

#include <algorithm>
#include <cstdio>

#include "mrx/simulator.hpp"

namespace mrx {

std::string_view to_string(ReportStatus s) {
  switch (s) {
    case ReportStatus::Executing: return "Executing";
    case ReportStatus::Done: return "Done";
    case ReportStatus::Failed: return "Failed";
  }
  return "?";
}

std::string_view to_string(CenterState s) {
  switch (s) {
    case CenterState::Idle: return "Idle";
    case CenterState::Planning: return "Planning";
    case CenterState::Monitoring: return "Monitoring";
  }
  return "?";
}

std::string_view to_string(ClientState s) {
  switch (s) {
    case ClientState::Idle: return "Idle";
    case ClientState::Transferring: return "Transferring";
    case ClientState::Exploring: return "Exploring";
    case ClientState::AwaitingTask: return "AwaitingTask";
  }
  return "?";
}

bool progress_check(const ProgressReport& report, const Subtask& current, double threshold) {
  if (report.epoch != current.epoch) return false;
  return report.explored + report.remaining - current.expected_workload >= threshold;
}

bool legal_transition(CenterState from, CenterState to) {
  switch (from) {
    case CenterState::Idle: return to == CenterState::Planning;
    case CenterState::Planning: return to == CenterState::Monitoring;
    case CenterState::Monitoring: return to == CenterState::Planning;
  }
  return false;
}

bool legal_transition(ClientState from, ClientState to) {
  switch (from) {
    case ClientState::Idle:
    case ClientState::AwaitingTask:
      return to == ClientState::Transferring || to == ClientState::Exploring || to == ClientState::AwaitingTask;
    case ClientState::Transferring:
    case ClientState::Exploring:
      return to != ClientState::Idle;
  }
  return false;
}

void MessageBus::send(int sender, int receiver, long now, Payload payload) {
  queue_.push_back({sender, receiver, now, now + latency_, seq_++, std::move(payload)});
}

std::vector<Envelope> MessageBus::deliver(long now) {
  std::vector<Envelope> due;
  std::deque<Envelope> rest;
  for (auto& e : queue_) {
    if (e.deliver <= now) {
      due.push_back(std::move(e));
    } else {
      rest.push_back(std::move(e));
    }
  }
  queue_ = std::move(rest);
  std::stable_sort(due.begin(), due.end(), [](const Envelope& a, const Envelope& b) {
    return a.deliver != b.deliver ? a.deliver < b.deliver : a.seq < b.seq;
  });
  return due;
}

CenterPlan center_plan(Rrg& rrg, const PlanningInputs& in, const PlannerConfig& cfg, int epoch) {
  CenterPlan out;
  out.subtasks.resize(in.robots.size());
  const auto snap = perceive(rrg, in, cfg);
  if (snap.complete()) {
    out.complete = true;
    return out;
  }
  if (snap.surviving.empty()) return out;
  auto model = build_model(snap, in, cfg);
  auto routes = plan_routes(snap, model, cfg.solver);
  const double rate = workload_rate(in.stats, cfg.sensor_radius);
  const OccupancyGrid& map = *in.map;
  for (std::size_t r = 0; r < routes.plan.routes.size(); ++r) {
    const auto& seq = routes.plan.routes[r];
    if (seq.empty()) continue;
    Subtask t;
    t.roi = RoiMask(map.width(), map.height(), false);
    for (int id : seq) {
      const auto& v = model.graph.vertices[static_cast<std::size_t>(id)];
      for (CellIndex c : v.cells) t.roi.insert(c);
      t.cells.insert(t.cells.end(), v.cells.begin(), v.cells.end());
      t.expected_workload += v.weight;
    }
    std::sort(t.cells.begin(), t.cells.end());
    t.guide_path = std::move(routes.guide_paths[r]);
    t.epoch = epoch;
    t.rate = rate;
    t.regions = seq;
    out.subtasks[r] = std::move(t);
  }
  out.graph = std::move(model.graph);
  out.routes = std::move(routes.plan);
  return out;
}

LocalPlan client_plan(Rrg& rrg, const PlanningInputs& in, const PlannerConfig& cfg) {
  LocalPlan out;
  const auto snap = perceive(rrg, in, cfg);
  if (snap.complete()) {
    out.done = true;
    return out;
  }
  if (snap.surviving.empty()) {
    out.failed = true;
    return out;
  }
  auto model = build_model(snap, in, cfg);
  std::vector<int> keep;
  for (std::size_t i = 0; i < model.graph.size(); ++i) {
    if (model.matrix.at(0, model.matrix.region_node(i)) < kInfinity) keep.push_back(static_cast<int>(i));
  }
  if (keep.empty()) {
    out.failed = true;
    return out;
  }
  std::vector<int> order;
  try {
    order = solve_tsp(sub_matrix(model.matrix, 0, keep), cfg.solver);
  } catch (const UnreachableRegions&) {
    out.failed = true;
    return out;
  }
  for (int& o : order) o = keep[static_cast<std::size_t>(o)];
  out.goal = region_goal(model.graph.vertices[static_cast<std::size_t>(order.front())], *in.map, in.robots.front());
  out.order = std::move(order);
  out.graph = std::move(model.graph);
  return out;
}

HierarchicalStrategy::HierarchicalStrategy(const ScenarioConfig& cfg) : cfg_(cfg), planner_(cfg.planner()) {}

void HierarchicalStrategy::set_center(World& w, CenterState s) {
  if (s == center_) return;
  if (!legal_transition(center_, s)) throw std::logic_error("illegal center transition");
  w.event("center", "STATE", std::string(to_string(center_)) + "->" + std::string(to_string(s)));
  center_ = s;
}

void HierarchicalStrategy::set_client(World& w, int k, ClientState s) {
  auto& c = clients_[static_cast<std::size_t>(k)];
  if (s == c.state) return;
  if (!legal_transition(c.state, s)) throw std::logic_error("illegal client transition");
  w.event(World::robot_node(k), "STATE", std::string(to_string(c.state)) + "->" + std::string(to_string(s)));
  c.state = s;
}

void HierarchicalStrategy::begin(World& w) {
  clients_.assign(w.robots().size(), Client{});
  center_view_.assign(w.robots().size(), std::nullopt);
  progress_every_ = std::max(1L, w.ticks_for(cfg_.progress_period));
  bus_ = MessageBus(w.ticks_for(cfg_.message_latency));
  start_planning(w, "start");
  if (center_ == CenterState::Planning && w.tick() >= planning_until_) finish_planning(w);
}

void HierarchicalStrategy::start_planning(World& w, const std::string& reason) {
  set_center(w, CenterState::Planning);
  ++epoch_;
  ++plans_;
  PlanningInputs in;
  in.map = &w.known();
  const RoiMask all = RoiMask::full(w.known());
  in.roi = &all;
  in.robots = w.positions();
  in.stats = w.stats();
  in.seed = w.next_seed();
  pending_ = center_plan(w.rrg(), in, planner_, epoch_);
  waiting_.clear();
  if (reason == "idle") {
    for (std::size_t k = 0; k < clients_.size(); ++k) {
      if (!holds_work(static_cast<int>(k))) waiting_.push_back(static_cast<int>(k));
    }
  }
  planning_until_ = w.tick() + w.ticks_for(cfg_.center_latency);
  char buf[96];
  std::snprintf(buf, sizeof buf, "epoch=%d reason=%s regions=%zu", epoch_, reason.c_str(), pending_->graph.size());
  w.event("center", "PLAN", buf);
}

void HierarchicalStrategy::finish_planning(World& w) {
  CenterPlan plan = std::move(*pending_);
  pending_.reset();
  complete_ = plan.complete;
  if (plan.complete) w.event("center", "COMPLETE");
  // An idle round that finds no work for the waiting clients leaves the
  // busy ones alone.
  if (!plan.complete && !waiting_.empty() &&
      std::none_of(waiting_.begin(), waiting_.end(), [&](int k) { return plan.subtasks[static_cast<std::size_t>(k)].has_value(); })) {
    w.event("center", "DISCARD", "epoch=" + std::to_string(epoch_));
    set_center(w, CenterState::Monitoring);
    return;
  }
  for (std::size_t k = 0; k < plan.subtasks.size(); ++k) {
    if (!plan.subtasks[k]) continue;
    const Subtask& t = *plan.subtasks[k];
    char buf[96];
    std::snprintf(buf, sizeof buf, "robot=%zu epoch=%d regions=%zu cells=%zu", k, t.epoch, t.regions.size(),
                  t.cells.size());
    w.event("center", "DISPATCH", buf);
    center_view_[k] = t;
    bus_.send(kCenterNode, static_cast<int>(k), w.tick(), t);
  }
  auto& view = w.plan_view();
  view.regions = std::move(plan.graph.vertices);
  view.routes = std::move(plan.routes.routes);
  view.robots = w.positions();
  set_center(w, CenterState::Monitoring);
}

void HierarchicalStrategy::receive(World& w, int k, Subtask task) {
  auto& c = clients_[static_cast<std::size_t>(k)];
  if (task.epoch <= c.acknowledged) return;
  c.acknowledged = task.epoch;
  c.credit_at_dispatch = w.robots()[static_cast<std::size_t>(k)].credit;
  c.dropped_any = false;
  c.goal.reset();
  c.task = std::move(task);
  char buf[48];
  std::snprintf(buf, sizeof buf, "epoch=%d", c.task->epoch);
  w.event(World::robot_node(k), "SUBTASK", buf);

  const auto& known = w.known();
  const bool any_unknown = std::any_of(c.task->cells.begin(), c.task->cells.end(),
                                       [&](CellIndex i) { return known.at(i) == Cell::Unknown; });
  if (!any_unknown) {
    w.stop(k);
    set_client(w, k, ClientState::AwaitingTask);
    report(w, k, ReportStatus::Done);
    return;
  }
  const auto& guide = c.task->guide_path;
  if (!guide.empty() && w.navigate(k, guide.front())) {
    auto& r = w.robots()[static_cast<std::size_t>(k)];
    std::vector<Point2> path = r.path;
    path.insert(path.end(), guide.begin() + 1, guide.end());
    w.set_path(k, std::move(path));
    set_client(w, k, ClientState::Transferring);
    return;
  }
  set_client(w, k, ClientState::Exploring);
  local_replan(w, k);
}

void HierarchicalStrategy::local_replan(World& w, int k) {
  auto& c = clients_[static_cast<std::size_t>(k)];
  PlannerConfig local = planner_;
  local.growth.samples = planner_.growth.samples / 4;
  local.solver.time_budget_ms = planner_.solver.time_budget_ms / 5;
  for (int attempt = 0; attempt < 4; ++attempt) {
    PlanningInputs in;
    in.map = &w.known();
    in.roi = &c.task->roi;
    in.robots = {w.robots()[static_cast<std::size_t>(k)].pose.position()};
    in.stats = w.stats();
    in.seed = w.next_seed();
    const LocalPlan lp = client_plan(w.rrg(), in, local);
    if (lp.done || lp.failed) {
      w.stop(k);
      c.goal.reset();
      set_client(w, k, ClientState::AwaitingTask);
      report(w, k, lp.done && !c.dropped_any ? ReportStatus::Done : ReportStatus::Failed);
      return;
    }
    if (w.navigate(k, *lp.goal)) {
      c.goal = lp.goal;
      char buf[96];
      std::snprintf(buf, sizeof buf, "x=%.3f y=%.3f regions=%zu", lp.goal->x, lp.goal->y, lp.order.size());
      w.event(World::robot_node(k), "GOAL", buf);
      set_client(w, k, ClientState::Exploring);
      return;
    }
    // Unreachable goal: drop that region from the roi and plan again.
    for (CellIndex cell : lp.graph.vertices[static_cast<std::size_t>(lp.order.front())].cells) c.task->roi.erase(cell);
    c.dropped_any = true;
  }
  w.stop(k);
  c.goal.reset();
  set_client(w, k, ClientState::AwaitingTask);
  report(w, k, ReportStatus::Failed);
}

ProgressReport HierarchicalStrategy::make_report(const World& w, int k, ReportStatus status) const {
  const auto& c = clients_[static_cast<std::size_t>(k)];
  ProgressReport r;
  r.client = k;
  r.status = status;
  if (!c.task) return r;
  r.epoch = c.task->epoch;
  const double area = w.cell_area();
  r.explored = c.task->rate * (w.robots()[static_cast<std::size_t>(k)].credit - c.credit_at_dispatch) * area;
  std::size_t unknown = 0;
  for (CellIndex i : c.task->cells) {
    if (w.known().at(i) == Cell::Unknown && c.task->roi.contains(i)) ++unknown;
  }
  r.remaining = c.task->rate * static_cast<double>(unknown) * area;
  return r;
}

void HierarchicalStrategy::report(World& w, int k, ReportStatus status) {
  const ProgressReport r = make_report(w, k, status);
  if (status != ReportStatus::Executing) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "status=%s epoch=%d explored=%.3f remaining=%.3f",
                  std::string(to_string(status)).c_str(), r.epoch, r.explored, r.remaining);
    w.event(World::robot_node(k), "REPORT", buf);
  }
  bus_.send(k, kCenterNode, w.tick(), r);
}

void HierarchicalStrategy::before_motion(World& w) {
  for (auto& env : bus_.deliver(w.tick())) {
    if (env.receiver != kCenterNode) {
      if (auto* t = std::get_if<Subtask>(&env.payload)) receive(w, env.receiver, std::move(*t));
      continue;
    }
    if (auto* r = std::get_if<ProgressReport>(&env.payload)) {
      const auto& view = center_view_[static_cast<std::size_t>(r->client)];
      if (!view || view->epoch != r->epoch) continue;
      if (r->status != ReportStatus::Executing) {
        trigger_ = std::string(to_string(r->status)) + "-robot" + std::to_string(r->client);
      } else if (progress_check(*r, *view, cfg_.w_threshold)) {
        trigger_ = "progress-robot" + std::to_string(r->client);
      }
    } else if (std::get_if<ReplanRequest>(&env.payload)) {
      trigger_ = "request";
    }
  }
}

void HierarchicalStrategy::after_motion(World& w) {
  for (std::size_t k = 0; k < clients_.size(); ++k) {
    auto& c = clients_[k];
    const int id = static_cast<int>(k);
    const auto& robot = w.robots()[k];
    if (c.state == ClientState::Transferring && robot.arrived) {
      w.event(World::robot_node(id), "REACHED", "guide");
      set_client(w, id, ClientState::Exploring);
      local_replan(w, id);
    } else if (c.state == ClientState::Exploring && !robot.has_path()) {
      if (robot.arrived) w.event(World::robot_node(id), "REACHED", "goal");
      local_replan(w, id);
    }
    if (holds_work(id) && w.tick() % progress_every_ == 0) report(w, id, ReportStatus::Executing);
  }

  if (center_ == CenterState::Planning && w.tick() >= planning_until_) finish_planning(w);

  bool all_busy = true;
  for (std::size_t k = 0; k < clients_.size(); ++k) all_busy = all_busy && holds_work(static_cast<int>(k));
  if (all_busy) {
    idle_since_ = -1;
  } else if (idle_since_ < 0) {
    idle_since_ = w.tick();
  }
  if (center_ != CenterState::Monitoring) return;
  if (manual_) {
    manual_ = false;
    trigger_ = "manual";
  }
  if (trigger_.empty() && idle_since_ >= 0 && w.tick() - idle_since_ >= w.ticks_for(cfg_.idle_retry)) {
    trigger_ = "idle";
    idle_since_ = w.tick();
  }
  if (!trigger_.empty()) {
    const std::string reason = std::move(trigger_);
    trigger_.clear();
    start_planning(w, reason);
    if (w.tick() >= planning_until_) finish_planning(w);
  }
}

bool HierarchicalStrategy::holds_work(int robot) const {
  const auto s = clients_[static_cast<std::size_t>(robot)].state;
  return s == ClientState::Transferring || s == ClientState::Exploring;
}

}  // namespace mrx
