#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "mrx/framework.hpp"
#include "mrx/simulator.hpp"

using namespace mrx;

namespace {

struct LogLine {
  double time = 0;
  std::string node;
  std::string event;
  std::string fields;
};

std::vector<LogLine> parse_log(const std::string& text) {
  std::vector<LogLine> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("CONFIG", 0) == 0) continue;
    std::istringstream ls(line);
    LogLine l;
    ls >> l.time >> l.node >> l.event;
    std::getline(ls, l.fields);
    if (!l.fields.empty() && l.fields.front() == ' ') l.fields.erase(0, 1);
    out.push_back(l);
  }
  return out;
}

int field_int(const std::string& fields, const std::string& key) {
  const auto p = fields.find(key + "=");
  REQUIRE(p != std::string::npos);
  return std::stoi(fields.substr(p + key.size() + 1));
}

ClientState client_state_named(const std::string& s) {
  for (ClientState c : {ClientState::Idle, ClientState::Transferring, ClientState::Exploring, ClientState::AwaitingTask}) {
    if (to_string(c) == s) return c;
  }
  FAIL("unknown client state " << s);
  return ClientState::Idle;
}

CenterState center_state_named(const std::string& s) {
  for (CenterState c : {CenterState::Idle, CenterState::Planning, CenterState::Monitoring}) {
    if (to_string(c) == s) return c;
  }
  FAIL("unknown center state " << s);
  return CenterState::Idle;
}

// Two rooms joined by a corridor, with a side closet.
GroundTruth office() {
  OccupancyGrid g(240, 120, 0.1, Cell::Free);
  auto wall = [&](int x0, int y0, int x1, int y1) {
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) g.set(g.index(x, y), Cell::Obstacle);
    }
  };
  wall(0, 0, 239, 0);
  wall(0, 119, 239, 119);
  wall(0, 0, 0, 119);
  wall(239, 0, 239, 119);
  wall(100, 0, 100, 50);
  wall(100, 70, 100, 119);
  wall(160, 60, 239, 60);
  wall(160, 60, 160, 90);
  return load_map(to_map_text(g), 0.1, {});
}

ScenarioConfig hier_config(int robots, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.strategy = StrategyKind::Hierarchical;
  cfg.robots = robots;
  cfg.seed = seed;
  cfg.time_cap = 900;
  return cfg;
}

}  // namespace

TEST_CASE("progress check evaluates the abnormal-progress inequality") {
  Subtask t;
  t.epoch = 3;
  t.expected_workload = 30;
  ProgressReport r;
  r.epoch = 3;
  r.explored = 10;
  r.remaining = 20;
  CHECK_FALSE(progress_check(r, t, 5));
  r.explored = 25;
  CHECK(progress_check(r, t, 5));
  r.explored = 15;  // lhs equals the threshold exactly
  CHECK(progress_check(r, t, 5));
  r.epoch = 2;
  CHECK_FALSE(progress_check(r, t, 5));
}

TEST_CASE("center transitions follow the state machine") {
  CHECK(legal_transition(CenterState::Idle, CenterState::Planning));
  CHECK(legal_transition(CenterState::Planning, CenterState::Monitoring));
  CHECK(legal_transition(CenterState::Monitoring, CenterState::Planning));
  CHECK_FALSE(legal_transition(CenterState::Idle, CenterState::Monitoring));
  CHECK_FALSE(legal_transition(CenterState::Monitoring, CenterState::Idle));
  CHECK_FALSE(legal_transition(CenterState::Planning, CenterState::Idle));
}

TEST_CASE("client transitions follow the state machine") {
  CHECK(legal_transition(ClientState::Idle, ClientState::Transferring));
  CHECK(legal_transition(ClientState::Transferring, ClientState::Exploring));
  CHECK(legal_transition(ClientState::Exploring, ClientState::AwaitingTask));
  CHECK(legal_transition(ClientState::AwaitingTask, ClientState::Transferring));
  CHECK_FALSE(legal_transition(ClientState::Exploring, ClientState::Idle));
  CHECK_FALSE(legal_transition(ClientState::AwaitingTask, ClientState::Idle));
}

TEST_CASE("message bus applies latency and keeps send order") {
  MessageBus bus(2);
  bus.send(kCenterNode, 0, 10, ReplanRequest{"a"});
  bus.send(kCenterNode, 0, 10, ReplanRequest{"b"});
  bus.send(1, kCenterNode, 11, ReplanRequest{"c"});
  CHECK(bus.deliver(11).empty());
  auto first = bus.deliver(12);
  REQUIRE(first.size() == 2);
  CHECK(std::get<ReplanRequest>(first[0].payload).reason == "a");
  CHECK(std::get<ReplanRequest>(first[1].payload).reason == "b");
  CHECK(first[0].deliver == 12);
  CHECK(bus.pending() == 1);
  auto second = bus.deliver(20);
  REQUIRE(second.size() == 1);
  CHECK(second[0].sender == 1);
  CHECK(bus.pending() == 0);
}

TEST_CASE("message bus without latency delivers on the send tick") {
  MessageBus bus;
  bus.send(0, 1, 5, ProgressReport{});
  CHECK(bus.deliver(5).size() == 1);
}

TEST_CASE("client plan reports done for a fully explored roi") {
  const auto g = test::grid_from(std::vector<std::string>(30, std::string(40, '.')), 0.1);
  const RoiMask roi = RoiMask::full(g);
  PlanningInputs in;
  in.map = &g;
  in.roi = &roi;
  in.robots = {{1.0, 1.0}};
  Rrg rrg;
  const auto plan = client_plan(rrg, in, PlannerConfig{});
  CHECK(plan.done);
  CHECK_FALSE(plan.goal);
}

TEST_CASE("client plan replans once per explored region") {
  // Known strip on the left, two unknown pockets on the right separated by
  // a wall: two regions in the roi.
  std::vector<std::string> rows;
  for (int y = 0; y < 60; ++y) {
    std::string row;
    for (int x = 0; x < 100; ++x) {
      if (y == 29 || y == 30) {
        row += x >= 35 ? '#' : '.';
      } else {
        row += x < 40 ? '.' : '?';
      }
    }
    rows.push_back(row);
  }
  auto g = test::grid_from(rows, 0.1);
  const RoiMask roi = RoiMask::full(g);
  PlanningInputs in;
  in.map = &g;
  in.roi = &roi;
  in.robots = {{2.0, 1.0}};
  in.seed = 3;
  Rrg rrg;
  const PlannerConfig cfg;
  const auto first = client_plan(rrg, in, cfg);
  REQUIRE(first.goal);
  REQUIRE(first.order.size() == 2);
  CHECK(first.graph.size() == 2);

  // Reveal the first region; the next replan must target the other one.
  const auto& done_region = first.graph.vertices[static_cast<std::size_t>(first.order[0])];
  const bool first_is_top = g.coord(done_region.cells.front()).y < 30;
  for (CellIndex c = 0; c < static_cast<CellIndex>(g.size()); ++c) {
    if (g.at(c) == Cell::Unknown && (g.coord(c).y < 30) == first_is_top) g.set(c, Cell::Free);
  }
  in.robots = {*first.goal};
  const auto second = client_plan(rrg, in, cfg);
  REQUIRE(second.goal);
  REQUIRE(second.order.size() == 1);
  CHECK((g.coord(second.graph.vertices[0].cells.front()).y < 30) != first_is_top);
  CHECK(distance(*second.goal, second.graph.vertices[0].viewpoint.position) < 1e-9);
}

TEST_CASE("center plan produces disjoint rois covering the planned regions") {
  std::vector<std::string> rows;
  for (int y = 0; y < 80; ++y) {
    std::string row;
    for (int x = 0; x < 160; ++x) row += (x < 30 || (y > 30 && y < 50)) && x < 120 ? '.' : '?';
    rows.push_back(row);
  }
  const auto g = test::grid_from(rows, 0.1);
  const RoiMask roi = RoiMask::full(g);
  PlanningInputs in;
  in.map = &g;
  in.roi = &roi;
  in.robots = {{1.0, 1.0}, {1.0, 7.0}, {5.0, 4.0}};
  in.seed = 5;
  Rrg rrg;
  const auto plan = center_plan(rrg, in, PlannerConfig{}, 7);
  CHECK_FALSE(plan.complete);
  std::vector<int> owner(g.size(), -1);
  int tasks = 0;
  for (std::size_t r = 0; r < plan.subtasks.size(); ++r) {
    if (!plan.subtasks[r]) {
      CHECK(plan.routes.routes[r].empty());
      continue;
    }
    ++tasks;
    const Subtask& t = *plan.subtasks[r];
    CHECK(t.epoch == 7);
    CHECK_FALSE(t.roi.empty());
    CHECK(std::is_sorted(t.cells.begin(), t.cells.end()));
    CHECK(t.roi.count() == t.cells.size());
    CHECK(t.regions == plan.routes.routes[r]);
    REQUIRE_FALSE(t.guide_path.empty());
    CHECK(distance(t.guide_path.front(), in.robots[r]) < 1.0);
    double expected = 0;
    for (int id : t.regions) expected += plan.graph.vertices[static_cast<std::size_t>(id)].weight;
    CHECK(t.expected_workload == doctest::Approx(expected));
    for (CellIndex c : t.cells) {
      CHECK(g.at(c) == Cell::Unknown);
      CHECK(owner[static_cast<std::size_t>(c)] == -1);
      owner[static_cast<std::size_t>(c)] = static_cast<int>(r);
    }
  }
  CHECK(tasks >= 1);
}

TEST_CASE("center plan on a fully known map is complete") {
  const auto g = test::grid_from(std::vector<std::string>(20, std::string(20, '.')), 0.1);
  const RoiMask roi = RoiMask::full(g);
  PlanningInputs in;
  in.map = &g;
  in.roi = &roi;
  in.robots = {{0.5, 0.5}};
  Rrg rrg;
  const auto plan = center_plan(rrg, in, PlannerConfig{}, 1);
  CHECK(plan.complete);
  CHECK_FALSE(plan.subtasks[0]);
}

TEST_CASE("hierarchical log: legal transitions, increasing epochs, rolling goals") {
  const auto t = office();
  for (int robots : {1, 2, 3}) {
    CAPTURE(robots);
    const auto res = run(t, hier_config(robots, 2));
    CHECK(res.metrics.complete);
    CHECK(res.metrics.idle_while_planning == 0);
    const auto lines = parse_log(res.log);
    std::map<std::string, int> last_epoch;
    std::map<std::string, ClientState> client;
    CenterState center = CenterState::Idle;
    std::set<std::pair<double, std::string>> triggers;  // (time, robot) of arrivals and receipts
    std::set<std::pair<double, std::string>> goals;
    for (const auto& l : lines) {
      CHECK(l.event != "IDLE");
      if (l.event == "STATE") {
        const auto arrow = l.fields.find("->");
        REQUIRE(arrow != std::string::npos);
        const std::string from = l.fields.substr(0, arrow);
        const std::string to = l.fields.substr(arrow + 2);
        if (l.node == "center") {
          CHECK(center_state_named(from) == center);
          CHECK(legal_transition(center, center_state_named(to)));
          center = center_state_named(to);
        } else {
          const ClientState prev = client.count(l.node) ? client[l.node] : ClientState::Idle;
          CHECK(client_state_named(from) == prev);
          CHECK(legal_transition(prev, client_state_named(to)));
          client[l.node] = client_state_named(to);
        }
      } else if (l.event == "SUBTASK") {
        const int epoch = field_int(l.fields, "epoch");
        CHECK(epoch > last_epoch[l.node]);
        last_epoch[l.node] = epoch;
        triggers.insert({l.time, l.node});
      } else if (l.event == "REACHED") {
        triggers.insert({l.time, l.node});
      } else if (l.event == "GOAL" && l.node != "center") {
        // At most one goal per local replan, and only at arrival or receipt.
        CHECK(goals.insert({l.time, l.node}).second);
        CHECK(triggers.count({l.time, l.node}) == 1);
      }
    }
  }
}

TEST_CASE("hierarchical: clients keep working while the center plans") {
  const auto t = office();
  ScenarioConfig cfg = hier_config(3, 4);
  cfg.center_latency = 2.0;
  int planning_ticks = 0;
  std::size_t stranded = 0;
  const auto res = run(t, cfg, [&](const World& w, const Strategy& s) {
    const auto& h = dynamic_cast<const HierarchicalStrategy&>(s);
    if (h.center_state() != CenterState::Planning) return true;
    ++planning_ticks;
    for (const auto& r : w.robots()) {
      if (h.client_state(r.id) != ClientState::AwaitingTask) continue;
      const auto& task = h.client_task(r.id);
      if (!task) continue;
      // Awaiting during planning is only allowed once the roi holds no
      // frontier cell.
      for (CellIndex c : task->cells) {
        if (!task->roi.contains(c) || w.known().at(c) != Cell::Unknown) continue;
        const CellCoord p = w.known().coord(c);
        bool frontier = false;
        for (const auto& [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          if (w.known().in_bounds(p.x + dx, p.y + dy) && w.known().at(p.x + dx, p.y + dy) == Cell::Free) frontier = true;
        }
        if (frontier) ++stranded;
      }
    }
    return true;
  });
  CHECK(res.metrics.complete);
  CHECK(planning_ticks > 0);
  CHECK(stranded == 0);
  CHECK(res.metrics.idle_while_planning == 0);
}

TEST_CASE("hierarchical: idle rounds either employ a waiting client or are discarded") {
  const auto t = office();
  for (std::uint64_t seed : {1ULL, 3ULL}) {
    CAPTURE(seed);
    const auto res = run(t, hier_config(4, seed));
    CHECK(res.metrics.complete);
    const auto lines = parse_log(res.log);
    std::map<int, std::string> reason;  // epoch -> trigger
    std::map<int, int> dispatched;
    std::set<int> discarded;
    std::map<std::string, bool> busy;  // client holds work, from STATE lines
    std::map<int, std::set<std::string>> waiting_at_plan;
    std::map<int, std::size_t> waiting_count;
    for (const auto& l : lines) {
      if (l.event == "STATE" && l.node != "center") {
        const std::string to = l.fields.substr(l.fields.find("->") + 2);
        busy[l.node] = to == "Transferring" || to == "Exploring";
      } else if (l.event == "PLAN") {
        const int e = field_int(l.fields, "epoch");
        const auto r = l.fields.find("reason=");
        reason[e] = l.fields.substr(r + 7, l.fields.find(' ', r) - r - 7);
        for (int k = 0; k < 4; ++k) {
          const std::string node = "robot" + std::to_string(k);
          if (!busy[node]) waiting_at_plan[e].insert(node);
        }
        waiting_count[e] = waiting_at_plan[e].size();
      } else if (l.event == "DISPATCH") {
        const int e = field_int(l.fields, "epoch");
        ++dispatched[e];
        if (reason[e] == "idle") waiting_at_plan[e].erase("robot" + std::to_string(field_int(l.fields, "robot")));
      } else if (l.event == "DISCARD") {
        discarded.insert(field_int(l.fields, "epoch"));
      }
    }
    for (const auto& [e, why] : reason) {
      CAPTURE(e);
      if (discarded.count(e)) {
        CHECK(why == "idle");
        CHECK(dispatched[e] == 0);
      } else if (why == "idle" && dispatched[e] > 0) {
        // At least one client that was waiting received work.
        CHECK(waiting_at_plan[e].size() < waiting_count[e]);
      }
    }
  }
}

TEST_CASE("hierarchical: manual replan request starts a planning round") {
  const auto t = office();
  ScenarioConfig cfg = hier_config(2, 1);
  bool requested = false;
  const auto res = run(t, cfg, [&](const World& w, const Strategy& s) {
    if (!requested && w.time() > 20.0) {
      const_cast<HierarchicalStrategy&>(dynamic_cast<const HierarchicalStrategy&>(s)).request_replan();
      requested = true;
    }
    return true;
  });
  CHECK(res.log.find("reason=manual") != std::string::npos);
  CHECK(res.metrics.complete);
}
