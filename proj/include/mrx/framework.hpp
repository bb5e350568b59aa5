#pragma once

// Hierarchical center/client exploration: subtask generation and dispatch,
// client-side rolling TSP replanning, progress reports and the replanning
// trigger, all connected by a simulated message bus.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mrx/planner.hpp"
#include "mrx/world.hpp"

namespace mrx {

struct Subtask {
  RoiMask roi;
  std::vector<CellIndex> cells;  // roi members, ascending
  std::vector<Point2> guide_path;
  int epoch = 0;
  double expected_workload = 0.0;  // m
  double rate = 0.0;               // m of travel per m^2, frozen at dispatch
  std::vector<int> regions;        // region ids of the visiting sequence
};

enum class ReportStatus { Executing, Done, Failed };
std::string_view to_string(ReportStatus s);

struct ProgressReport {
  int client = 0;
  double explored = 0.0;   // workload-equivalent of area revealed since dispatch
  double remaining = 0.0;  // workload of the unknown cells left in the roi
  int epoch = 0;
  ReportStatus status = ReportStatus::Executing;
};

/// Abnormal-progress test: explored + remaining - expected >= threshold.
/// Reports from another epoch never trigger.
bool progress_check(const ProgressReport& report, const Subtask& current, double threshold);

enum class CenterState { Idle, Planning, Monitoring };
enum class ClientState { Idle, Transferring, Exploring, AwaitingTask };
std::string_view to_string(CenterState s);
std::string_view to_string(ClientState s);

/// True for the transitions of the center state machine.
bool legal_transition(CenterState from, CenterState to);
bool legal_transition(ClientState from, ClientState to);

struct ReplanRequest {
  std::string reason;
};
using Payload = std::variant<Subtask, ProgressReport, ReplanRequest>;

inline constexpr int kCenterNode = -1;

struct Envelope {
  int sender = 0;
  int receiver = 0;
  long sent = 0;     // tick
  long deliver = 0;  // tick, >= sent
  std::uint64_t seq = 0;
  Payload payload;
};

/// Constant-latency bus: delivery order is (deliver tick, send order), which
/// keeps every sender-receiver pair FIFO.
class MessageBus {
 public:
  explicit MessageBus(long latency_ticks = 0) : latency_(latency_ticks) {}
  void send(int sender, int receiver, long now, Payload payload);
  /// Removes and returns the messages due at `now`.
  std::vector<Envelope> deliver(long now);
  std::size_t pending() const { return queue_.size(); }

 private:
  long latency_;
  std::uint64_t seq_ = 0;
  std::deque<Envelope> queue_;
};

/// Result of one center planning round.
struct CenterPlan {
  bool complete = false;
  std::vector<std::optional<Subtask>> subtasks;  // per robot
  RegionGraph graph;
  RoutePlan routes;
};

/// Global planning over the whole map: perception, region graph, VRP, and
/// one subtask per robot with a nonempty visiting sequence.
CenterPlan center_plan(Rrg& rrg, const PlanningInputs& in, const PlannerConfig& cfg, int epoch);

/// Local planning of a client inside its roi: the first region of the TSP
/// order, or nothing when the roi has no frontiers left.
struct LocalPlan {
  bool done = false;       // no frontiers in the roi
  bool failed = false;     // frontiers but no usable viewpoint
  std::optional<Point2> goal;
  std::vector<int> order;  // region ids in visiting order
  RegionGraph graph;
};
LocalPlan client_plan(Rrg& rrg, const PlanningInputs& in, const PlannerConfig& cfg);

class HierarchicalStrategy : public Strategy {
 public:
  explicit HierarchicalStrategy(const ScenarioConfig& cfg);

  void begin(World& w) override;
  void before_motion(World& w) override;
  void after_motion(World& w) override;
  bool planning() const override { return center_ == CenterState::Planning; }
  bool holds_work(int robot) const override;
  int plans() const override { return plans_; }

  CenterState center_state() const { return center_; }
  ClientState client_state(int robot) const { return clients_[static_cast<std::size_t>(robot)].state; }
  const std::optional<Subtask>& client_task(int robot) const { return clients_[static_cast<std::size_t>(robot)].task; }
  /// Queues a manual replanning command for the center.
  void request_replan() { manual_ = true; }

 private:
  struct Client {
    ClientState state = ClientState::Idle;
    std::optional<Subtask> task;
    int acknowledged = 0;
    double credit_at_dispatch = 0.0;
    bool dropped_any = false;  // a region was removed from the roi as unreachable
    std::optional<Point2> goal;
  };

  void set_center(World& w, CenterState s);
  void set_client(World& w, int k, ClientState s);
  void start_planning(World& w, const std::string& reason);
  void finish_planning(World& w);
  void receive(World& w, int k, Subtask task);
  void local_replan(World& w, int k);
  void report(World& w, int k, ReportStatus status);
  ProgressReport make_report(const World& w, int k, ReportStatus status) const;

  ScenarioConfig cfg_;
  PlannerConfig planner_;
  MessageBus bus_;
  CenterState center_ = CenterState::Idle;
  std::vector<Client> clients_;
  std::vector<std::optional<Subtask>> center_view_;  // last dispatched subtask per client
  std::optional<CenterPlan> pending_;
  long planning_until_ = 0;
  long progress_every_ = 10;
  long idle_since_ = -1;
  std::vector<int> waiting_;  // clients without work when an idle round started
  int epoch_ = 0;
  int plans_ = 0;
  std::string trigger_;  // pending replanning reason
  bool manual_ = false;
  bool complete_ = false;
};

}  // namespace mrx
