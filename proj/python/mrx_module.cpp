#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "mrx/config.hpp"
#include "mrx/experiment.hpp"
#include "mrx/framework.hpp"
#include "mrx/mapgen.hpp"
#include "mrx/render.hpp"
#include "mrx/routing.hpp"
#include "mrx/simulator.hpp"

namespace py = pybind11;
using namespace mrx;

namespace {

StrategyKind strategy_named(const std::string& name) {
  const auto k = parse_strategy(name);
  if (!k) throw py::value_error("unknown strategy '" + name + "'");
  return *k;
}

GroundTruth truth_from(const std::string& map_text, double resolution) {
  return load_map(map_text, resolution, {});
}

std::vector<std::pair<double, std::string>> frames_of(const GroundTruth& truth, const ScenarioConfig& cfg,
                                                      double every, std::string* log) {
  if (!(every > 0.0)) throw py::value_error("every must be positive");
  const long stride = std::max(1L, static_cast<long>(std::ceil(every / cfg.tick - 1e-9)));
  std::vector<std::pair<double, std::string>> frames;
  const auto res = run(truth, cfg, [&](const World& w, const Strategy&) {
    if (w.tick() % stride == 0 || w.complete()) frames.emplace_back(w.time(), render_snapshot(w));
    return true;
  });
  if (log) *log = res.log;
  return frames;
}

}  // namespace

PYBIND11_MODULE(_mrx, m) {
  m.doc() = "Multi-robot exploration simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("map_name", &ScenarioConfig::map_name)
      .def_readwrite("robots", &ScenarioConfig::robots)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("robot_speed", &ScenarioConfig::robot_speed)
      .def_readwrite("sensor_radius", &ScenarioConfig::sensor_radius)
      .def_readwrite("tick", &ScenarioConfig::tick)
      .def_readwrite("center_latency", &ScenarioConfig::center_latency)
      .def_readwrite("message_latency", &ScenarioConfig::message_latency)
      .def_readwrite("solver_budget_ms", &ScenarioConfig::solver_budget_ms)
      .def_readwrite("w_threshold", &ScenarioConfig::w_threshold)
      .def_readwrite("progress_period", &ScenarioConfig::progress_period)
      .def_readwrite("time_cap", &ScenarioConfig::time_cap)
      .def_readwrite("idle_retry", &ScenarioConfig::idle_retry)
      .def_property(
          "strategy", [](const ScenarioConfig& c) { return std::string(to_string(c.strategy)); },
          [](ScenarioConfig& c, const std::string& s) { c.strategy = strategy_named(s); })
      .def_property(
          "starts",
          [](const ScenarioConfig& c) {
            std::vector<std::pair<double, double>> out;
            for (const auto& p : c.starts) out.emplace_back(p.x, p.y);
            return out;
          },
          [](ScenarioConfig& c, const std::vector<std::pair<double, double>>& pts) {
            c.starts.clear();
            for (const auto& [x, y] : pts) c.starts.push_back({x, y});
          })
      .def("config_line", [](const ScenarioConfig& c) { return config_line(c); })
      .def_static("from_config_line", [](const std::string& line) { return parse_config_line(line); })
      .def("__repr__", [](const ScenarioConfig& c) { return "<ScenarioConfig " + config_line(c) + ">"; });

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("complete", &Metrics::complete)
      .def_readonly("aet", &Metrics::aet)
      .def_readonly("adt", &Metrics::adt)
      .def_readonly("aor", &Metrics::aor)
      .def_readonly("coverage", &Metrics::coverage)
      .def_readonly("ticks", &Metrics::ticks)
      .def_readonly("idle_while_planning", &Metrics::idle_while_planning)
      .def_readonly("plans", &Metrics::plans)
      .def_readonly("odometers", &Metrics::odometers)
      .def_readonly("credits", &Metrics::credits)
      .def_readonly("curve", &Metrics::curve);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("metrics", &RunResult::metrics)
      .def_readonly("log", &RunResult::log);

  m.def(
      "generate_map",
      [](const std::string& kind, std::uint64_t seed) {
        const auto k = parse_map_kind(kind);
        if (!k) throw py::value_error("unknown map kind '" + kind + "'");
        return to_map_text(generate_map(*k, seed));
      },
      py::arg("kind"), py::arg("seed") = kBundledMapSeed, "Map text for a generated 50 m x 30 m map.");

  m.def(
      "load_map",
      [](const std::string& path, double resolution) { return to_map_text(load_or_generate(path, resolution).grid); },
      py::arg("path"), py::arg("resolution") = 0.1, "Map text of a file, or of a bundled kind name.");

  m.def(
      "run",
      [](const std::string& map_text, const ScenarioConfig& cfg, double resolution) {
        const auto truth = truth_from(map_text, resolution);
        py::gil_scoped_release release;
        return run(truth, cfg);
      },
      py::arg("map_text"), py::arg("config"), py::arg("resolution") = 0.1, "Runs one exploration.");

  m.def(
      "render",
      [](const std::string& map_text, const ScenarioConfig& cfg, double every, double resolution) {
        const auto truth = truth_from(map_text, resolution);
        return frames_of(truth, cfg, every, nullptr);
      },
      py::arg("map_text"), py::arg("config"), py::arg("every") = 10.0, py::arg("resolution") = 0.1,
      "List of (time, svg) frames every `every` seconds and at the end.");

  m.def(
      "replay",
      [](const std::string& log, const std::string& map_text, double every, double resolution) {
        const ScenarioConfig cfg = parse_config_line(log.substr(0, log.find('\n')));
        std::string replayed;
        auto frames = frames_of(truth_from(map_text, resolution), cfg, every, &replayed);
        if (replayed != log) throw py::value_error("replay diverged from the given log");
        return frames;
      },
      py::arg("log"), py::arg("map_text"), py::arg("every") = 10.0, py::arg("resolution") = 0.1,
      "Re-simulates an event log and returns its frames.");

  m.def(
      "bench",
      [](const std::string& spec_text, int jobs) {
        const ExperimentSpec spec = parse_experiment(spec_text);
        std::vector<RunRecord> records;
        {
          py::gil_scoped_release release;
          records = run_experiments(spec, jobs);
        }
        return experiment_csv(records, aggregate(records));
      },
      py::arg("spec_text"), py::arg("jobs") = 1, "Runs an experiment spec and returns the results CSV.");

  m.def(
      "solve_vrp",
      [](const std::vector<std::vector<double>>& cost, std::size_t robots, bool exact, const std::string& objective) {
        const std::size_t n = cost.size();
        if (robots < 1 || robots > n) throw py::value_error("robots must be in [1, len(cost)]");
        CostMatrix mtx(robots, n - robots);
        for (std::size_t i = 0; i < n; ++i) {
          if (cost[i].size() != n) throw py::value_error("cost must be square");
          for (std::size_t j = 0; j < n; ++j) mtx.set(i, j, j < robots ? 0.0 : cost[i][j]);
        }
        SolverOptions o;
        o.mode = exact ? SolveMode::Exact : SolveMode::Heuristic;
        if (objective == "minmax") {
          o.objective = Objective::MinMax;
        } else if (objective == "total") {
          o.objective = Objective::Total;
        } else {
          throw py::value_error("objective must be 'minmax' or 'total'");
        }
        const RoutePlan p = solve_vrp(mtx, o);
        return py::make_tuple(p.routes, p.objective);
      },
      py::arg("cost"), py::arg("robots"), py::arg("exact") = false, py::arg("objective") = "minmax",
      "Open VRP over a square matrix whose first `robots` rows are robots. Returns (routes, objective).");

  m.def(
      "progress_check",
      [](double explored, double remaining, double expected, double threshold) {
        Subtask t;
        t.expected_workload = expected;
        ProgressReport r;
        r.explored = explored;
        r.remaining = remaining;
        return progress_check(r, t, threshold);
      },
      py::arg("explored"), py::arg("remaining"), py::arg("expected"), py::arg("threshold"),
      "True when progress deviates from the plan by at least `threshold`.");
}
