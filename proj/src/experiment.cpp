#include "mrx/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "mrx/mapgen.hpp"

namespace mrx {

std::string scenario_name(const std::string& map_path) {
  const std::string stem = std::filesystem::path(map_path).stem().string();
  return stem.empty() ? map_path : stem;
}

GroundTruth load_or_generate(const std::string& path, double resolution) {
  if (!std::filesystem::exists(path)) {
    if (const auto kind = parse_map_kind(path)) {
      const OccupancyGrid g = generate_map(*kind, kBundledMapSeed);
      return load_map(to_map_text(g), resolution, {});
    }
    throw ConfigError("map file not found: " + path);
  }
  return load_map_file(path, resolution);
}

std::vector<RunRecord> run_experiments(const ExperimentSpec& spec, int jobs, const RunCallback& progress) {
  std::map<std::string, GroundTruth> maps;
  for (const auto& c : spec.combinations) {
    if (maps.count(c.map_path)) continue;
    try {
      maps.emplace(c.map_path, load_or_generate(c.map_path, spec.resolution));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("cannot load map " + c.map_path + ": " + e.what());
    }
  }

  std::vector<RunRecord> records;
  for (const auto& c : spec.combinations) {
    for (int robots : c.robots) {
      for (StrategyKind s : c.strategies) {
        for (std::uint64_t seed : c.seeds) {
          RunRecord r;
          r.scenario = scenario_name(c.map_path);
          r.config = spec.base;
          r.config.map_name = c.map_path;
          r.config.robots = robots;
          r.config.strategy = s;
          r.config.seed = seed;
          records.push_back(std::move(r));
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= records.size()) return;
      RunRecord& r = records[i];
      RunResult res = run(maps.at(r.config.map_name), r.config);
      r.metrics = std::move(res.metrics);
      r.log = std::move(res.log);
      std::lock_guard<std::mutex> lock(mu);
      ++done;
      if (progress) progress(r, done, records.size());
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(records.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

std::vector<Aggregate> aggregate(const std::vector<RunRecord>& records) {
  std::vector<Aggregate> out;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Aggregate& a) {
      return a.scenario == r.scenario && a.strategy == r.config.strategy && a.robots == r.config.robots;
    });
    if (it == out.end()) {
      Aggregate a;
      a.scenario = r.scenario;
      a.strategy = r.config.strategy;
      a.robots = r.config.robots;
      out.push_back(a);
      it = out.end() - 1;
    }
    ++it->runs;
    it->completed += r.metrics.complete ? 1 : 0;
    it->aet += r.metrics.aet;
    it->adt += r.metrics.adt;
    it->aor += r.metrics.aor;
    it->coverage += r.metrics.coverage;
  }
  for (auto& a : out) {
    a.aet /= a.runs;
    a.adt /= a.runs;
    a.aor /= a.runs;
    a.coverage /= a.runs;
  }
  return out;
}

std::string experiment_csv_header() { return "row,scenario,strategy,robots,seed,complete,aet,adt,aor,coverage"; }

std::string experiment_csv(const std::vector<RunRecord>& records, const std::vector<Aggregate>& aggregates) {
  std::string out = experiment_csv_header() + "\n";
  char buf[320];
  for (const auto& r : records) {
    const Metrics& m = r.metrics;
    std::snprintf(buf, sizeof buf, "run,%s,%s,%d,%llu,%d,%.3f,%.3f,%.6f,%.6f\n", r.scenario.c_str(),
                  std::string(to_string(r.config.strategy)).c_str(), r.config.robots,
                  static_cast<unsigned long long>(r.config.seed), m.complete ? 1 : 0, m.aet, m.adt, m.aor, m.coverage);
    out += buf;
  }
  for (const auto& a : aggregates) {
    std::snprintf(buf, sizeof buf, "mean,%s,%s,%d,%d,%d,%.3f,%.3f,%.6f,%.6f\n", a.scenario.c_str(),
                  std::string(to_string(a.strategy)).c_str(), a.robots, a.runs, a.completed, a.aet, a.adt, a.aor,
                  a.coverage);
    out += buf;
  }
  return out;
}

}  // namespace mrx
