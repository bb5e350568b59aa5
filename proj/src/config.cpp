#include "mrx/config.hpp"

#include "mrx/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mrx {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t end = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos)));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

std::vector<Point2> to_points(std::string_view key, std::string_view v) {
  std::vector<Point2> out;
  if (trim(v).empty()) return out;
  for (auto item : split(v, ';')) {
    const auto xy = split(item, ',');
    if (xy.size() != 2) bad_value(key, v);
    out.push_back({to_double(key, xy[0]), to_double(key, xy[1])});
  }
  return out;
}

std::vector<std::uint64_t> to_seeds(std::string_view v) {
  std::vector<std::uint64_t> out;
  for (auto item : split(v, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(to_int<std::uint64_t>("seeds", item));
      continue;
    }
    const auto a = to_int<std::uint64_t>("seeds", trim(item.substr(0, dash)));
    const auto b = to_int<std::uint64_t>("seeds", trim(item.substr(dash + 1)));
    if (b < a) bad_value("seeds", v);
    for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string encode(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ') {
      out += "%20";
    } else if (c == '%') {
      out += "%25";
    } else {
      out += c;
    }
  }
  return out;
}

std::string decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.substr(i, 3) == "%20") {
      out += ' ';
      i += 2;
    } else if (s.substr(i, 3) == "%25") {
      out += '%';
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace

std::vector<IniEntry> parse_ini(std::string_view text) {
  std::vector<IniEntry> out;
  std::string section;
  int line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto c = line.find('#'); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (!line.empty() && line.front() == ';') continue;
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      out.push_back({section, "", "", line_no});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    out.push_back({section, std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

void apply_setting(ScenarioConfig& cfg, std::string_view section, std::string_view key, std::string_view v) {
  const std::string name = std::string(section) + "." + std::string(key);
  auto is = [&](const char* s) { return name == s; };
  if (is("scenario.map")) {
    cfg.map_name = std::string(v);
  } else if (is("scenario.robots")) {
    cfg.robots = to_int<int>(name, v);
  } else if (is("scenario.strategy")) {
    const auto k = parse_strategy(v);
    if (!k) bad_value(name, v);
    cfg.strategy = *k;
  } else if (is("scenario.seed")) {
    cfg.seed = to_int<std::uint64_t>(name, v);
  } else if (is("scenario.starts")) {
    cfg.starts = to_points(name, v);
  } else if (is("scenario.time_cap")) {
    cfg.time_cap = to_double(name, v);
  } else if (is("robot.speed")) {
    cfg.robot_speed = to_double(name, v);
  } else if (is("robot.sensor_radius")) {
    cfg.sensor_radius = to_double(name, v);
  } else if (is("sim.tick")) {
    cfg.tick = to_double(name, v);
  } else if (is("sim.idle_retry")) {
    cfg.idle_retry = to_double(name, v);
  } else if (is("center.latency")) {
    cfg.center_latency = to_double(name, v);
  } else if (is("center.message_latency")) {
    cfg.message_latency = to_double(name, v);
  } else if (is("center.solver_budget_ms")) {
    cfg.solver_budget_ms = to_double(name, v);
  } else if (is("center.objective")) {
    if (v == "minmax") {
      cfg.objective = Objective::MinMax;
    } else if (v == "total") {
      cfg.objective = Objective::Total;
    } else {
      bad_value(name, v);
    }
  } else if (is("center.w_threshold")) {
    cfg.w_threshold = to_double(name, v);
  } else if (is("center.progress_period")) {
    cfg.progress_period = to_double(name, v);
  } else if (is("greedy.alpha")) {
    cfg.greedy.alpha = to_double(name, v);
  } else if (is("greedy.beta")) {
    cfg.greedy.beta = to_double(name, v);
  } else if (is("greedy.gamma")) {
    cfg.greedy.gamma = to_double(name, v);
  } else if (is("greedy.discount_radius")) {
    cfg.greedy.discount_radius = to_double(name, v);
  } else if (is("sampling.max_iterations")) {
    cfg.sampling.max_iterations = to_int<int>(name, v);
  } else if (is("sampling.sampling_radius")) {
    cfg.sampling.sampling_radius = to_double(name, v);
  } else if (is("sampling.fov_threshold")) {
    cfg.sampling.fov_threshold = to_double(name, v);
  } else if (is("sampling.connect_radius")) {
    cfg.sampling.connect_radius = to_double(name, v);
  } else if (is("roadmap.samples")) {
    cfg.growth.samples = to_int<int>(name, v);
  } else if (is("roadmap.step")) {
    cfg.growth.step = to_double(name, v);
  } else if (is("roadmap.min_spacing")) {
    cfg.growth.min_spacing = to_double(name, v);
  } else if (is("roadmap.connect_radius")) {
    cfg.growth.connect_radius = to_double(name, v);
  } else {
    throw ConfigError("unknown setting " + name);
  }
}

namespace {

void validated(const ScenarioConfig& cfg) {
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
  ScenarioFile out;
  std::set<std::string> seen;
  for (const auto& e : parse_ini(text)) {
    if (e.key.empty()) continue;
    if (!seen.insert(e.section + "." + e.key).second) {
      throw ConfigError("line " + std::to_string(e.line) + ": duplicate setting " + e.section + "." + e.key);
    }
    if (e.section == "scenario" && e.key == "resolution") {
      out.resolution = to_double("scenario.resolution", e.value);
      continue;
    }
    apply_setting(out.config, e.section, e.key, e.value);
  }
  out.map_path = out.config.map_name;
  if (out.map_path.empty()) throw ConfigError("scenario.map is required");
  if (!(out.resolution > 0)) throw ConfigError("scenario.resolution must be positive");
  validated(out.config);
  return out;
}

std::size_t ExperimentSpec::run_count() const {
  std::size_t n = 0;
  for (const auto& c : combinations) n += c.robots.size() * c.strategies.size() * c.seeds.size();
  return n;
}

ExperimentSpec parse_experiment(std::string_view text) {
  ExperimentSpec spec;
  const auto entries = parse_ini(text);
  Combination* current = nullptr;
  for (const auto& e : entries) {
    if (e.key.empty()) {
      if (e.section == "combination") {
        spec.combinations.emplace_back();
        current = &spec.combinations.back();
      } else {
        current = nullptr;
      }
      continue;
    }
    const std::string where = "line " + std::to_string(e.line) + ": ";
    if (e.section == "experiment") {
      if (e.key == "output") {
        spec.output_dir = e.value;
      } else if (e.key == "resolution") {
        spec.resolution = to_double("experiment.resolution", e.value);
      } else if (e.key == "jobs") {
        spec.jobs = to_int<int>("experiment.jobs", e.value);
      } else {
        throw ConfigError(where + "unknown setting experiment." + e.key);
      }
    } else if (e.section == "combination") {
      if (e.key == "map") {
        current->map_path = e.value;
      } else if (e.key == "robots") {
        for (auto r : split(e.value, ',')) current->robots.push_back(to_int<int>("robots", r));
      } else if (e.key == "strategies" || e.key == "strategy") {
        for (auto s : split(e.value, ',')) {
          const auto k = parse_strategy(s);
          if (!k) throw ConfigError(where + "unknown strategy '" + std::string(s) + "'");
          current->strategies.push_back(*k);
        }
      } else if (e.key == "seeds") {
        current->seeds = to_seeds(e.value);
      } else {
        throw ConfigError(where + "unknown setting combination." + e.key);
      }
    } else {
      apply_setting(spec.base, e.section, e.key, e.value);
    }
  }
  if (spec.combinations.empty()) throw ConfigError("experiment has no [combination] section");
  if (spec.jobs < 1) throw ConfigError("experiment.jobs must be at least 1");
  if (!(spec.resolution > 0)) throw ConfigError("experiment.resolution must be positive");
  for (auto& c : spec.combinations) {
    if (c.map_path.empty()) throw ConfigError("combination without map");
    if (c.robots.empty()) c.robots = {spec.base.robots};
    if (c.strategies.empty()) c.strategies = {spec.base.strategy};
    if (c.seeds.empty()) c.seeds = {spec.base.seed};
    auto sorted = c.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("duplicate seeds in combination for " + c.map_path);
    }
    for (int r : c.robots) {
      if (r < 1) throw ConfigError("robot count must be at least 1");
    }
  }
  if (!spec.base.starts.empty()) throw ConfigError("explicit starts are not supported in experiments");
  validated(spec.base);
  return spec;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

GroundTruth load_map_file(const std::string& path, double resolution) {
  const std::string bytes = read_file(path);
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0) return load_pgm(bytes, resolution, {});
  return load_map(bytes, resolution, {});
}

std::string config_line(const ScenarioConfig& cfg) {
  std::string line = "CONFIG";
  auto put = [&](const char* key, const std::string& v) {
    line += ' ';
    line += key;
    line += '=';
    line += v;
  };
  put("scenario.map", encode(cfg.map_name.empty() ? "-" : cfg.map_name));
  put("scenario.robots", std::to_string(cfg.robots));
  put("scenario.strategy", std::string(to_string(cfg.strategy)));
  put("scenario.seed", std::to_string(cfg.seed));
  std::string starts;
  for (const Point2& p : cfg.starts) {
    if (!starts.empty()) starts += ';';
    starts += fmt(p.x) + "," + fmt(p.y);
  }
  put("scenario.starts", starts);
  put("scenario.time_cap", fmt(cfg.time_cap));
  put("robot.speed", fmt(cfg.robot_speed));
  put("robot.sensor_radius", fmt(cfg.sensor_radius));
  put("sim.tick", fmt(cfg.tick));
  put("sim.idle_retry", fmt(cfg.idle_retry));
  put("center.latency", fmt(cfg.center_latency));
  put("center.message_latency", fmt(cfg.message_latency));
  put("center.solver_budget_ms", fmt(cfg.solver_budget_ms));
  put("center.objective", cfg.objective == Objective::MinMax ? "minmax" : "total");
  put("center.w_threshold", fmt(cfg.w_threshold));
  put("center.progress_period", fmt(cfg.progress_period));
  put("greedy.alpha", fmt(cfg.greedy.alpha));
  put("greedy.beta", fmt(cfg.greedy.beta));
  put("greedy.gamma", fmt(cfg.greedy.gamma));
  put("greedy.discount_radius", fmt(cfg.greedy.discount_radius));
  put("sampling.max_iterations", std::to_string(cfg.sampling.max_iterations));
  put("sampling.sampling_radius", fmt(cfg.sampling.sampling_radius));
  put("sampling.fov_threshold", fmt(cfg.sampling.fov_threshold));
  put("sampling.connect_radius", fmt(cfg.sampling.connect_radius));
  put("roadmap.samples", std::to_string(cfg.growth.samples));
  put("roadmap.step", fmt(cfg.growth.step));
  put("roadmap.min_spacing", fmt(cfg.growth.min_spacing));
  put("roadmap.connect_radius", fmt(cfg.growth.connect_radius));
  return line;
}

ScenarioConfig parse_config_line(std::string_view line) {
  line = trim(line);
  if (line.substr(0, 6) != "CONFIG") throw ConfigError("not a CONFIG line");
  ScenarioConfig cfg;
  for (auto tok : split(line.substr(6), ' ')) {
    if (tok.empty()) continue;
    const auto eq = tok.find('=');
    const auto dot = tok.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
      throw ConfigError("malformed CONFIG field '" + std::string(tok) + "'");
    }
    const auto value = tok.substr(eq + 1);
    const auto section = tok.substr(0, dot);
    const auto key = tok.substr(dot + 1, eq - dot - 1);
    apply_setting(cfg, section, key, section == "scenario" && key == "map" ? decode(value) : std::string(value));
  }
  if (cfg.map_name == "-") cfg.map_name.clear();
  validated(cfg);
  return cfg;
}

}  // namespace mrx
