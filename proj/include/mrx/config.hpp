#pragma once

// Line-oriented "key = value" configuration with [sections], scenario and
// experiment files, and map-file loading.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mrx/gridmap.hpp"
#include "mrx/world.hpp"

namespace mrx {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IniEntry {
  std::string section;  // "" before the first header
  std::string key;
  std::string value;
  int line = 0;
};

/// '#' starts a comment anywhere, ';' only at the start of a line; blank
/// lines are skipped. Throws ConfigError
/// on malformed lines.
std::vector<IniEntry> parse_ini(std::string_view text);

/// Applies one setting of a scenario section ([scenario], [robot], [sim],
/// [center], [greedy], [sampling], [roadmap]). Throws ConfigError for
/// unknown keys or unparsable values.
void apply_setting(ScenarioConfig& cfg, std::string_view section, std::string_view key, std::string_view value);

struct ScenarioFile {
  ScenarioConfig config;
  std::string map_path;    // [scenario] map
  double resolution = 0.1; // [scenario] resolution
};

/// Parses and validates a scenario file; validation failures become
/// ConfigError.
ScenarioFile parse_scenario(std::string_view text);

struct Combination {
  std::string map_path;
  std::vector<int> robots;
  std::vector<StrategyKind> strategies;
  std::vector<std::uint64_t> seeds;
};

struct ExperimentSpec {
  std::vector<Combination> combinations;
  std::string output_dir;
  double resolution = 0.1;
  int jobs = 1;
  ScenarioConfig base;  // shared scenario sections

  std::size_t run_count() const;
};

/// [experiment] holds output/resolution/jobs, every [combination] section
/// one combination; other sections override the shared scenario. Seeds are
/// "a-b" ranges or comma lists and must be distinct within a combination.
ExperimentSpec parse_experiment(std::string_view text);

/// Loads a '.'/'#' map file, or a PGM when the path ends in ".pgm".
/// Throws std::runtime_error when the file cannot be read.
GroundTruth load_map_file(const std::string& path, double resolution);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Inverse of config_line(): rebuilds the scenario from a log header.
ScenarioConfig parse_config_line(std::string_view line);

}  // namespace mrx
