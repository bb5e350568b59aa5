#pragma once

// SVG snapshots of a world: occupancy, region partition, roadmap, robots
// and visiting-sequence arrows.

#include <string>

#include "mrx/world.hpp"

namespace mrx {

struct RenderOptions {
  double pixels_per_meter = 20.0;
  bool roadmap = true;
  bool regions = true;
  bool routes = true;
};

/// Region fill color, a deterministic function of the region id.
std::string region_color(int id);

/// Byte-deterministic SVG document. Layers in order: occupancy, regions,
/// roadmap edges, route arrows (one polyline per robot, in visiting order),
/// robots.
std::string render_snapshot(const World& w, const RenderOptions& opts = {});

/// The same layers from explicit inputs.
std::string render_svg(const OccupancyGrid& known, const Rrg* roadmap, const PlanView& plan,
                       const std::vector<RobotSim>& robots, double time, const RenderOptions& opts = {});

}  // namespace mrx
