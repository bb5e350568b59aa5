#pragma once

// Procedural 50 m x 30 m test environments.

#include <cstdint>
#include <optional>
#include <string_view>

#include "mrx/gridmap.hpp"

namespace mrx {

enum class MapKind { Empty, Grid, Random, Campus };

std::string_view to_string(MapKind k);
std::optional<MapKind> parse_map_kind(std::string_view s);

inline constexpr int kMapWidth = 500;
inline constexpr int kMapHeight = 300;
inline constexpr double kMapResolution = 0.1;

/// Free/obstacle grid of the given kind. The 3 m x 3 m corner at the origin
/// is always free so default robot starts fit. Random maps keep only the
/// largest free component; when that leaves the start corner cut off or
/// the obstacle density outside [15%, 25%], generation retries with a
/// derived seed, up to 10 attempts, then throws std::runtime_error.
OccupancyGrid generate_map(MapKind kind, std::uint64_t seed);

/// Number of 4-connected components of Free cells.
int free_components(const OccupancyGrid& grid);

}  // namespace mrx
