#include "mrx/mapgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

#include "mrx/random.hpp"

namespace mrx {

std::string_view to_string(MapKind k) {
  switch (k) {
    case MapKind::Empty: return "empty";
    case MapKind::Grid: return "grid";
    case MapKind::Random: return "random";
    case MapKind::Campus: return "campus";
  }
  return "?";
}

std::optional<MapKind> parse_map_kind(std::string_view s) {
  std::string low(s);
  for (char& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (MapKind k : {MapKind::Empty, MapKind::Grid, MapKind::Random, MapKind::Campus}) {
    if (low == to_string(k)) return k;
  }
  return std::nullopt;
}

namespace {

constexpr double kWall = 0.2;

class Canvas {
 public:
  Canvas() : grid_(kMapWidth, kMapHeight, kMapResolution, Cell::Free) {}

  // Fills the cells whose centers lie in [x0, x1) x [y0, y1), in meters.
  void fill(double x0, double y0, double x1, double y1, Cell c = Cell::Obstacle) {
    const auto lo = [](double v) { return static_cast<int>(std::ceil(v / kMapResolution - 0.5 - 1e-9)); };
    const int cx0 = std::max(0, lo(x0));
    const int cx1 = std::min(kMapWidth, lo(x1));
    const int cy0 = std::max(0, lo(y0));
    const int cy1 = std::min(kMapHeight, lo(y1));
    for (int y = cy0; y < cy1; ++y) {
      for (int x = cx0; x < cx1; ++x) grid_.set(grid_.index(x, y), c);
    }
  }

  // Hollow rectangle with wall thickness kWall.
  void box(double x0, double y0, double x1, double y1) {
    fill(x0, y0, x1, y0 + kWall);
    fill(x0, y1 - kWall, x1, y1);
    fill(x0, y0, x0 + kWall, y1);
    fill(x1 - kWall, y0, x1, y1);
  }

  void clear(double x0, double y0, double x1, double y1) { fill(x0, y0, x1, y1, Cell::Free); }

  void border() { box(0, 0, kMapWidth * kMapResolution, kMapHeight * kMapResolution); }

  OccupancyGrid& grid() { return grid_; }

 private:
  OccupancyGrid grid_;
};

OccupancyGrid grid_map(std::uint64_t seed) {
  Rng rng(seed);
  Canvas c;
  c.border();
  // Central corridor between two rows of 10 m rooms.
  c.fill(0, 13, 50, 13 + kWall);
  c.fill(0, 17 - kWall, 50, 17);
  for (int k = 1; k < 5; ++k) {
    const double x = 10.0 * k;
    c.fill(x - kWall / 2, 0, x + kWall / 2, 13);
    c.fill(x - kWall / 2, 17, x + kWall / 2, 30);
  }
  for (int k = 0; k < 5; ++k) {
    const double jitter = 2.0 * uniform01(rng) - 1.0;
    const double x = 10.0 * k + 5.0 + 2.5 * jitter;
    c.clear(x - 0.75, 13 - 0.1, x + 0.75, 13 + kWall + 0.1);
    const double jitter2 = 2.0 * uniform01(rng) - 1.0;
    const double x2 = 10.0 * k + 5.0 + 2.5 * jitter2;
    c.clear(x2 - 0.75, 17 - kWall - 0.1, x2 + 0.75, 17 + 0.1);
  }
  // Every other shared room wall has a connecting door.
  for (int k = 1; k < 5; k += 2) {
    const double x = 10.0 * k;
    c.clear(x - 0.2, 5.5, x + 0.2, 7.0);
    c.clear(x - 0.2, 23.0, x + 0.2, 24.5);
  }
  return std::move(c.grid());
}

OccupancyGrid campus_map() {
  Canvas c;
  c.border();
  // West hall with two rooms and a shared door.
  c.box(6, 4, 18, 12);
  c.fill(12 - kWall / 2, 4, 12 + kWall / 2, 12);
  c.clear(11.9, 7.0, 12.1, 8.5);
  c.clear(8.0, 3.9, 9.5, 4.3);
  c.clear(15.0, 11.7, 16.5, 12.1);
  // South-east block split into three offices along a hallway.
  c.box(24, 3, 46, 11);
  c.fill(24, 7 - kWall / 2, 40, 7 + kWall / 2);
  c.fill(31 - kWall / 2, 3, 31 + kWall / 2, 7);
  c.fill(38 - kWall / 2, 3, 38 + kWall / 2, 7);
  c.clear(23.9, 8.0, 24.3, 10.0);
  c.clear(27.0, 6.8, 28.5, 7.2);
  c.clear(34.0, 6.8, 35.5, 7.2);
  c.clear(41.5, 10.7, 43.0, 11.1);
  // Solid auditorium and courtyard pillars.
  c.fill(21, 16, 29, 23);
  for (double x = 4.0; x < 19.0; x += 3.0) c.fill(x, 15.5, x + 0.6, 16.1);
  // North-east wing with a solid storage block.
  c.box(33, 15, 47, 27);
  c.fill(33, 21 - kWall / 2, 40, 21 + kWall / 2);
  c.clear(32.9, 17.0, 33.3, 18.5);
  c.clear(36.0, 20.8, 37.5, 21.2);
  c.fill(41, 19, 46, 25);
  // Partial north wall forming a dead-end alley.
  c.fill(8, 22, 18, 22 + kWall);
  c.fill(18 - kWall, 22, 18, 27.5);
  return std::move(c.grid());
}

std::vector<int> components(const OccupancyGrid& g) {
  std::vector<int> label(g.size(), -1);
  int next = 0;
  for (CellIndex s = 0; s < static_cast<CellIndex>(g.size()); ++s) {
    if (g.at(s) != Cell::Free || label[static_cast<std::size_t>(s)] >= 0) continue;
    std::queue<CellIndex> q;
    q.push(s);
    label[static_cast<std::size_t>(s)] = next;
    while (!q.empty()) {
      const CellCoord c = g.coord(q.front());
      q.pop();
      const int dx[] = {1, -1, 0, 0};
      const int dy[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int nx = c.x + dx[k];
        const int ny = c.y + dy[k];
        if (!g.in_bounds(nx, ny)) continue;
        const CellIndex m = g.index(nx, ny);
        if (g.at(m) != Cell::Free || label[static_cast<std::size_t>(m)] >= 0) continue;
        label[static_cast<std::size_t>(m)] = next;
        q.push(m);
      }
    }
    ++next;
  }
  return label;
}

std::optional<OccupancyGrid> random_attempt(std::uint64_t seed) {
  Rng rng(seed);
  Canvas c;
  c.border();
  const double target = 0.20 * kMapWidth * kMapHeight;
  while (static_cast<double>(c.grid().count(Cell::Obstacle)) < target) {
    const double w = 0.5 + 2.5 * uniform01(rng);
    const double h = 0.5 + 2.5 * uniform01(rng);
    const double x = uniform01(rng) * (50.0 - w);
    const double y = uniform01(rng) * (30.0 - h);
    if (x < 3.5 && y < 3.5) continue;
    c.fill(x, y, x + w, y + h);
  }
  OccupancyGrid& g = c.grid();
  const auto label = components(g);
  const CellIndex start = g.index(10, 10);
  const int keep = label[static_cast<std::size_t>(start)];
  if (keep < 0) return std::nullopt;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (label[i] >= 0 && label[i] != keep) g.set(static_cast<CellIndex>(i), Cell::Obstacle);
  }
  const double density = static_cast<double>(g.count(Cell::Obstacle)) / static_cast<double>(g.size());
  if (density < 0.15 || density > 0.25) return std::nullopt;
  return std::move(g);
}

}  // namespace

int free_components(const OccupancyGrid& grid) {
  const auto label = components(grid);
  int n = 0;
  for (int l : label) n = std::max(n, l + 1);
  return n;
}

OccupancyGrid generate_map(MapKind kind, std::uint64_t seed) {
  switch (kind) {
    case MapKind::Empty: {
      Canvas c;
      c.border();
      return std::move(c.grid());
    }
    case MapKind::Grid: return grid_map(seed);
    case MapKind::Campus: return campus_map();
    case MapKind::Random:
      for (int attempt = 0; attempt < 10; ++attempt) {
        if (auto g = random_attempt(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(attempt))) {
          return std::move(*g);
        }
      }
      throw std::runtime_error("random map generation failed after 10 attempts");
  }
  throw std::invalid_argument("unknown map kind");
}

}  // namespace mrx
