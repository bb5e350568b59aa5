#pragma once

#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "mrx/gridmap.hpp"

namespace mrx::test {

// '.' free, '#' obstacle, '?' unknown.
inline OccupancyGrid grid_from(const std::vector<std::string>& rows, double res = 1.0) {
  OccupancyGrid g(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), res);
  for (std::size_t y = 0; y < rows.size(); ++y) {
    for (std::size_t x = 0; x < rows[y].size(); ++x) {
      const char ch = rows[y][x];
      g.set(g.index(static_cast<int>(x), static_cast<int>(y)),
            ch == '#' ? Cell::Obstacle : (ch == '?' ? Cell::Unknown : Cell::Free));
    }
  }
  return g;
}

// Floating-point parametric ray march; independent of the integer stepping
// used by the library.
inline std::vector<CellCoord> ray_oracle(CellCoord a, CellCoord b) {
  const int dx = b.x - a.x;
  const int dy = b.y - a.y;
  const int n = std::max(std::abs(dx), std::abs(dy));
  std::vector<CellCoord> out;
  if (n == 0) return {a};
  for (int i = 0; i <= n; ++i) {
    const double fx = a.x + static_cast<double>(dx) * i / n;
    const double fy = a.y + static_cast<double>(dy) * i / n;
    out.push_back({static_cast<int>(std::floor(fx + 0.5 + 1e-9)), static_cast<int>(std::floor(fy + 0.5 + 1e-9))});
  }
  return out;
}

inline bool visible_oracle(const OccupancyGrid& g, CellCoord a, CellCoord b) {
  const auto cells = ray_oracle(a, b);
  for (std::size_t k = 1; k + 1 < cells.size(); ++k) {
    if (g.at(cells[k].x, cells[k].y) == Cell::Obstacle) return false;
  }
  return true;
}

// Plain BFS flood fill over free cells (4-neighborhood).
inline std::vector<bool> flood_oracle(const OccupancyGrid& g, CellCoord from) {
  std::vector<bool> seen(g.size(), false);
  std::queue<CellCoord> q;
  if (g.at(from.x, from.y) != Cell::Free) return seen;
  seen[static_cast<std::size_t>(g.index(from.x, from.y))] = true;
  q.push(from);
  const int d[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  while (!q.empty()) {
    const CellCoord c = q.front();
    q.pop();
    for (const auto& o : d) {
      const int nx = c.x + o[0];
      const int ny = c.y + o[1];
      if (!g.in_bounds(nx, ny) || g.at(nx, ny) != Cell::Free) continue;
      const auto i = static_cast<std::size_t>(g.index(nx, ny));
      if (seen[i]) continue;
      seen[i] = true;
      q.push({nx, ny});
    }
  }
  return seen;
}

}  // namespace mrx::test
