#include "mrx/gridmap.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numbers>
#include <sstream>

namespace mrx {

Pose::Pose(double px, double py, double heading) : x(px), y(py), theta(normalize_angle(heading)) {}

double Pose::normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, two_pi);
  if (r < 0) r += two_pi;
  return r - std::numbers::pi;
}

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Cell fill)
    : width_(width), height_(height), resolution_(resolution) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
  if (!(resolution > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  counts_[static_cast<int>(fill)] = cells_.size();
}

void OccupancyGrid::set(CellIndex i, Cell c) {
  Cell& slot = cells_[static_cast<std::size_t>(i)];
  if (slot == c) return;
  --counts_[static_cast<int>(slot)];
  ++counts_[static_cast<int>(c)];
  slot = c;
}

Point2 OccupancyGrid::center(CellIndex i) const {
  const CellCoord c = coord(i);
  return {(c.x + 0.5) * resolution_, (c.y + 0.5) * resolution_};
}

std::optional<CellIndex> OccupancyGrid::cell_at(Point2 p) const {
  const double fx = std::floor(p.x / resolution_);
  const double fy = std::floor(p.y / resolution_);
  if (fx < 0 || fy < 0 || fx >= width_ || fy >= height_) return std::nullopt;
  return index(static_cast<int>(fx), static_cast<int>(fy));
}

RoiMask::RoiMask(int width, int height, bool fill)
    : width_(width),
      height_(height),
      bits_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill ? 1 : 0),
      count_(fill ? bits_.size() : 0) {}

void RoiMask::insert(CellIndex i) {
  auto& b = bits_[static_cast<std::size_t>(i)];
  if (!b) {
    b = 1;
    ++count_;
  }
}

void RoiMask::erase(CellIndex i) {
  auto& b = bits_[static_cast<std::size_t>(i)];
  if (b) {
    b = 0;
    --count_;
  }
}

std::size_t GroundTruth::unreachable_count() const {
  return static_cast<std::size_t>(std::count(unreachable.begin(), unreachable.end(), 1));
}

std::size_t GroundTruth::observable_free_count() const {
  return grid.count(Cell::Free) - unreachable_count();
}

namespace {

GroundTruth finish_truth(OccupancyGrid grid, std::span<const Point2> starts) {
  GroundTruth truth;
  for (const Point2& p : starts) {
    const auto c = grid.cell_at(p);
    if (!c) throw std::invalid_argument("start position outside the map");
    if (grid.at(*c) != Cell::Free) throw std::invalid_argument("start position is not a free cell");
    truth.starts.push_back(*c);
  }
  truth.unreachable.assign(grid.size(), 0);
  if (!truth.starts.empty()) {
    const auto reach = reachable_free_multi(grid, truth.starts);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid.at(static_cast<CellIndex>(i)) == Cell::Free && !reach[i]) truth.unreachable[i] = 1;
    }
  }
  truth.grid = std::move(grid);
  return truth;
}

}  // namespace

GroundTruth load_map(std::string_view text, double resolution, std::span<const Point2> starts) {
  std::vector<std::string_view> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    rows.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  if (rows.empty() || rows.front().empty()) throw FormatError("map is empty");
  const std::size_t width = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw FormatError("ragged map: row " + std::to_string(r) + " has " +
                        std::to_string(rows[r].size()) + " cells, expected " +
                        std::to_string(width));
    }
  }
  OccupancyGrid grid(static_cast<int>(width), static_cast<int>(rows.size()), resolution, Cell::Free);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const char ch = rows[r][c];
      if (ch == '#') {
        grid.set(grid.index(static_cast<int>(c), static_cast<int>(r)), Cell::Obstacle);
      } else if (ch != '.') {
        throw FormatError("unexpected character '" + std::string(1, ch) + "' at row " +
                          std::to_string(r) + ", column " + std::to_string(c));
      }
    }
  }
  return finish_truth(std::move(grid), starts);
}

GroundTruth load_pgm(std::string_view bytes, double resolution, std::span<const Point2> starts) {
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string_view {
    while (pos < bytes.size()) {
      const char ch = bytes[pos];
      if (ch == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t begin = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(begin, pos - begin);
  };
  auto next_int = [&]() {
    const auto tok = next_token();
    int v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) throw FormatError("bad PGM header");
    return v;
  };
  const auto magic = next_token();
  if (magic != "P2" && magic != "P5") throw FormatError("not a P2/P5 PGM file");
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) throw FormatError("unsupported PGM geometry");
  OccupancyGrid grid(w, h, resolution, Cell::Free);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (magic == "P5") ++pos;  // single whitespace after maxval
  for (std::size_t i = 0; i < n; ++i) {
    int v = 0;
    if (magic == "P5") {
      if (pos >= bytes.size()) throw FormatError("truncated PGM raster");
      v = static_cast<unsigned char>(bytes[pos++]);
    } else {
      v = next_int();
    }
    const int scaled = v * 255 / maxval;
    if (scaled < 50) {
      grid.set(static_cast<CellIndex>(i), Cell::Obstacle);
    } else if (scaled <= 205) {
      throw FormatError("PGM pixel " + std::to_string(i) + " is neither free nor obstacle");
    }
  }
  return finish_truth(std::move(grid), starts);
}

std::string to_map_text(const OccupancyGrid& grid) {
  std::string out;
  out.reserve(grid.size() + static_cast<std::size_t>(grid.height()));
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) out.push_back(grid.at(x, y) == Cell::Obstacle ? '#' : '.');
    out.push_back('\n');
  }
  return out;
}

bool line_of_sight(const OccupancyGrid& grid, CellCoord a, CellCoord b) {
  bool clear = true;
  for_each_ray_cell(a, b, [&](CellCoord c) {
    if (c == a || c == b) return true;
    if (grid.at(c.x, c.y) == Cell::Obstacle) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear;
}

bool segment_free(const OccupancyGrid& grid, CellCoord a, CellCoord b) {
  bool clear = true;
  for_each_ray_cell(a, b, [&](CellCoord c) {
    if (!grid.in_bounds(c.x, c.y) || grid.at(c.x, c.y) != Cell::Free) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear;
}

std::vector<CellIndex> visible_unknown(const OccupancyGrid& known, const GroundTruth& truth,
                                       Point2 pose, double radius) {
  const auto origin_index = known.cell_at(pose);
  if (!origin_index) throw std::out_of_range("sensor pose outside the map");
  const CellCoord origin = known.coord(*origin_index);
  const double res = known.resolution();
  const int span = static_cast<int>(std::ceil(radius / res)) + 1;
  const double r2 = radius * radius;
  std::vector<CellIndex> out;
  const int y0 = std::max(0, origin.y - span);
  const int y1 = std::min(known.height() - 1, origin.y + span);
  const int x0 = std::max(0, origin.x - span);
  const int x1 = std::min(known.width() - 1, origin.x + span);
  for (int y = y0; y <= y1; ++y) {
    const double cy = (y + 0.5) * res - pose.y;
    for (int x = x0; x <= x1; ++x) {
      const CellIndex i = known.index(x, y);
      if (known.at(i) != Cell::Unknown) continue;
      const double cx = (x + 0.5) * res - pose.x;
      if (cx * cx + cy * cy > r2) continue;
      if (line_of_sight(truth.grid, origin, {x, y})) out.push_back(i);
    }
  }
  return out;
}

std::vector<CellIndex> reveal(OccupancyGrid& known, const GroundTruth& truth, const Pose& pose,
                              double radius) {
  if (!known.same_shape(truth.grid)) throw std::invalid_argument("known map and ground truth differ in shape");
  auto cells = visible_unknown(known, truth, pose.position(), radius);
  for (CellIndex i : cells) known.set(i, truth.grid.at(i));
  return cells;
}

OccupancyGrid merge(const OccupancyGrid& global, const OccupancyGrid& local) {
  if (!global.same_shape(local)) throw std::invalid_argument("cannot merge grids of different shape");
  OccupancyGrid out = global;
  for (std::size_t k = 0; k < global.size(); ++k) {
    const auto i = static_cast<CellIndex>(k);
    const Cell a = global.at(i);
    const Cell b = local.at(i);
    if (a == Cell::Unknown) {
      out.set(i, b);
    } else if (b == Cell::Obstacle) {
      out.set(i, Cell::Obstacle);
    }
  }
  return out;
}

std::vector<std::uint8_t> reachable_free_multi(const OccupancyGrid& grid,
                                               std::span<const CellIndex> seeds) {
  std::vector<std::uint8_t> seen(grid.size(), 0);
  std::vector<CellIndex> stack;
  for (CellIndex s : seeds) {
    if (grid.at(s) != Cell::Free || seen[static_cast<std::size_t>(s)]) continue;
    seen[static_cast<std::size_t>(s)] = 1;
    stack.push_back(s);
  }
  const int w = grid.width();
  while (!stack.empty()) {
    const CellIndex i = stack.back();
    stack.pop_back();
    const CellCoord c = grid.coord(i);
    const CellIndex nbrs[4] = {c.x > 0 ? i - 1 : -1, c.x + 1 < w ? i + 1 : -1, c.y > 0 ? i - w : -1,
                               c.y + 1 < grid.height() ? i + w : -1};
    for (CellIndex n : nbrs) {
      if (n < 0 || seen[static_cast<std::size_t>(n)] || grid.at(n) != Cell::Free) continue;
      seen[static_cast<std::size_t>(n)] = 1;
      stack.push_back(n);
    }
  }
  return seen;
}

std::vector<std::uint8_t> reachable_free(const OccupancyGrid& grid, CellIndex from) {
  if (from < 0 || static_cast<std::size_t>(from) >= grid.size() || grid.at(from) != Cell::Free) {
    throw std::invalid_argument("flood fill must start from a free cell");
  }
  const CellIndex seeds[1] = {from};
  return reachable_free_multi(grid, seeds);
}

}  // namespace mrx
