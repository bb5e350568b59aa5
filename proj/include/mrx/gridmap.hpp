#pragma once

// Occupancy grids, ground-truth environments, the range sensor model and
// map merging.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mrx {

/// Raised for malformed map files, scenario files and experiment specs.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Cell : std::uint8_t { Free = 0, Obstacle = 1, Unknown = 2 };

using CellIndex = std::int32_t;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct CellCoord {
  int x = 0;
  int y = 0;

  friend bool operator==(const CellCoord&, const CellCoord&) = default;
};

/// Planar robot pose. theta is kept in [-pi, pi).
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose() = default;
  Pose(double px, double py, double heading = 0.0);

  Point2 position() const { return {x, y}; }
  static double normalize_angle(double a);
};

/// Row-major grid. Cell (x, y) covers [x*res, (x+1)*res) x [y*res, (y+1)*res);
/// row 0 is the first line of a map file.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, Cell fill = Cell::Unknown);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  Cell at(CellIndex i) const { return cells_[static_cast<std::size_t>(i)]; }
  Cell at(int x, int y) const { return at(index(x, y)); }
  void set(CellIndex i, Cell c);

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  CellIndex index(int x, int y) const { return y * width_ + x; }
  CellCoord coord(CellIndex i) const { return {i % width_, i / width_}; }

  /// Metric center of a cell.
  Point2 center(CellIndex i) const;
  /// Cell containing a metric point, if inside the grid.
  std::optional<CellIndex> cell_at(Point2 p) const;

  std::size_t count(Cell c) const { return counts_[static_cast<int>(c)]; }
  std::span<const Cell> cells() const { return cells_; }

  bool same_shape(const OccupancyGrid& o) const {
    return width_ == o.width_ && height_ == o.height_ && resolution_ == o.resolution_;
  }

  friend bool operator==(const OccupancyGrid& a, const OccupancyGrid& b) {
    return a.same_shape(b) && a.cells_ == b.cells_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.0;
  std::vector<Cell> cells_;
  std::size_t counts_[3] = {0, 0, 0};
};

/// Per-cell membership mask with the dimensions of its grid.
class RoiMask {
 public:
  RoiMask() = default;
  RoiMask(int width, int height, bool fill = false);
  static RoiMask full(const OccupancyGrid& g) { return RoiMask(g.width(), g.height(), true); }

  int width() const { return width_; }
  int height() const { return height_; }
  bool contains(CellIndex i) const { return bits_[static_cast<std::size_t>(i)] != 0; }
  void insert(CellIndex i);
  void erase(CellIndex i);
  std::size_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  bool matches(const OccupancyGrid& g) const { return width_ == g.width() && height_ == g.height(); }

  friend bool operator==(const RoiMask&, const RoiMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

/// A fully known environment plus the free cells no robot can ever reach.
struct GroundTruth {
  OccupancyGrid grid;
  std::vector<CellIndex> starts;
  std::vector<std::uint8_t> unreachable;  // 1 for Free cells cut off from every start

  bool is_unreachable(CellIndex i) const { return unreachable[static_cast<std::size_t>(i)] != 0; }
  std::size_t unreachable_count() const;
  /// Free cells reachable from a start: the cells exploration has to map.
  std::size_t observable_free_count() const;
};

/// Parses an ASCII map ('.' free, '#' obstacle, LF rows). Throws FormatError
/// on empty or ragged input and std::invalid_argument on bad starts.
GroundTruth load_map(std::string_view text, double resolution, std::span<const Point2> starts);

/// Parses a P2/P5 PGM. Pixels < 50 are obstacles, > 205 free; anything in
/// between is rejected because ground truth must be fully known.
GroundTruth load_pgm(std::string_view bytes, double resolution, std::span<const Point2> starts);

/// Serializes the free/obstacle content of a grid in the map-file format.
std::string to_map_text(const OccupancyGrid& grid);

/// Visits the cells of the integer ray from a to b, both ends included. The
/// ray steps one cell along the major axis; the minor offset after i steps
/// is floor((2*i*d_minor + n) / (2*n)) with n the major extent.
template <typename Visit>
void for_each_ray_cell(CellCoord a, CellCoord b, Visit&& visit) {
  const int dx = b.x - a.x;
  const int dy = b.y - a.y;
  const bool x_major = std::abs(dx) >= std::abs(dy);
  const int n = x_major ? std::abs(dx) : std::abs(dy);
  const int step = x_major ? (dx >= 0 ? 1 : -1) : (dy >= 0 ? 1 : -1);
  const int dm = x_major ? dy : dx;
  long long err = n;  // (2*i*dm + n) - 2*n*m
  const long long two_n = 2LL * n;
  int major = x_major ? a.x : a.y;
  int minor = x_major ? a.y : a.x;
  for (int i = 0;; ++i) {
    const CellCoord c = x_major ? CellCoord{major, minor} : CellCoord{minor, major};
    if (!visit(c)) return;
    if (i == n) return;
    major += step;
    err += 2LL * dm;
    if (err >= two_n) {
      err -= two_n;
      ++minor;
    } else if (err < 0) {
      err += two_n;
      --minor;
    }
  }
}

/// True when no cell strictly between a and b on the ray is an obstacle.
bool line_of_sight(const OccupancyGrid& grid, CellCoord a, CellCoord b);

/// True when every cell of the ray from a to b (inclusive) is Free.
bool segment_free(const OccupancyGrid& grid, CellCoord a, CellCoord b);

/// Unknown cells of `known` that the sensor at `pose` would reveal: cell
/// center within `radius` and an unobstructed ray in the ground truth.
std::vector<CellIndex> visible_unknown(const OccupancyGrid& known, const GroundTruth& truth,
                                       Point2 pose, double radius);

/// Applies the sensor model and returns the newly revealed cells.
std::vector<CellIndex> reveal(OccupancyGrid& known, const GroundTruth& truth, const Pose& pose,
                              double radius);

/// Cell-wise merge: known beats Unknown, Obstacle beats Free.
OccupancyGrid merge(const OccupancyGrid& global, const OccupancyGrid& local);

/// 4-connected flood fill over Free cells. Returns a mask indexed by cell.
std::vector<std::uint8_t> reachable_free(const OccupancyGrid& grid, CellIndex from);

/// Flood fill seeded from several Free cells; non-Free seeds are skipped.
std::vector<std::uint8_t> reachable_free_multi(const OccupancyGrid& grid,
                                               std::span<const CellIndex> seeds);

}  // namespace mrx
