#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "mrx/gridmap.hpp"

using namespace mrx;
using mrx::test::grid_from;

TEST_CASE("load_map maps characters and computes unreachable cells") {
  const Point2 start{0.05, 0.05};
  SUBCASE("open 3x3") {
    const auto t = load_map("...\n...\n...\n", 0.1, {&start, 1});
    CHECK(t.grid.width() == 3);
    CHECK(t.grid.height() == 3);
    CHECK(t.grid.count(Cell::Free) == 9);
    CHECK(t.unreachable_count() == 0);
  }
  SUBCASE("row with flanking walls") {
    const Point2 mid{0.15, 0.05};
    const auto t = load_map("#.#", 0.1, {&mid, 1});
    CHECK(t.grid.at(0, 0) == Cell::Obstacle);
    CHECK(t.grid.at(1, 0) == Cell::Free);
    CHECK(t.grid.at(2, 0) == Cell::Obstacle);
  }
  SUBCASE("enclosed pocket matches flood fill from the start") {
    const std::string text =
        "......\n"
        ".###..\n"
        ".#.#..\n"
        ".###..\n"
        "......\n";
    const auto t = load_map(text, 0.1, {&start, 1});
    const auto reach = mrx::test::flood_oracle(t.grid, {0, 0});
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
      const bool expect = t.grid.at(static_cast<CellIndex>(i)) == Cell::Free && !reach[i];
      CHECK(t.is_unreachable(static_cast<CellIndex>(i)) == expect);
    }
    CHECK(t.is_unreachable(t.grid.index(2, 2)));
    CHECK(t.observable_free_count() == t.grid.count(Cell::Free) - 1);
  }
}

TEST_CASE("load_map rejects malformed input") {
  CHECK_THROWS_AS(load_map("", 0.1, {}), FormatError);
  CHECK_THROWS_AS(load_map("...\n..\n", 0.1, {}), FormatError);
  CHECK_THROWS_AS(load_map("..x\n", 0.1, {}), FormatError);
  const Point2 on_wall{0.05, 0.05};
  CHECK_THROWS_AS(load_map("#.\n", 0.1, {&on_wall, 1}), std::invalid_argument);
}

TEST_CASE("load_pgm thresholds pixels and refuses grey") {
  const Point2 start{0.15, 0.05};
  const auto t = load_pgm("P2\n# comment\n3 1\n255\n0 255 10\n", 0.1, {&start, 1});
  CHECK(t.grid.at(0, 0) == Cell::Obstacle);
  CHECK(t.grid.at(1, 0) == Cell::Free);
  CHECK(t.grid.at(2, 0) == Cell::Obstacle);
  std::string raw = "P5 2 1 255\n";
  raw.push_back(static_cast<char>(255));
  raw.push_back(static_cast<char>(0));
  const Point2 s0{0.05, 0.05};
  const auto t5 = load_pgm(raw, 0.1, {&s0, 1});
  CHECK(t5.grid.at(1, 0) == Cell::Obstacle);
  CHECK_THROWS_AS(load_pgm("P2 1 1 255 128", 0.1, {}), FormatError);
}

TEST_CASE("map text round trip") {
  const std::string text = "#..\n.#.\n";
  const auto t = load_map(text, 0.1, {});
  CHECK(to_map_text(t.grid) == text);
}

TEST_CASE("integer ray stepping matches the parametric ray march") {
  for (int x = -17; x <= 17; ++x) {
    for (int y = -17; y <= 17; ++y) {
      std::vector<CellCoord> got;
      for_each_ray_cell({3, -2}, {3 + x, -2 + y}, [&](CellCoord c) {
        got.push_back(c);
        return true;
      });
      const auto want = mrx::test::ray_oracle({3, -2}, {3 + x, -2 + y});
      REQUIRE(got == want);
    }
  }
}

TEST_CASE("pose angle normalization") {
  CHECK(Pose(0, 0, 3.5).theta == doctest::Approx(3.5 - 2 * 3.14159265358979));
  CHECK(Pose(0, 0, -3.14159265358979323846).theta == doctest::Approx(-3.14159265358979));
  CHECK(Pose(0, 0, 1.0).theta == doctest::Approx(1.0));
}

TEST_CASE("reveal without occlusion uncovers the sensor disk") {
  GroundTruth truth = load_map(std::string(200, '.') + "\n" + [] {
    std::string s;
    for (int r = 1; r < 200; ++r) s += std::string(200, '.') + "\n";
    return s;
  }(), 0.1, {});
  OccupancyGrid known(200, 200, 0.1);
  const Pose pose(10.0, 10.0);
  const auto cells = reveal(known, truth, pose, 6.0);
  std::size_t expect = 0;
  for (std::size_t i = 0; i < known.size(); ++i) {
    const Point2 c = known.center(static_cast<CellIndex>(i));
    if (distance(c, pose.position()) <= 6.0) ++expect;
  }
  CHECK(cells.size() == expect);
  CHECK(known.count(Cell::Free) == expect);
  CHECK(known.count(Cell::Free) + known.count(Cell::Obstacle) + known.count(Cell::Unknown) == known.size());
  CHECK(reveal(known, truth, pose, 6.0).empty());
}

TEST_CASE("an obstacle hides cells behind it but is itself revealed") {
  const auto truth = load_map("..#..\n", 1.0, {});
  OccupancyGrid known(5, 1, 1.0);
  reveal(known, truth, Pose(0.5, 0.5), 10.0);
  CHECK(known.at(1, 0) == Cell::Free);
  CHECK(known.at(2, 0) == Cell::Obstacle);
  CHECK(known.at(3, 0) == Cell::Unknown);
  CHECK(known.at(4, 0) == Cell::Unknown);
}

TEST_CASE("reveal matches the per-cell line-of-sight oracle around a cross") {
  std::vector<std::string> rows(31, std::string(31, '.'));
  for (int k = 8; k <= 22; ++k) {
    rows[15][static_cast<std::size_t>(k)] = '#';
    rows[static_cast<std::size_t>(k)][15] = '#';
  }
  std::string text;
  for (const auto& r : rows) text += r + "\n";
  const auto truth = load_map(text, 1.0, {});
  for (const Point2 pose : {Point2{4.5, 4.5}, Point2{12.5, 20.5}, Point2{27.2, 14.4}}) {
    OccupancyGrid known(31, 31, 1.0);
    const auto got = reveal(known, truth, Pose(pose.x, pose.y), 14.0);
    const CellCoord o = known.coord(*known.cell_at(pose));
    std::size_t expected = 0;
    for (std::size_t i = 0; i < known.size(); ++i) {
      const auto ci = static_cast<CellIndex>(i);
      const bool in_range = distance(known.center(ci), pose) <= 14.0;
      const bool vis = in_range && mrx::test::visible_oracle(truth.grid, o, known.coord(ci));
      CHECK((known.at(ci) != Cell::Unknown) == vis);
      expected += vis ? 1 : 0;
    }
    CHECK(got.size() == expected);
  }
}

TEST_CASE("reveal rejects poses outside the map") {
  const auto truth = load_map("...\n", 1.0, {});
  OccupancyGrid known(3, 1, 1.0);
  CHECK_THROWS_AS(reveal(known, truth, Pose(-1.0, 0.5), 2.0), std::out_of_range);
  CHECK_THROWS_AS(reveal(known, truth, Pose(1.0, 7.0), 2.0), std::out_of_range);
}

TEST_CASE("merge rules") {
  const auto m = grid_from({".#?", "?.#"});
  const OccupancyGrid unknown(3, 2, 1.0);
  CHECK(merge(m, unknown) == m);
  CHECK(merge(unknown, m) == m);
  const auto a = grid_from({"."});
  const auto b = grid_from({"#"});
  CHECK(merge(a, b).at(0) == Cell::Obstacle);
  CHECK(merge(b, a).at(0) == Cell::Obstacle);
  CHECK_THROWS_AS(merge(m, OccupancyGrid(2, 2, 1.0)), std::invalid_argument);
}

TEST_CASE("merge properties on random grids") {
  std::mt19937 gen(7);
  std::uniform_int_distribution<int> pick(0, 2);
  auto random_grid = [&] {
    OccupancyGrid g(9, 7, 0.5);
    for (std::size_t i = 0; i < g.size(); ++i) g.set(static_cast<CellIndex>(i), static_cast<Cell>(pick(gen)));
    return g;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_grid();
    const auto b = random_grid();
    const auto c = random_grid();
    const auto ab = merge(a, b);
    CHECK(ab == merge(b, a));
    CHECK(merge(ab, c) == merge(a, merge(b, c)));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto ci = static_cast<CellIndex>(i);
      // Known cells never fall back to Unknown.
      if (a.at(ci) != Cell::Unknown || b.at(ci) != Cell::Unknown) CHECK(ab.at(ci) != Cell::Unknown);
    }
    CHECK(ab.count(Cell::Free) + ab.count(Cell::Obstacle) + ab.count(Cell::Unknown) == ab.size());
  }
}

TEST_CASE("reachable_free") {
  SUBCASE("single free cell") {
    const auto g = grid_from({"###", "#.#", "###"});
    const auto r = reachable_free(g, g.index(1, 1));
    CHECK(std::count(r.begin(), r.end(), 1) == 1);
  }
  SUBCASE("open grid") {
    const auto g = grid_from({".....", ".....", ".....", ".....", "....."});
    const auto r = reachable_free(g, 0);
    CHECK(std::count(r.begin(), r.end(), 1) == 25);
  }
  SUBCASE("wall splits the grid") {
    const auto g = grid_from({"..#...", "..#...", "..#...", "..#..."});
    const auto r = reachable_free(g, g.index(0, 0));
    const auto want = mrx::test::flood_oracle(g, {0, 0});
    for (std::size_t i = 0; i < g.size(); ++i) CHECK((r[i] != 0) == want[i]);
    CHECK(std::count(r.begin(), r.end(), 1) == 8);
  }
  SUBCASE("start must be free") {
    const auto g = grid_from({"#."});
    CHECK_THROWS_AS(reachable_free(g, 0), std::invalid_argument);
  }
}
