#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "mrx/perception.hpp"

using namespace mrx;
using mrx::test::grid_from;

namespace {

std::vector<CellIndex> frontier_cells_oracle(const OccupancyGrid& g, const RoiMask& roi) {
  std::vector<CellIndex> out;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (g.at(x, y) != Cell::Free) continue;
      bool hit = false;
      for (int dy = -1; dy <= 1 && !hit; ++dy) {
        for (int dx = -1; dx <= 1 && !hit; ++dx) {
          if ((dx || dy) && g.in_bounds(x + dx, y + dy) && g.at(x + dx, y + dy) == Cell::Unknown &&
              roi.contains(g.index(x + dx, y + dy))) {
            hit = true;
          }
        }
      }
      if (hit) out.push_back(g.index(x, y));
    }
  }
  return out;
}

double diameter(const OccupancyGrid& g, const std::vector<CellIndex>& cells) {
  double best = 0;
  for (CellIndex a : cells) {
    for (CellIndex b : cells) best = std::max(best, distance(g.center(a), g.center(b)));
  }
  return best;
}

// Floyd-Warshall over a dense matrix.
std::vector<double> floyd(std::size_t n, const std::vector<std::tuple<int, int, double>>& arcs) {
  std::vector<double> d(n * n, kInfinity);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0;
  for (const auto& [a, b, w] : arcs) {
    auto& slot = d[static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)];
    slot = std::min(slot, w);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i * n + k] + d[k * n + j] < d[i * n + j]) d[i * n + j] = d[i * n + k] + d[k * n + j];
      }
    }
  }
  return d;
}

}  // namespace

TEST_CASE("frontiers on a half-known room") {
  const auto g = grid_from({
      "...???",
      "...???",
      "...???",
  });
  const auto fs = detect_frontiers(g, RoiMask::full(g), 6.0);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].cells == std::vector<CellIndex>{2, 8, 14});
  CHECK(fs[0].centroid.x == doctest::Approx(2.5));
  CHECK(fs[0].centroid.y == doctest::Approx(1.5));
}

TEST_CASE("no frontiers without unknown cells or outside roi") {
  const auto known = grid_from({"...", "..."});
  CHECK(detect_frontiers(known, RoiMask::full(known), 6.0).empty());
  const auto g = grid_from({"..?", "..?"});
  CHECK(detect_frontiers(g, RoiMask(3, 2, false), 6.0).empty());
  CHECK_THROWS_AS(detect_frontiers(g, RoiMask(2, 2, true), 6.0), std::invalid_argument);
}

TEST_CASE("frontier clusters cover the frontier cells and respect the diameter bound") {
  std::mt19937 gen(11);
  std::uniform_int_distribution<int> pick(0, 9);
  for (int trial = 0; trial < 40; ++trial) {
    OccupancyGrid g(40, 30, 0.5);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const int r = pick(gen);
      g.set(static_cast<CellIndex>(i), r < 5 ? Cell::Free : (r < 7 ? Cell::Obstacle : Cell::Unknown));
    }
    RoiMask roi(40, 30, false);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.coord(static_cast<CellIndex>(i)).x < 30) roi.insert(static_cast<CellIndex>(i));
    }
    const double radius = 3.0;
    const auto fs = detect_frontiers(g, roi, radius);
    std::vector<CellIndex> all;
    CellIndex last_first = -1;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      CHECK(fs[k].id == static_cast<int>(k));
      CHECK(std::is_sorted(fs[k].cells.begin(), fs[k].cells.end()));
      CHECK(fs[k].cells.front() > last_first);
      last_first = fs[k].cells.front();
      CHECK(diameter(g, fs[k].cells) <= radius + 1e-9);
      all.insert(all.end(), fs[k].cells.begin(), fs[k].cells.end());
    }
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    CHECK(all == frontier_cells_oracle(g, roi));
  }
}

TEST_CASE("a long frontier is split into bounded clusters") {
  std::vector<std::string> rows(3, std::string(60, '.'));
  rows.push_back(std::string(60, '?'));
  const auto g = grid_from(rows, 0.1);
  const auto fs = detect_frontiers(g, RoiMask::full(g), 1.0);
  CHECK(fs.size() >= 6);
  for (const auto& f : fs) CHECK(diameter(g, f.cells) <= 1.0 + 1e-9);
}

TEST_CASE("fov counts visible frontier cells within range") {
  const auto g = grid_from({
      ".....?",
      ".#...?",
      ".#...?",
      ".....?",
  });
  const auto fs = detect_frontiers(g, RoiMask::full(g), 10.0);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].cells.size() == 4);
  CHECK(fov({4.5, 0.5}, fs[0], g, 10.0) == doctest::Approx(1.0));
  // From the corner the obstacle column hides rows 2 and 3.
  CHECK(fov({0.5, 0.5}, fs[0], g, 10.0) == doctest::Approx(0.5));
  CHECK(fov({0.5, 1.5}, fs[0], g, 10.0) == doctest::Approx(0.0));
  CHECK(fov({4.5, 0.5}, fs[0], g, 1.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(fov({1.5, 1.5}, fs[0], g, 10.0), std::invalid_argument);
}

TEST_CASE("rrg connect, snap and spatial queries") {
  const auto g = grid_from({
      "..........",
      "..........",
      "#########.",
      "..........",
  });
  Rrg rrg;
  const auto a = rrg_connect(rrg, {0.5, 0.5}, g, 5.0);
  REQUIRE(a);
  CHECK(*a == 0);
  const auto b = rrg_connect(rrg, {4.5, 0.5}, g, 5.0);
  REQUIRE(b);
  CHECK(rrg.has_edge(*a, *b));
  CHECK(rrg.neighbors(*a).front().length == doctest::Approx(4.0));
  // Behind the wall: no free segment, graph unchanged.
  const auto c = rrg_connect(rrg, {2.5, 3.5}, g, 5.0);
  CHECK(!c);
  CHECK(rrg.size() == 2);
  CHECK(rrg.edge_count() == 1);
  const auto snap = rrg_snap_or_connect(rrg, {1.2, 0.8}, g, 1.0, 5.0);
  REQUIRE(snap);
  CHECK(*snap == 0);
  CHECK(rrg.size() == 2);
  CHECK(rrg.within({2.5, 0.5}, 2.1) == std::vector<int>{0, 1});
  CHECK(rrg.nearest({3.9, 0.0}) == 1);
  rrg.add_edge(0, 1);
  rrg.add_edge(1, 1);
  CHECK(rrg.edge_count() == 1);
}

TEST_CASE("rrg dump and parse round trip") {
  Rrg rrg;
  rrg.add_vertex({0.25, 1.5});
  rrg.add_vertex({3.0, 1.5});
  rrg.add_vertex({3.0, 4.75});
  rrg.add_edge(0, 1);
  rrg.add_edge(2, 1);
  const auto back = Rrg::parse(rrg.dump());
  CHECK(back.dump() == rrg.dump());
  CHECK(back.has_edge(1, 2));
  CHECK_THROWS_AS(Rrg::parse("V 0 1\n"), FormatError);
}

TEST_CASE("grow_rrg keeps vertices free, spaced and connected") {
  std::vector<std::string> rows(40, std::string(60, '.'));
  for (int y = 0; y < 30; ++y) rows[static_cast<std::size_t>(y)][30] = '#';
  const auto g = grid_from(rows, 0.5);
  std::vector<std::uint8_t> acc(g.size(), 1);
  for (std::size_t i = 0; i < g.size(); ++i) acc[i] = g.at(static_cast<CellIndex>(i)) == Cell::Free;
  Rrg rrg;
  rrg_connect(rrg, {2.0, 2.0}, g, 5.0);
  Rng rng(3);
  grow_rrg(rrg, g, acc, {}, rng);
  CHECK(rrg.size() > 20);
  for (std::size_t v = 0; v < rrg.size(); ++v) {
    const Point2 p = rrg.vertex(static_cast<int>(v));
    CHECK(g.at(*g.cell_at(p)) == Cell::Free);
    for (std::size_t u = 0; u < v; ++u) CHECK(distance(p, rrg.vertex(static_cast<int>(u))) >= 1.5 - 1e-9);
  }
  const auto tree = dijkstra(rrg, 0);
  for (double d : tree.dist) CHECK(d < kInfinity);
}

TEST_CASE("viewpoint sampling is deterministic and meets the fov threshold") {
  std::vector<std::string> rows(30, std::string(40, '.'));
  for (int y = 0; y < 30; ++y) {
    for (int x = 25; x < 40; ++x) rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = '?';
  }
  for (int y = 10; y < 20; ++y) rows[static_cast<std::size_t>(y)][10] = '#';
  const auto g = grid_from(rows, 0.5);
  const auto fs = detect_frontiers(g, RoiMask::full(g), 6.0);
  REQUIRE(!fs.empty());
  auto run = [&](std::uint64_t seed) {
    Rrg rrg;
    rrg_connect(rrg, {1.0, 1.0}, g, 5.0);
    std::vector<std::uint8_t> acc(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] = g.at(static_cast<CellIndex>(i)) == Cell::Free;
    Rng rng(seed);
    grow_rrg(rrg, g, acc, {}, rng);
    auto s = sample_viewpoints(fs, g, rrg, {}, seed);
    return std::make_pair(std::move(s), std::move(rrg));
  };
  const auto [s1, r1] = run(5);
  const auto [s2, r2] = run(5);
  REQUIRE(s1.viewpoints.size() == s2.viewpoints.size());
  CHECK(r1.dump() == r2.dump());
  CHECK(s1.viewpoints.size() == s1.surviving.size());
  CHECK(!s1.viewpoints.empty());
  for (std::size_t k = 0; k < s1.viewpoints.size(); ++k) {
    const auto& vp = s1.viewpoints[k];
    CHECK(vp.position == s2.viewpoints[k].position);
    CHECK(vp.frontier_id == s1.surviving[k].id);
    CHECK(vp.fov_score > 0.3);
    CHECK(vp.fov_score == doctest::Approx(fov(vp.position, s1.surviving[k], g, 6.0)));
    CHECK(distance(vp.position, s1.surviving[k].centroid) <= 6.0 + 1e-9);
    CHECK(r1.vertex(vp.rrg_vertex) == vp.position);
  }
}

TEST_CASE("sampling config validation") {
  SamplingConfig bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.fov_threshold = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_NOTHROW(SamplingConfig{}.validate());
}

TEST_CASE("johnson agrees with floyd-warshall on random graphs with negative arcs") {
  std::mt19937 gen(23);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 12;
    // Potentials keep reduced costs nonnegative so no negative cycle exists.
    std::vector<double> pot(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (auto& p : pot) p = u(gen);
    WeightedDigraph g;
    g.arcs.resize(static_cast<std::size_t>(n));
    std::vector<std::tuple<int, int, double>> list;
    std::bernoulli_distribution keep(0.35);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a == b || !keep(gen)) continue;
        const double w = u(gen) + pot[static_cast<std::size_t>(b)] - pot[static_cast<std::size_t>(a)];
        g.arcs[static_cast<std::size_t>(a)].push_back({b, w});
        list.emplace_back(a, b, w);
      }
    }
    const auto got = johnson(g);
    REQUIRE(got);
    const auto want = floyd(static_cast<std::size_t>(n), list);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double w = want[static_cast<std::size_t>(i * n + j)];
        if (w == kInfinity) {
          CHECK(got->at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) == kInfinity);
        } else {
          CHECK(got->at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) == doctest::Approx(w));
        }
      }
    }
  }
}

TEST_CASE("johnson reports negative cycles") {
  WeightedDigraph g;
  g.arcs = {{{1, 1.0}}, {{2, -3.0}}, {{0, 1.0}}};
  CHECK(!johnson(g));
}

TEST_CASE("rrg shortest paths") {
  Rrg rrg;
  for (Point2 p : {Point2{0, 0}, Point2{3, 0}, Point2{3, 4}, Point2{0, 4}, Point2{10, 10}}) rrg.add_vertex(p);
  rrg.add_edge(0, 1);
  rrg.add_edge(1, 2);
  rrg.add_edge(2, 3);
  rrg.add_edge(0, 2);
  const auto all = johnson_all_pairs(rrg);
  std::vector<std::tuple<int, int, double>> list;
  for (int v = 0; v < 5; ++v) {
    for (const auto& e : rrg.neighbors(v)) list.emplace_back(v, e.to, e.length);
  }
  const auto want = floyd(5, list);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (want[i * 5 + j] == kInfinity) {
        CHECK(all.at(i, j) == kInfinity);
      } else {
        CHECK(all.at(i, j) == doctest::Approx(want[i * 5 + j]));
      }
    }
  }
  CHECK(all.at(0, 3) == doctest::Approx(8.0));
  const auto path = shortest_path(rrg, 0, 3);
  REQUIRE(path.size() == 3);
  CHECK(path[1] == Point2{3, 4});
  CHECK(shortest_path(rrg, 0, 4).empty());
  CHECK_THROWS_AS(shortest_path(rrg, 0, 9), std::out_of_range);
  const int sources[] = {3, 0};
  const auto trees = dijkstra_many(rrg, sources);
  REQUIRE(trees.size() == 2);
  CHECK(trees[0].dist[1] == doctest::Approx(7.0));
  CHECK(trees[1].vertex_path(3) == std::vector<int>{0, 2, 3});
  CHECK(trees[1].vertex_path(4).empty());
}
