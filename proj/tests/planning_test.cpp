#include <gtest/gtest.h>

#include <random>

#include "rhinonav/planning/astar.hpp"
#include "rhinonav/world/inflate.hpp"
#include "test_support.hpp"

namespace rhinonav {
namespace {

Point2 center(const GridMap& m, int ix, int iy) { return m.grid_to_world({ix, iy}); }

TEST(Plan, EmptyGridDiagonal) {
  const GridMap m(3, 3, 1.0, {0.0, 0.0});
  const Path p = plan(m, center(m, 0, 0), center(m, 2, 2));
  EXPECT_NEAR(p.total_cost, 2.0 * std::sqrt(2.0), 1e-12);
  ASSERT_EQ(p.waypoints.size(), 3u);
  EXPECT_EQ(p.waypoints.front(), center(m, 0, 0));
  EXPECT_EQ(p.waypoints.back(), center(m, 2, 2));
}

TEST(Plan, EmptyGridManhattan) {
  const GridMap m(3, 3, 1.0, {0.0, 0.0});
  const Path p = plan(m, center(m, 0, 0), center(m, 2, 2), PlannerConfig{false});
  EXPECT_DOUBLE_EQ(p.total_cost, 4.0);
  EXPECT_EQ(p.waypoints.size(), 5u);
}

TEST(Plan, ScalesWithResolution) {
  const GridMap m(3, 3, 0.25, {1.0, -2.0});
  EXPECT_NEAR(plan(m, center(m, 0, 0), center(m, 2, 2)).total_cost, 0.5 * std::sqrt(2.0), 1e-12);
}

TEST(Plan, Errors) {
  GridMap m(5, 1, 1.0, {0.0, 0.0});
  m.set(2, 0, CellState::occupied);
  auto code_of = [&](Point2 a, Point2 b) {
    try {
      plan(m, a, b);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_EQ(code_of({2.5, 0.5}, {4.5, 0.5}), "start blocked");
  EXPECT_EQ(code_of({0.5, 0.5}, {2.5, 0.5}), "goal blocked");
  EXPECT_EQ(code_of({0.5, 0.5}, {4.5, 0.5}), "unreachable");
  EXPECT_EQ(code_of({-3.0, 0.5}, {4.5, 0.5}), "start blocked");
}

TEST(Plan, NoCornerCutting) {
  GridMap m(2, 2, 1.0, {0.0, 0.0});
  m.set(1, 0, CellState::occupied);
  EXPECT_DOUBLE_EQ(plan(m, center(m, 0, 0), center(m, 1, 1)).total_cost, 2.0);
  m.set(0, 1, CellState::occupied);
  EXPECT_THROW(plan(m, center(m, 0, 0), center(m, 1, 1)), Error);
}

TEST(Plan, UnknownBlocks) {
  GridMap m(3, 1, 1.0, {0.0, 0.0});
  m.set(1, 0, CellState::unknown);
  EXPECT_THROW(plan(m, center(m, 0, 0), center(m, 2, 0)), Error);
}

TEST(Plan, MatchesDijkstraOnRandomMaps) {
  std::mt19937_64 rng(20);
  int solved = 0;
  for (int t = 0; t < 100; ++t) {
    const GridMap m = testing::random_map(rng, 20, 20, 0.25);
    const CellIndex s{static_cast<int>(rng() % 20), static_cast<int>(rng() % 20)};
    const CellIndex g{static_cast<int>(rng() % 20), static_cast<int>(rng() % 20)};
    const auto expected = testing::dijkstra_cost(m, s, g, true);
    if (!m.is_free(s) || !m.is_free(g)) {
      EXPECT_THROW(plan(m, center(m, s.ix, s.iy), center(m, g.ix, g.iy)), Error);
      continue;
    }
    if (!expected) {
      try {
        plan(m, center(m, s.ix, s.iy), center(m, g.ix, g.iy));
        ADD_FAILURE() << "expected unreachable on map " << t;
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::unreachable);
      }
      continue;
    }
    const Path p = plan(m, center(m, s.ix, s.iy), center(m, g.ix, g.iy));
    EXPECT_NEAR(p.total_cost, *expected, 1e-9) << "map " << t;
    EXPECT_NEAR(polyline_length(p.waypoints), p.total_cost, 1e-9);
    for (const Point2& w : p.waypoints) EXPECT_TRUE(m.is_free(*m.world_to_grid(w)));
    ++solved;
  }
  EXPECT_GT(solved, 20);
}

TEST(Plan, HeuristicAdmissible) {
  const GridMap open(15, 11, 0.3, {0.0, 0.0});
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const CellIndex a{static_cast<int>(rng() % 15), static_cast<int>(rng() % 11)};
    const CellIndex b{static_cast<int>(rng() % 15), static_cast<int>(rng() % 11)};
    for (bool diag : {true, false}) {
      const double truth = *testing::dijkstra_cost(open, a, b, diag);
      EXPECT_NEAR(grid_heuristic(a, b, 0.3, diag), truth, 1e-9);
    }
  }
  const GridMap m = testing::random_map(rng, 15, 15, 0.2);
  for (int i = 0; i < 200; ++i) {
    const CellIndex a{static_cast<int>(rng() % 15), static_cast<int>(rng() % 15)};
    const CellIndex b{static_cast<int>(rng() % 15), static_cast<int>(rng() % 15)};
    const auto truth = testing::dijkstra_cost(m, a, b, true);
    if (truth) {
      EXPECT_LE(grid_heuristic(a, b, 1.0, true), *truth + 1e-12);
    }
  }
}

TEST(Plan, Deterministic) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const GridMap m = testing::random_map(rng, 20, 20, 0.15);
    const Point2 a = center(m, 0, 0);
    const Point2 b = center(m, 19, 19);
    if (!m.is_free(0, 0) || !m.is_free(19, 19) || !testing::dijkstra_cost(m, {0, 0}, {19, 19}, true)) {
      continue;
    }
    EXPECT_EQ(plan(m, a, b).waypoints, plan(m, a, b).waypoints);
  }
}

TEST(Plan, EqualCostTieBreakIsStable) {
  // On an open grid many optimal paths exist; the chosen one is fixed.
  const GridMap m(4, 4, 1.0, {0.0, 0.0});
  const Path p = plan(m, center(m, 0, 0), center(m, 3, 1));
  EXPECT_NEAR(p.total_cost, 2.0 + std::sqrt(2.0), 1e-12);
  const Path q = plan(m, center(m, 0, 0), center(m, 3, 1));
  EXPECT_EQ(p.waypoints, q.waypoints);
}

TEST(PrunePath, CollinearCollapsesToEndpoints) {
  const GridMap m(7, 3, 1.0, {0.0, 0.0});
  Path p;
  for (int i = 1; i <= 5; ++i) p.waypoints.push_back(center(m, i, 1));
  p.total_cost = 4.0;
  const Path out = prune_path(p, m);
  ASSERT_EQ(out.waypoints.size(), 2u);
  EXPECT_EQ(out.waypoints.front(), p.waypoints.front());
  EXPECT_EQ(out.waypoints.back(), p.waypoints.back());
  EXPECT_DOUBLE_EQ(out.total_cost, 4.0);
}

TEST(PrunePath, SingleSegmentUnchanged) {
  const GridMap m(3, 3, 1.0, {0.0, 0.0});
  Path p{{center(m, 0, 0), center(m, 2, 2)}, 2.0 * std::sqrt(2.0)};
  const Path out = prune_path(p, m);
  EXPECT_EQ(out.waypoints, p.waypoints);
  EXPECT_EQ(out.total_cost, p.total_cost);
}

TEST(PrunePath, LShapeAroundObstacle) {
  // The corner of an L keeps one intermediate waypoint.
  GridMap m(5, 5, 1.0, {0.0, 0.0});
  for (int y = 1; y < 5; ++y) {
    for (int x = 1; x < 5; ++x) m.set(x, y, CellState::occupied);
  }
  const Path p = plan(m, center(m, 0, 4), center(m, 4, 0));
  const Path out = prune_path(p, m);
  ASSERT_EQ(out.waypoints.size(), 3u);
  EXPECT_EQ(out.waypoints[1], center(m, 0, 0));
  // Ray-cast oracle: each kept segment is clear, and skipping the corner is not.
  for (std::size_t i = 0; i + 1 < out.waypoints.size(); ++i) {
    EXPECT_TRUE(line_of_sight(m, out.waypoints[i], out.waypoints[i + 1]));
  }
  const Point2 a = out.waypoints[0];
  const Point2 b = out.waypoints[2];
  EXPECT_LT(ray_cast(m, a, std::atan2(b.y - a.y, b.x - a.x), distance(a, b)), distance(a, b));
  EXPECT_DOUBLE_EQ(out.total_cost, 8.0);
}

TEST(PrunePath, PreservesEndpointsAndNeverLonger) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 60; ++t) {
    const GridMap m = inflate_obstacles(testing::random_map(rng, 30, 30, 0.08, 0.1), 0.1);
    const CellIndex s{static_cast<int>(rng() % 30), static_cast<int>(rng() % 30)};
    const CellIndex g{static_cast<int>(rng() % 30), static_cast<int>(rng() % 30)};
    if (!testing::dijkstra_cost(m, s, g, true)) continue;
    const Path p = plan(m, center(m, s.ix, s.iy), center(m, g.ix, g.iy));
    const Path out = prune_path(p, m);
    EXPECT_EQ(out.waypoints.front(), p.waypoints.front());
    EXPECT_EQ(out.waypoints.back(), p.waypoints.back());
    EXPECT_LE(out.total_cost, p.total_cost + 1e-12);
    for (std::size_t i = 0; i + 1 < out.waypoints.size(); ++i) {
      EXPECT_TRUE(line_of_sight(m, out.waypoints[i], out.waypoints[i + 1]));
    }
  }
}

TEST(NextWaypoint, Examples) {
  const Path p{{{0.5, 0.5}, {1.5, 0.5}, {2.5, 1.5}, {4.5, 1.5}}, 0.0};
  EXPECT_EQ(next_waypoint(p, Pose(0.5, 0.5, 0.0), 0.0), (Point2{1.5, 0.5}));
  EXPECT_EQ(next_waypoint(p, Pose(4.5, 1.5, 0.0), 0.3), (Point2{4.5, 1.5}));
  EXPECT_EQ(next_waypoint(p, Pose(0.5, 0.5, 0.0), 100.0), (Point2{4.5, 1.5}));
  EXPECT_EQ(next_waypoint(p, Pose(2.0, 1.0, 0.0), 1.0), (Point2{4.5, 1.5}));
  EXPECT_EQ(next_waypoint(p, Pose(2.0, 1.0, 0.0), 0.5), (Point2{2.5, 1.5}));
}

TEST(NextWaypoint, IgnoresWaypointsBehindTheRobot) {
  // Out-and-back path: the start point is near the robot's position on the way
  // back but already passed.
  const Path p{{{0.0, 0.0}, {3.0, 0.0}, {3.0, 0.5}, {0.2, 0.5}}, 0.0};
  EXPECT_EQ(next_waypoint(p, Pose(0.6, 0.5, kPi), 0.1), (Point2{0.2, 0.5}));
}

TEST(Densify, SpacingAndEndpoints) {
  const Path p{{{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.25}}, 1.25};
  const Path d = densify(p, 0.3);
  ASSERT_EQ(d.waypoints.size(), 6u);
  EXPECT_EQ(d.waypoints.front(), p.waypoints.front());
  EXPECT_EQ(d.waypoints[4], p.waypoints[1]);
  EXPECT_EQ(d.waypoints.back(), p.waypoints.back());
  for (std::size_t i = 1; i < d.waypoints.size(); ++i) {
    EXPECT_LE(distance(d.waypoints[i - 1], d.waypoints[i]), 0.3 + 1e-12);
  }
  EXPECT_DOUBLE_EQ(polyline_length(d.waypoints), 1.25);
}

}  // namespace
}  // namespace rhinonav
