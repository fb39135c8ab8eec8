#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

#include "rhinonav/util/error.hpp"
#include "rhinonav/world/grid_map.hpp"
#include "rhinonav/world/ray_cast.hpp"

namespace rhinonav {

struct Path {
  std::vector<Point2> waypoints;
  double total_cost = 0.0;

  bool empty() const { return waypoints.empty(); }
};

struct PlannerConfig {
  bool allow_diagonal = true;
};

inline double polyline_length(const std::vector<Point2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    len += distance(pts[i - 1], pts[i]);
  }
  return len;
}

// Octile distance between cells (Manhattan when diagonals are disabled), in meters.
inline double grid_heuristic(CellIndex a, CellIndex b, double resolution, bool allow_diagonal) {
  const int dx = std::abs(a.ix - b.ix);
  const int dy = std::abs(a.iy - b.iy);
  if (!allow_diagonal) {
    return (dx + dy) * resolution;
  }
  const int lo = std::min(dx, dy);
  const int hi = std::max(dx, dy);
  return ((hi - lo) + std::numbers::sqrt2 * lo) * resolution;
}

// A* over free cells of `inflated`, 8-connected without corner cutting.
// Among equal f the node with the larger g pops first, then the lower index.
inline Path plan(const GridMap& inflated, Point2 start, Point2 goal, const PlannerConfig& cfg = {}) {
  const auto s = inflated.world_to_grid(start);
  if (!s || !inflated.is_free(*s)) {
    throw Error(ErrorCode::start_blocked, "start blocked");
  }
  const auto g = inflated.world_to_grid(goal);
  if (!g || !inflated.is_free(*g)) {
    throw Error(ErrorCode::goal_blocked, "goal blocked");
  }

  const double res = inflated.resolution();
  const double diag = std::numbers::sqrt2 * res;
  const std::size_t n = inflated.size();
  const std::size_t start_i = inflated.index(*s);
  const std::size_t goal_i = inflated.index(*g);

  struct Entry {
    double f;
    double g;
    std::size_t index;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.index > b.index;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);

  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<double> cost(n, inf);
  std::vector<std::size_t> parent(n, none);
  std::vector<std::uint8_t> closed(n, 0);

  cost[start_i] = 0.0;
  open.push({grid_heuristic(*s, *g, res, cfg.allow_diagonal), 0.0, start_i});

  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int neighbours = cfg.allow_diagonal ? 8 : 4;

  bool found = false;
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (closed[e.index] || e.g > cost[e.index]) {
      continue;
    }
    closed[e.index] = 1;
    if (e.index == goal_i) {
      found = true;
      break;
    }
    const CellIndex c = inflated.cell_of(e.index);
    for (int d = 0; d < neighbours; ++d) {
      const int nx = c.ix + kDx[d];
      const int ny = c.iy + kDy[d];
      if (!inflated.is_free(nx, ny)) {
        continue;
      }
      const bool diagonal = d >= 4;
      if (diagonal && (!inflated.is_free(c.ix + kDx[d], c.iy) || !inflated.is_free(c.ix, c.iy + kDy[d]))) {
        continue;
      }
      const std::size_t ni = inflated.index(nx, ny);
      if (closed[ni]) {
        continue;
      }
      const double ng = e.g + (diagonal ? diag : res);
      if (ng < cost[ni]) {
        cost[ni] = ng;
        parent[ni] = e.index;
        open.push({ng + grid_heuristic({nx, ny}, *g, res, cfg.allow_diagonal), ng, ni});
      }
    }
  }
  if (!found) {
    throw Error(ErrorCode::unreachable, "unreachable");
  }

  Path path;
  for (std::size_t i = goal_i; i != none; i = parent[i]) {
    path.waypoints.push_back(inflated.grid_to_world(inflated.cell_of(i)));
  }
  std::reverse(path.waypoints.begin(), path.waypoints.end());
  path.total_cost = cost[goal_i];
  return path;
}

// Greedy shortcutting: from each kept waypoint jump to the farthest later
// waypoint that is in line of sight.
inline Path prune_path(const Path& path, const GridMap& inflated) {
  if (path.waypoints.size() <= 2) {
    return path;
  }
  const auto& w = path.waypoints;
  Path out;
  std::size_t i = 0;
  out.waypoints.push_back(w[0]);
  while (i + 1 < w.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = w.size() - 1; j > i + 1; --j) {
      if (line_of_sight(inflated, w[i], w[j])) {
        next = j;
        break;
      }
    }
    out.waypoints.push_back(w[next]);
    i = next;
  }
  out.total_cost = polyline_length(out.waypoints);
  return out;
}

// Inserts evenly spaced points so no two consecutive waypoints are more than
// `spacing` apart. With next_waypoint this turns a pruned path into a
// carrot that stays `lookahead` ahead along the path.
inline Path densify(const Path& path, double spacing) {
  if (!(spacing > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "spacing must be positive");
  }
  Path out;
  out.total_cost = path.total_cost;
  const auto& w = path.waypoints;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i > 0) {
      const int n = static_cast<int>(std::ceil(distance(w[i - 1], w[i]) / spacing));
      for (int k = 1; k < n; ++k) {
        const double t = static_cast<double>(k) / n;
        out.waypoints.push_back({w[i - 1].x + t * (w[i].x - w[i - 1].x),
                                 w[i - 1].y + t * (w[i].y - w[i - 1].y)});
      }
    }
    out.waypoints.push_back(w[i]);
  }
  return out;
}

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

// First waypoint beyond `lookahead` from the pose, scanning forward from the
// end of the path segment nearest to the pose; the final waypoint otherwise.
inline Point2 next_waypoint(const Path& path, const Pose& pose, double lookahead) {
  const auto& w = path.waypoints;
  if (w.empty()) {
    throw Error(ErrorCode::invalid_argument, "empty path");
  }
  if (w.size() == 1) {
    return w[0];
  }
  const Point2 p = pose.position();
  std::size_t seg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const double d = point_segment_distance(p, w[i], w[i + 1]);
    if (d < best) {
      best = d;
      seg = i;
    }
  }
  for (std::size_t i = seg + 1; i < w.size(); ++i) {
    if (distance(p, w[i]) > lookahead) {
      return w[i];
    }
  }
  return w.back();
}

}  // namespace rhinonav
