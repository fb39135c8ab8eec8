#pragma once

#include <cmath>
#include <limits>

#include "rhinonav/util/error.hpp"
#include "rhinonav/world/grid_map.hpp"

namespace rhinonav {

// Exact grid traversal from `from` along `angle`. Returns the distance at
// which the ray first crosses into an occupied or unknown cell (leaving the map
// counts as such a crossing), or max_range if nothing is hit before it.
inline double ray_cast(const GridMap& map, Point2 from, double angle, double max_range) {
  const auto start = map.world_to_grid(from);
  if (!start) {
    throw Error(ErrorCode::ray_origin_blocked, "ray origin outside map");
  }
  if (map.at(*start) != CellState::free) {
    throw Error(ErrorCode::ray_origin_blocked, "ray origin inside obstacle");
  }

  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  const double res = map.resolution();
  const Point2 o = map.origin();
  const int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
  constexpr double inf = std::numeric_limits<double>::infinity();

  int ix = start->ix;
  int iy = start->iy;
  // Distances to the next vertical / horizontal cell boundary, recomputed from
  // the boundary coordinate each step so axis-aligned rays stay exact.
  auto next_x = [&] {
    if (step_x == 0) return inf;
    const double boundary = o.x + (ix + (step_x > 0 ? 1 : 0)) * res;
    return (boundary - from.x) / dx;
  };
  auto next_y = [&] {
    if (step_y == 0) return inf;
    const double boundary = o.y + (iy + (step_y > 0 ? 1 : 0)) * res;
    return (boundary - from.y) / dy;
  };

  double t_x = next_x();
  double t_y = next_y();
  while (true) {
    const bool along_x = t_x <= t_y;
    const double t = along_x ? t_x : t_y;
    if (along_x) {
      ix += step_x;
    } else {
      iy += step_y;
    }
    if (!(t < max_range)) {
      return max_range;
    }
    if (!map.is_free(ix, iy)) {
      return std::max(t, 0.0);
    }
    if (along_x) {
      t_x = next_x();
    } else {
      t_y = next_y();
    }
  }
}

// True when the straight segment a->b crosses only free cells.
inline bool line_of_sight(const GridMap& map, Point2 a, Point2 b) {
  const double d = distance(a, b);
  if (!map.world_to_grid(a) || !map.is_free(*map.world_to_grid(a))) {
    return false;
  }
  if (d == 0.0) {
    return true;
  }
  const double angle = std::atan2(b.y - a.y, b.x - a.x);
  return ray_cast(map, a, angle, d) >= d;
}

}  // namespace rhinonav
