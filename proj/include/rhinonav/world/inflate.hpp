#pragma once

#include "rhinonav/world/distance_transform.hpp"
#include "rhinonav/world/grid_map.hpp"

namespace rhinonav {

// Marks every free cell whose center lies within `radius` of an occupied or
// unknown cell center as occupied. Unknown cells keep their state.
inline GridMap inflate_obstacles(const GridMap& map, double radius) {
  if (radius < 0.0) {
    throw Error(ErrorCode::invalid_argument, "inflation radius must be non-negative");
  }
  GridMap out = map;
  if (radius == 0.0) {
    return out;
  }
  const std::vector<double> sq = squared_distance_transform(
      map, [](CellState s) { return s != CellState::free; });
  const double r_cells = radius / map.resolution();
  const double limit = r_cells * r_cells * (1.0 + 1e-12);
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map.cells()[i] == CellState::free && sq[i] <= limit) {
      out.set(map.cell_of(i), CellState::occupied);
    }
  }
  return out;
}

}  // namespace rhinonav
