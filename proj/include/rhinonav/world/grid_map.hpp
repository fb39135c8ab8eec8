#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rhinonav/util/error.hpp"
#include "rhinonav/world/pose.hpp"

namespace rhinonav {

enum class CellState : std::uint8_t { free, occupied, unknown };

struct CellIndex {
  int ix = 0;
  int iy = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

// Occupancy grid. Cell (ix, iy) covers [origin + ix*res, origin + (ix+1)*res)
// along x (same for y); storage is row-major with iy = 0 the lowest row.
class GridMap {
 public:
  GridMap() = default;

  GridMap(int width, int height, double resolution, Point2 origin,
          CellState fill = CellState::free)
      : GridMap(width, height, resolution, origin,
                std::vector<CellState>(checked_size(width, height), fill)) {}

  GridMap(int width, int height, double resolution, Point2 origin, std::vector<CellState> cells)
      : width_(width), height_(height), resolution_(resolution), origin_(origin),
        cells_(std::move(cells)) {
    if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
      throw Error(ErrorCode::invalid_argument, "resolution must be positive");
    }
    if (cells_.size() != checked_size(width_, height_)) {
      throw Error(ErrorCode::invalid_argument, "cell count does not match width x height");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  Point2 origin() const { return origin_; }
  std::size_t size() const { return cells_.size(); }
  std::span<const CellState> cells() const { return cells_; }

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < width_ && iy < height_;
  }
  bool in_bounds(CellIndex c) const { return in_bounds(c.ix, c.iy); }

  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(ix);
  }
  std::size_t index(CellIndex c) const { return index(c.ix, c.iy); }
  CellIndex cell_of(std::size_t index) const {
    return {static_cast<int>(index % static_cast<std::size_t>(width_)),
            static_cast<int>(index / static_cast<std::size_t>(width_))};
  }

  CellState at(int ix, int iy) const { return cells_[index(ix, iy)]; }
  CellState at(CellIndex c) const { return at(c.ix, c.iy); }
  void set(int ix, int iy, CellState s) { cells_[index(ix, iy)] = s; }
  void set(CellIndex c, CellState s) { set(c.ix, c.iy, s); }

  // Free and inside the map.
  bool is_free(int ix, int iy) const { return in_bounds(ix, iy) && at(ix, iy) == CellState::free; }
  bool is_free(CellIndex c) const { return is_free(c.ix, c.iy); }

  // Out-of-bounds points return nullopt instead of being clamped.
  std::optional<CellIndex> world_to_grid(Point2 p) const {
    const double fx = std::floor((p.x - origin_.x) / resolution_);
    const double fy = std::floor((p.y - origin_.y) / resolution_);
    if (!(fx >= 0.0 && fy >= 0.0 && fx < width_ && fy < height_)) {
      return std::nullopt;
    }
    return CellIndex{static_cast<int>(fx), static_cast<int>(fy)};
  }

  Point2 grid_to_world(CellIndex c) const {
    return {origin_.x + (c.ix + 0.5) * resolution_, origin_.y + (c.iy + 0.5) * resolution_};
  }

  double extent_x() const { return width_ * resolution_; }
  double extent_y() const { return height_ * resolution_; }

  std::size_t count(CellState s) const {
    std::size_t n = 0;
    for (CellState c : cells_) {
      n += (c == s) ? 1 : 0;
    }
    return n;
  }

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  static std::size_t checked_size(int width, int height) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorCode::invalid_argument, "map dimensions must be positive");
    }
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  Point2 origin_{};
  std::vector<CellState> cells_;
};

inline std::optional<CellIndex> world_to_grid(const GridMap& map, Point2 p) {
  return map.world_to_grid(p);
}

inline Point2 grid_to_world(const GridMap& map, CellIndex c) { return map.grid_to_world(c); }

}  // namespace rhinonav
