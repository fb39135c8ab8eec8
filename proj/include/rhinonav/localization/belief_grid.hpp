#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "rhinonav/util/error.hpp"
#include "rhinonav/world/grid_map.hpp"

namespace rhinonav {

// Layout of the pose grid: nx * ny spatial cells, each `coarsen` map cells on a
// side, times ntheta heading bins.
struct BeliefShape {
  int nx = 0;
  int ny = 0;
  int ntheta = 36;
  int coarsen = 1;

  friend bool operator==(const BeliefShape&, const BeliefShape&) = default;
};

// Chooses the integer coarsening factor closest to the requested spatial
// resolution; partial cells at the high-x / high-y edges are dropped.
inline BeliefShape make_belief_shape(const GridMap& map, double xy_resolution, int ntheta) {
  if (!(xy_resolution > 0.0) || ntheta < 1) {
    throw Error(ErrorCode::invalid_argument, "belief resolution must be positive");
  }
  const int f = std::max(1, static_cast<int>(std::lround(xy_resolution / map.resolution())));
  BeliefShape s{map.width() / f, map.height() / f, ntheta, f};
  if (s.nx < 1 || s.ny < 1) {
    throw Error(ErrorCode::invalid_argument, "belief resolution coarser than the map");
  }
  return s;
}

// Discrete distribution over (x, y, theta). Heading bin k is centered on
// k * theta_resolution (wrapped into [-pi, pi)); weights are stored with the
// heading index fastest: ((by * nx) + bx) * ntheta + k.
class BeliefGrid {
 public:
  BeliefGrid() = default;

  BeliefGrid(const GridMap& map, BeliefShape shape)
      : shape_(shape), xy_resolution_(map.resolution() * shape.coarsen),
        theta_resolution_(kTwoPi / shape.ntheta), origin_(map.origin()) {
    if (shape.nx < 1 || shape.ny < 1 || shape.ntheta < 1 || shape.coarsen < 1 ||
        static_cast<long>(shape.nx) * shape.coarsen > map.width() ||
        static_cast<long>(shape.ny) * shape.coarsen > map.height()) {
      throw Error(ErrorCode::invalid_argument, "belief shape does not fit the map");
    }
    live_.assign(spatial_size(), 0);
    for (int by = 0; by < shape.ny; ++by) {
      for (int bx = 0; bx < shape.nx; ++bx) {
        const auto c = map.world_to_grid(cell_center(bx, by));
        live_[spatial_index(bx, by)] = (c && map.at(*c) == CellState::free) ? 1 : 0;
      }
    }
    weights_.assign(size(), 0.0);
  }

  const BeliefShape& shape() const { return shape_; }
  int nx() const { return shape_.nx; }
  int ny() const { return shape_.ny; }
  int ntheta() const { return shape_.ntheta; }
  double xy_resolution() const { return xy_resolution_; }
  double theta_resolution() const { return theta_resolution_; }
  Point2 origin() const { return origin_; }

  std::size_t spatial_size() const {
    return static_cast<std::size_t>(shape_.nx) * static_cast<std::size_t>(shape_.ny);
  }
  std::size_t size() const { return spatial_size() * static_cast<std::size_t>(shape_.ntheta); }

  std::size_t spatial_index(int bx, int by) const {
    return static_cast<std::size_t>(by) * static_cast<std::size_t>(shape_.nx) +
           static_cast<std::size_t>(bx);
  }
  std::size_t index(int bx, int by, int k) const {
    return spatial_index(bx, by) * static_cast<std::size_t>(shape_.ntheta) +
           static_cast<std::size_t>(k);
  }

  struct Cell {
    int bx;
    int by;
    int k;
  };
  Cell cell_of(std::size_t index) const {
    const auto nth = static_cast<std::size_t>(shape_.ntheta);
    const std::size_t s = index / nth;
    return {static_cast<int>(s % static_cast<std::size_t>(shape_.nx)),
            static_cast<int>(s / static_cast<std::size_t>(shape_.nx)),
            static_cast<int>(index % nth)};
  }

  Point2 cell_center(int bx, int by) const {
    return {origin_.x + (bx + 0.5) * xy_resolution_, origin_.y + (by + 0.5) * xy_resolution_};
  }
  double bin_heading(int k) const { return normalize_angle(k * theta_resolution_); }
  Pose cell_pose(std::size_t index) const {
    const Cell c = cell_of(index);
    const Point2 p = cell_center(c.bx, c.by);
    return Pose(p.x, p.y, bin_heading(c.k));
  }

  std::optional<std::pair<int, int>> spatial_cell(Point2 p) const {
    const double fx = std::floor((p.x - origin_.x) / xy_resolution_);
    const double fy = std::floor((p.y - origin_.y) / xy_resolution_);
    if (!(fx >= 0.0 && fy >= 0.0 && fx < shape_.nx && fy < shape_.ny)) {
      return std::nullopt;
    }
    return std::pair{static_cast<int>(fx), static_cast<int>(fy)};
  }
  int heading_bin(double theta) const {
    const long k = std::lround(normalize_angle(theta) / theta_resolution_);
    const long n = shape_.ntheta;
    return static_cast<int>(((k % n) + n) % n);
  }

  bool is_live(int bx, int by) const { return live_[spatial_index(bx, by)] != 0; }
  bool is_live_index(std::size_t index) const {
    return live_[index / static_cast<std::size_t>(shape_.ntheta)] != 0;
  }
  std::size_t live_spatial_count() const {
    return static_cast<std::size_t>(std::count(live_.begin(), live_.end(), std::uint8_t{1}));
  }

  std::span<const double> weights() const { return weights_; }
  std::span<double> mutable_weights() { return weights_; }
  double weight(int bx, int by, int k) const { return weights_[index(bx, by, k)]; }

  double total() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

  // Sum over heading bins, nx * ny values with bx fastest.
  std::vector<double> marginal_xy() const {
    std::vector<double> m(spatial_size(), 0.0);
    const auto nth = static_cast<std::size_t>(shape_.ntheta);
    for (std::size_t s = 0; s < m.size(); ++s) {
      double acc = 0.0;
      for (std::size_t k = 0; k < nth; ++k) {
        acc += weights_[s * nth + k];
      }
      m[s] = acc;
    }
    return m;
  }

  friend bool operator==(const BeliefGrid&, const BeliefGrid&) = default;

 private:
  BeliefShape shape_{};
  double xy_resolution_ = 1.0;
  double theta_resolution_ = kTwoPi;
  Point2 origin_{};
  std::vector<std::uint8_t> live_;
  std::vector<double> weights_;
};

}  // namespace rhinonav
