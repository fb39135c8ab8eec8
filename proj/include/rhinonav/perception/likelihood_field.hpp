#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rhinonav/util/error.hpp"
#include "rhinonav/world/distance_transform.hpp"
#include "rhinonav/world/grid_map.hpp"
#include "rhinonav/world/scan.hpp"

namespace rhinonav {

// Floor added to the max-range weight so a zero weight still has a finite log.
inline constexpr double kMaxRangeEpsilon = 1e-9;

struct SensorModelConfig {
  double sigma_hit = 0.2;
  double z_hit = 0.9;
  double z_rand = 0.09;
  double z_max_weight = 0.01;
  int beam_stride = 6;

  void validate() const {
    if (!(sigma_hit > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "sigma_hit must be positive");
    }
    for (double w : {z_hit, z_rand, z_max_weight}) {
      if (!(w >= 0.0 && w <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "mixture weights must lie in [0, 1]");
      }
    }
    if (std::abs(z_hit + z_rand + z_max_weight - 1.0) > 1e-9) {
      throw Error(ErrorCode::invalid_argument, "mixture weights must sum to 1");
    }
    if (beam_stride < 1) {
      throw Error(ErrorCode::invalid_argument, "beam_stride must be at least 1");
    }
  }

  friend bool operator==(const SensorModelConfig&, const SensorModelConfig&) = default;
};

inline double gaussian_density(double d, double sigma) {
  const double u = d / sigma;
  return std::exp(-0.5 * u * u) / (std::sqrt(kTwoPi) * sigma);
}

// ln q for a beam that ended at field distance d.
inline double beam_log_weight(double d, const SensorModelConfig& cfg, double max_range) {
  return std::log(cfg.z_hit * gaussian_density(d, cfg.sigma_hit) + cfg.z_rand / max_range);
}

inline double max_range_log_weight(const SensorModelConfig& cfg) {
  return std::log(cfg.z_max_weight + kMaxRangeEpsilon);
}

// Distance from every cell center to the nearest occupied cell center, in meters.
class LikelihoodField {
 public:
  LikelihoodField(const GridMap& map, std::vector<double> distances, SensorModelConfig cfg)
      : width_(map.width()), height_(map.height()), resolution_(map.resolution()),
        origin_(map.origin()), distances_(std::move(distances)), config_(cfg) {
    max_distance_ = distances_.empty() ? 0.0 : *std::max_element(distances_.begin(), distances_.end());
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  Point2 origin() const { return origin_; }
  double max_distance() const { return max_distance_; }
  const SensorModelConfig& config() const { return config_; }
  std::span<const double> distances() const { return distances_; }

  double at(int ix, int iy) const {
    return distances_[static_cast<std::size_t>(iy) * static_cast<std::size_t>(width_) +
                      static_cast<std::size_t>(ix)];
  }

  // Linear cell index of p, or -1 outside the grid.
  long cell_index(Point2 p) const {
    const double fx = std::floor((p.x - origin_.x) / resolution_);
    const double fy = std::floor((p.y - origin_.y) / resolution_);
    if (!(fx >= 0.0 && fy >= 0.0 && fx < width_ && fy < height_)) {
      return -1;
    }
    return static_cast<long>(fy) * width_ + static_cast<long>(fx);
  }

  // Points outside the grid read as the field maximum.
  double distance_at(Point2 p) const {
    const long i = cell_index(p);
    return i < 0 ? max_distance_ : distances_[static_cast<std::size_t>(i)];
  }

 private:
  int width_;
  int height_;
  double resolution_;
  Point2 origin_;
  std::vector<double> distances_;
  double max_distance_ = 0.0;
  SensorModelConfig config_;
};

inline LikelihoodField build_likelihood_field(const GridMap& map, const SensorModelConfig& cfg) {
  cfg.validate();
  if (map.count(CellState::occupied) == 0) {
    throw Error(ErrorCode::no_obstacles, "field undefined: no obstacles");
  }
  std::vector<double> d = squared_distance_transform(
      map, [](CellState s) { return s == CellState::occupied; });
  for (double& v : d) {
    v = std::sqrt(v) * map.resolution();
  }
  return LikelihoodField(map, std::move(d), cfg);
}

inline Point2 beam_endpoint(const Pose& pose, double beam_angle_offset, double range) {
  const double a = pose.theta + beam_angle_offset;
  return {pose.x + range * std::cos(a), pose.y + range * std::sin(a)};
}

// Sum of per-beam log mixture weights, visiting beams 0, stride, 2*stride, ...
inline double scan_log_likelihood(const LikelihoodField& field, const GridMap& map,
                                  const Pose& hypothesis, const LaserScan& scan) {
  if (map.width() != field.width() || map.height() != field.height()) {
    throw Error(ErrorCode::invalid_argument, "field and map dimensions differ");
  }
  const SensorModelConfig& cfg = field.config();
  const ScanConfig& sc = scan.config;
  const double max_log = max_range_log_weight(cfg);
  double ll = 0.0;
  for (std::size_t i = 0; i < scan.ranges.size(); i += static_cast<std::size_t>(cfg.beam_stride)) {
    const double r = scan.ranges[i];
    if (r >= sc.max_range) {
      ll += max_log;
      continue;
    }
    const Point2 end = beam_endpoint(hypothesis, sc.beam_offset(static_cast<int>(i)), r);
    ll += beam_log_weight(field.distance_at(end), cfg, sc.max_range);
  }
  return ll;
}

}  // namespace rhinonav
