#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "rhinonav/world/ray_cast.hpp"

namespace rhinonav {

using Rng = std::mt19937_64;

struct ScanConfig {
  int beam_count = 180;
  double angle_increment = kTwoPi / 180.0;
  double max_range = 8.0;

  // Beam 0 points at -pi relative to the heading; beams sweep counterclockwise.
  double beam_offset(int i) const { return -kPi + i * angle_increment; }

  void validate() const {
    if (beam_count <= 0) {
      throw Error(ErrorCode::invalid_argument, "beam_count must be positive");
    }
    if (!(angle_increment > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "angle_increment must be positive");
    }
    if (!(max_range > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "max_range must be positive");
    }
  }

  friend bool operator==(const ScanConfig&, const ScanConfig&) = default;
};

struct LaserScan {
  std::vector<double> ranges;
  ScanConfig config;
};

// Shortest range a noisy reading is clamped to.
inline constexpr double kMinScanRange = 1e-3;

inline LaserScan simulate_scan(const GridMap& map, const Pose& true_pose, const ScanConfig& cfg,
                               double noise_sigma, Rng& rng) {
  cfg.validate();
  LaserScan scan;
  scan.config = cfg;
  scan.ranges.resize(static_cast<std::size_t>(cfg.beam_count));
  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  for (int i = 0; i < cfg.beam_count; ++i) {
    double r = ray_cast(map, true_pose.position(), true_pose.theta + cfg.beam_offset(i),
                        cfg.max_range);
    // Misses stay exact max-range readings.
    if (noise_sigma > 0.0 && r < cfg.max_range) {
      r = std::clamp(r + noise(rng), kMinScanRange, cfg.max_range);
    }
    scan.ranges[static_cast<std::size_t>(i)] = std::max(r, kMinScanRange);
  }
  return scan;
}

}  // namespace rhinonav
