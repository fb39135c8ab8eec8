#pragma once

#include <cmath>

#include "rhinonav/util/error.hpp"
#include "rhinonav/world/pose.hpp"

namespace rhinonav {

// Below this translation the heading of travel is undefined and the whole
// rotation is attributed to delta_rot2.
inline constexpr double kPureRotationThreshold = 0.01;

struct OdometryDelta {
  double rot1 = 0.0;
  double trans = 0.0;
  double rot2 = 0.0;

  bool is_zero() const { return rot1 == 0.0 && trans == 0.0 && rot2 == 0.0; }

  friend bool operator==(const OdometryDelta&, const OdometryDelta&) = default;
};

// alpha1 rotation from rotation, alpha2 rotation from translation,
// alpha3 translation from translation, alpha4 translation from rotation.
struct MotionNoise {
  double alpha1 = 0.1;
  double alpha2 = 0.05;
  double alpha3 = 0.1;
  double alpha4 = 0.05;

  void validate() const {
    if (alpha1 < 0.0 || alpha2 < 0.0 || alpha3 < 0.0 || alpha4 < 0.0) {
      throw Error(ErrorCode::invalid_argument, "motion noise alphas must be non-negative");
    }
  }

  static MotionNoise none() { return {0.0, 0.0, 0.0, 0.0}; }

  friend bool operator==(const MotionNoise&, const MotionNoise&) = default;
};

// Standard deviations of the three motion components for a given delta.
struct MotionStd {
  double rot1 = 0.0;
  double trans = 0.0;
  double rot2 = 0.0;
};

inline MotionStd motion_std(const OdometryDelta& d, const MotionNoise& n) {
  const double r1 = std::abs(d.rot1);
  const double r2 = std::abs(d.rot2);
  const double t = std::abs(d.trans);
  return {n.alpha1 * r1 + n.alpha2 * t, n.alpha3 * t + n.alpha4 * (r1 + r2), n.alpha1 * r2 + n.alpha2 * t};
}

inline OdometryDelta decompose_odometry(const Pose& prev, const Pose& curr) {
  const double dx = curr.x - prev.x;
  const double dy = curr.y - prev.y;
  OdometryDelta d;
  d.trans = std::hypot(dx, dy);
  if (d.trans < kPureRotationThreshold) {
    d.rot1 = 0.0;
    d.rot2 = normalize_angle(curr.theta - prev.theta);
  } else {
    d.rot1 = normalize_angle(std::atan2(dy, dx) - prev.theta);
    d.rot2 = normalize_angle(curr.theta - prev.theta - d.rot1);
  }
  return d;
}

// Rotate by rot1, translate by trans, rotate by rot2.
inline Pose apply_odometry(const Pose& p, double rot1, double trans, double rot2) {
  const double heading = p.theta + rot1;
  return Pose(p.x + trans * std::cos(heading), p.y + trans * std::sin(heading),
              heading + rot2);
}

inline Pose apply_odometry(const Pose& p, const OdometryDelta& d) {
  return apply_odometry(p, d.rot1, d.trans, d.rot2);
}

}  // namespace rhinonav
