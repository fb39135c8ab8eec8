#pragma once

#include <cmath>
#include <numbers>

namespace rhinonav {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wraps an angle into [-pi, pi).
inline double normalize_angle(double a) {
  if (a >= -kPi && a < kPi) {
    return a;
  }
  a = std::fmod(a + kPi, kTwoPi);
  if (a < 0.0) {
    a += kTwoPi;
  }
  a -= kPi;
  if (a >= kPi) {
    a -= kTwoPi;
  }
  return a;
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose() = default;
  Pose(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}

  Point2 position() const { return {x, y}; }

  friend bool operator==(const Pose&, const Pose&) = default;
};

}  // namespace rhinonav
