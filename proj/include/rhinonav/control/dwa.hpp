#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rhinonav/perception/likelihood_field.hpp"
#include "rhinonav/util/error.hpp"
#include "rhinonav/world/grid_map.hpp"

namespace rhinonav {

struct KinematicLimits {
  double v_max = 0.5;
  double v_min = 0.0;
  double omega_max = 1.5;
  double accel_v = 0.5;
  double accel_omega = 2.0;
  double robot_radius = 0.25;

  void validate() const {
    if (!(v_max > 0.0 && omega_max > 0.0 && accel_v > 0.0 && accel_omega > 0.0 &&
          robot_radius > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "kinematic limits must be positive");
    }
    if (!(v_min >= 0.0 && v_min <= v_max)) {
      throw Error(ErrorCode::invalid_argument, "v_min must lie in [0, v_max]");
    }
  }

  friend bool operator==(const KinematicLimits&, const KinematicLimits&) = default;
};

struct VelocityCommand {
  double v = 0.0;
  double omega = 0.0;

  friend bool operator==(const VelocityCommand&, const VelocityCommand&) = default;
};

struct DwaConfig {
  double alpha = 0.8;  // heading
  double beta = 0.1;   // clearance
  double gamma = 0.1;  // velocity
  double dt = 0.1;
  double sim_horizon = 1.5;
  int v_samples = 11;
  int omega_samples = 21;
  double clearance_cap = 2.0;

  void validate() const {
    if (alpha < 0.0 || beta < 0.0 || gamma < 0.0 || alpha + beta + gamma <= 0.0) {
      throw Error(ErrorCode::invalid_argument, "DWA weights must be non-negative and not all zero");
    }
    if (!(dt > 0.0) || !(sim_horizon >= dt)) {
      throw Error(ErrorCode::invalid_argument, "DWA requires dt > 0 and sim_horizon >= dt");
    }
    if (v_samples < 2 || omega_samples < 2) {
      throw Error(ErrorCode::invalid_argument, "DWA needs at least two samples per axis");
    }
    if (!(clearance_cap > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "clearance_cap must be positive");
    }
  }

  friend bool operator==(const DwaConfig&, const DwaConfig&) = default;
};

struct VelocityWindow {
  double v_lo;
  double v_hi;
  double omega_lo;
  double omega_hi;
};

struct Trajectory {
  VelocityCommand command;
  std::vector<Pose> poses;
  double min_clearance = 0.0;
  double score = 0.0;
  bool admissible = false;
};

struct DwaResult {
  VelocityCommand command;
  std::vector<Trajectory> trajectories;
  int selected = -1;  // index into trajectories, -1 for the rotate-in-place recovery
  bool recovery() const { return selected < 0; }
};

inline VelocityWindow dynamic_window(const VelocityCommand& current, const KinematicLimits& limits,
                                     double dt) {
  return {std::max(limits.v_min, current.v - limits.accel_v * dt),
          std::min(limits.v_max, current.v + limits.accel_v * dt),
          std::max(-limits.omega_max, current.omega - limits.accel_omega * dt),
          std::min(limits.omega_max, current.omega + limits.accel_omega * dt)};
}

inline constexpr double kStraightOmega = 1e-6;

// Closed-form unicycle motion after time t at constant (v, omega).
inline Pose integrate_unicycle(const Pose& p, const VelocityCommand& cmd, double t) {
  if (std::abs(cmd.omega) > kStraightOmega) {
    const double r = cmd.v / cmd.omega;
    const double th = p.theta + cmd.omega * t;
    return Pose(p.x + r * (std::sin(th) - std::sin(p.theta)),
                p.y - r * (std::cos(th) - std::cos(p.theta)), th);
  }
  return Pose(p.x + cmd.v * t * std::cos(p.theta), p.y + cmd.v * t * std::sin(p.theta),
              p.theta + cmd.omega * t);
}

// Samples at t = 0, step, 2*step, ... with the last sample at exactly `horizon`.
inline std::vector<Pose> rollout(const Pose& pose, const VelocityCommand& cmd, double horizon,
                                 double step) {
  if (!(step > 0.0) || !(horizon >= step)) {
    throw Error(ErrorCode::invalid_argument, "rollout requires step > 0 and horizon >= step");
  }
  const auto n = static_cast<int>(std::ceil(horizon / step - 1e-9));
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(n) + 1);
  poses.push_back(pose);
  for (int i = 1; i <= n; ++i) {
    poses.push_back(integrate_unicycle(pose, cmd, std::min(i * step, horizon)));
  }
  return poses;
}

// The robot can brake to a stop within `clearance`.
inline bool admissible(const VelocityCommand& cmd, double clearance, const KinematicLimits& limits) {
  if (std::isinf(clearance)) {
    return true;
  }
  return cmd.v <= std::sqrt(2.0 * std::max(clearance, 0.0) * limits.accel_v);
}

// Distance field over every non-free cell, used for clearance lookups.
inline LikelihoodField build_clearance_field(const GridMap& map) {
  std::vector<double> d = squared_distance_transform(
      map, [](CellState s) { return s != CellState::free; });
  for (double& v : d) {
    v = std::sqrt(v) * map.resolution();
  }
  return LikelihoodField(map, std::move(d), SensorModelConfig{});
}

// Free distance around the robot disc at `p`; leaving the map counts as contact.
inline double pose_clearance(const LikelihoodField& clearance, Point2 p, double robot_radius) {
  const long c = clearance.cell_index(p);
  const double d = c < 0 ? 0.0 : clearance.distances()[static_cast<std::size_t>(c)];
  return d - robot_radius;
}

inline double bearing_error(const Pose& from, Point2 target) {
  return normalize_angle(std::atan2(target.y - from.y, target.x - from.x) - from.theta);
}

inline VelocityCommand recovery_command(const Pose& pose, Point2 target,
                                        const KinematicLimits& limits, const DwaConfig& cfg) {
  const double sign = bearing_error(pose, target) >= 0.0 ? 1.0 : -1.0;
  return {0.0, sign * std::min(limits.omega_max, limits.accel_omega * cfg.dt)};
}

inline DwaResult select_command(const Pose& pose, const VelocityCommand& current, Point2 target,
                                const LikelihoodField& clearance, const KinematicLimits& limits,
                                const DwaConfig& cfg) {
  limits.validate();
  cfg.validate();
  if (pose_clearance(clearance, pose.position(), limits.robot_radius) < 0.0) {
    throw Error(ErrorCode::robot_in_collision, "robot in collision");
  }

  const VelocityWindow win = dynamic_window(current, limits, cfg.dt);
  DwaResult result;
  result.trajectories.reserve(static_cast<std::size_t>(cfg.v_samples * cfg.omega_samples));

  struct Terms {
    double heading;
    double clearance;
    double velocity;
  };
  std::vector<Terms> terms;
  terms.reserve(result.trajectories.capacity());
  Terms sums{0.0, 0.0, 0.0};

  for (int i = 0; i < cfg.v_samples; ++i) {
    const double v = win.v_lo + (win.v_hi - win.v_lo) * i / (cfg.v_samples - 1);
    for (int j = 0; j < cfg.omega_samples; ++j) {
      const double w = win.omega_lo + (win.omega_hi - win.omega_lo) * j / (cfg.omega_samples - 1);
      Trajectory tr;
      tr.command = {v, w};
      tr.poses = rollout(pose, tr.command, cfg.sim_horizon, cfg.dt);
      double min_c = std::numeric_limits<double>::infinity();
      for (const Pose& p : tr.poses) {
        min_c = std::min(min_c, pose_clearance(clearance, p.position(), limits.robot_radius));
      }
      tr.min_clearance = min_c;
      tr.admissible = min_c >= 0.0 && admissible(tr.command, min_c, limits);
      Terms t{0.0, 0.0, 0.0};
      if (tr.admissible) {
        t.heading = (kPi - std::abs(bearing_error(tr.poses.back(), target))) / kPi;
        t.clearance = std::clamp(min_c, 0.0, cfg.clearance_cap) / cfg.clearance_cap;
        t.velocity = v / limits.v_max;
        sums.heading += t.heading;
        sums.clearance += t.clearance;
        sums.velocity += t.velocity;
      }
      terms.push_back(t);
      result.trajectories.push_back(std::move(tr));
    }
  }

  auto normalized = [](double value, double total) { return total > 0.0 ? value / total : 0.0; };
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < result.trajectories.size(); ++k) {
    Trajectory& tr = result.trajectories[k];
    if (!tr.admissible) {
      continue;
    }
    const Terms& t = terms[k];
    tr.score = cfg.alpha * normalized(t.heading, sums.heading) +
               cfg.beta * normalized(t.clearance, sums.clearance) +
               cfg.gamma * normalized(t.velocity, sums.velocity);
    // Candidates are visited in increasing (v, omega), so strict > keeps the
    // lexicographically smallest among equal scores.
    if (tr.score > best) {
      best = tr.score;
      result.selected = static_cast<int>(k);
    }
  }

  result.command = result.selected >= 0
                       ? result.trajectories[static_cast<std::size_t>(result.selected)].command
                       : recovery_command(pose, target, limits, cfg);
  return result;
}

}  // namespace rhinonav
