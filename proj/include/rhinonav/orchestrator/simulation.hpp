#pragma once

#include <chrono>
#include <deque>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rhinonav/control/dwa.hpp"
#include "rhinonav/localization/markov_filter.hpp"
#include "rhinonav/orchestrator/config.hpp"
#include "rhinonav/orchestrator/snapshot.hpp"
#include "rhinonav/orchestrator/state_machine.hpp"
#include "rhinonav/planning/astar.hpp"
#include "rhinonav/world/inflate.hpp"
#include "rhinonav/world/map_io.hpp"

namespace rhinonav {

struct GoalAccepted {};
struct GoalRejected {
  std::string reason;  // "out of bounds" or "inside obstacle"
};
using GoalResult = std::variant<GoalAccepted, GoalRejected>;

inline bool accepted(const GoalResult& r) { return std::holds_alternative<GoalAccepted>(r); }

// Why `p` cannot be a goal on the inflated map, if it cannot.
inline std::optional<std::string> goal_rejection(const GridMap& inflated, Point2 p) {
  const auto c = inflated.world_to_grid(p);
  if (!c) {
    return "out of bounds";
  }
  if (!inflated.is_free(*c)) {
    return "inside obstacle";
  }
  return std::nullopt;
}

// Nearest free cell of `map` to `from` (breadth-first in the 8-neighbourhood),
// used when the estimate sits inside the inflation margin.
inline std::optional<CellIndex> nearest_free_cell(const GridMap& map, CellIndex from) {
  if (!map.in_bounds(from.ix, from.iy)) {
    return std::nullopt;
  }
  std::vector<std::uint8_t> seen(map.size(), 0);
  std::deque<CellIndex> queue{from};
  seen[map.index(from)] = 1;
  while (!queue.empty()) {
    const CellIndex c = queue.front();
    queue.pop_front();
    if (map.is_free(c)) {
      return c;
    }
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const CellIndex n{c.ix + dx, c.iy + dy};
        if ((dx != 0 || dy != 0) && map.in_bounds(n.ix, n.iy) && !seen[map.index(n)]) {
          seen[map.index(n)] = 1;
          queue.push_back(n);
        }
      }
    }
  }
  return std::nullopt;
}

// Perturbs each odometry component with zero-mean Gaussian noise whose std
// follows the motion model. The noisy translation may come out negative (a
// small reverse step); folding it into a half turn instead would inflate the
// rotation noise of the next prediction for no gain.
inline OdometryDelta noisy_odometry(const OdometryDelta& truth, const MotionNoise& noise, Rng& rng) {
  const MotionStd sd = motion_std(truth, noise);
  auto perturb = [&rng](double mean, double sigma) {
    if (!(sigma > 0.0)) {
      return mean;
    }
    std::normal_distribution<double> n(0.0, sigma);
    return mean + n(rng);
  };
  return {perturb(truth.rot1, sd.rot1), perturb(truth.trans, sd.trans),
          perturb(truth.rot2, sd.rot2)};
}

inline constexpr double kEscapeRadiusFactor = 0.99;

// One simulated robot with its navigation stack. Single-threaded: the owner
// calls set_goal / reset between steps.
class Simulation {
 public:
  Simulation(SimConfig cfg, GridMap map)
      : cfg_(std::move(cfg)), map_(std::move(map)),
        inflated_(inflate_obstacles(map_, cfg_.limits.robot_radius + cfg_.plan_margin)),
        field_(build_likelihood_field(map_, cfg_.sensor)),
        clearance_(build_clearance_field(map_)),
        shape_(make_belief_shape(map_, cfg_.belief_xy_resolution, cfg_.belief_ntheta)),
        belief_(init_uniform(map_, shape_)), rng_(cfg_.seed), true_pose_(cfg_.start) {
    cfg_.validate();
    const auto c = map_.world_to_grid(true_pose_.position());
    if (!c || !map_.is_free(*c)) {
      throw Error(ErrorCode::invalid_argument, "start pose is not in free space");
    }
  }

  static Simulation from_config(const SimConfig& cfg) {
    if (cfg.map_path.empty()) {
      throw Error(ErrorCode::invalid_argument, "config has no map");
    }
    return Simulation(cfg, load_map_file(cfg.map_path));
  }

  const SimConfig& config() const { return cfg_; }
  const GridMap& map() const { return map_; }
  const GridMap& inflated_map() const { return inflated_; }
  const BeliefGrid& belief() const { return belief_; }
  const Pose& true_pose() const { return true_pose_; }
  ExhibitState state() const { return state_; }
  const Path& path() const { return path_; }
  std::optional<Point2> goal() const { return goal_; }
  std::uint64_t tick() const { return tick_; }
  VelocityCommand command() const { return command_; }

  GoalResult set_goal(Point2 p) {
    if (auto reason = goal_rejection(inflated_, p)) {
      return GoalRejected{std::move(*reason)};
    }
    goal_ = p;
    path_ = track_ = {};
    blocked_ticks_ = 0;
    if (cfg_.reset_belief_on_goal) {
      belief_ = init_uniform(map_, shape_);
    }
    switch (state_) {
      case ExhibitState::idle:
      case ExhibitState::arrived:
      case ExhibitState::navigating:
        transition(ExhibitState::goal_received);
        break;
      case ExhibitState::planning:
        if (cfg_.reset_belief_on_goal) {
          transition(ExhibitState::localizing);
        }
        break;
      case ExhibitState::goal_received:
      case ExhibitState::localizing:
        break;
    }
    command_ = {};
    return GoalAccepted{};
  }

  // Drops the goal and the belief; the robot stays where it is.
  void reset() {
    transition(ExhibitState::idle);
    goal_.reset();
    path_ = track_ = {};
    command_ = {};
    blocked_ticks_ = 0;
    belief_ = init_uniform(map_, shape_);
  }

  Snapshot step() {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    Snapshot snap;
    std::vector<std::string>& warnings = snap.warnings;
    auto elapsed_ms = [&](clock::time_point since) {
      return cfg_.record_timing
                 ? std::chrono::duration<double, std::milli>(clock::now() - since).count()
                 : 0.0;
    };
    auto run_stage = [&](Stage s, auto&& body) {
      StageTiming& t = snap.timing[static_cast<std::size_t>(s)];
      t.start_ms = elapsed_ms(t0);
      const auto ts = clock::now();
      body();
      t.duration_ms = elapsed_ms(ts);
    };

    const double dt = cfg_.dt();
    OdometryDelta odom;
    LaserScan scan;

    run_stage(Stage::sense, [&] {
      const Pose prev = true_pose_;
      const Pose next = integrate_unicycle(prev, command_, dt);
      const auto c = map_.world_to_grid(next.position());
      if (c && map_.is_free(*c)) {
        true_pose_ = next;
      } else {
        warnings.emplace_back("bump");
        command_ = {};
      }
      odom = noisy_odometry(decompose_odometry(prev, true_pose_), cfg_.odometry, rng_);
      scan = simulate_scan(map_, true_pose_, cfg_.scan, cfg_.scan_noise, rng_);
    });

    run_stage(Stage::localize, [&] {
      try {
        belief_ = predict(belief_, odom, cfg_.motion);
        belief_ = correct(belief_, scan, field_, map_);
        drop_negligible(belief_);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::belief_annihilated &&
            e.code() != ErrorCode::measurement_annihilated) {
          throw;
        }
        warnings.emplace_back(e.what());
        belief_ = init_uniform(map_, shape_);
        path_ = track_ = {};
        command_ = {};
        if (goal_) {
          transition(ExhibitState::localizing);
        }
      }
      estimate_ = estimate(belief_);
      control_pose_ = refine_estimate(belief_, estimate_);
      if (state_ == ExhibitState::goal_received) {
        transition(ExhibitState::localizing);
      } else if (state_ == ExhibitState::localizing &&
                 is_converged(belief_, cfg_.confidence_threshold)) {
        transition(ExhibitState::planning);
      }
    });

    run_stage(Stage::plan, [&] {
      if (state_ != ExhibitState::planning) {
        return;
      }
      if (!planned_this_state_) {
        planned_this_state_ = true;  // wait one tick so Planning is observable
        return;
      }
      try {
        const auto c = inflated_.world_to_grid(estimate_.pose.position());
        const auto s = c ? nearest_free_cell(inflated_, *c) : std::nullopt;
        if (!s) {
          throw Error(ErrorCode::start_blocked, "start blocked");
        }
        path_ = prune_path(plan(inflated_, inflated_.grid_to_world(*s), *goal_), inflated_);
        track_ = densify(path_, inflated_.resolution());
        blocked_ticks_ = 0;
        navigation_started_ = tick_ + 1;
        transition(ExhibitState::navigating);
      } catch (const Error& e) {
        warnings.emplace_back(e.what());
        reset_goal_only();
      }
    });

    DwaResult dwa;
    run_stage(Stage::act, [&] {
      if (state_ != ExhibitState::navigating) {
        command_ = {};
        return;
      }
      if (distance(estimate_.pose.position(), *goal_) <= cfg_.goal_tolerance) {
        transition(ExhibitState::arrived);
        path_ = track_ = {};
        command_ = {};
        return;
      }
      const Point2 target = next_waypoint(track_, control_pose_, cfg_.lookahead);
      const double free = pose_clearance(clearance_, control_pose_.position(), 0.0);
      if (free >= cfg_.limits.robot_radius) {
        dwa = select_command(control_pose_, command_, target, clearance_, cfg_.limits, cfg_.dwa);
        blocked_ticks_ = dwa.recovery() ? blocked_ticks_ + 1 : 0;
      } else if (free > 0.0) {
        // The estimate sits inside the robot radius (estimation error near a
        // wall): shrink the disc to the current free distance so only motions
        // that do not get any closer are admissible, and back out of it.
        KinematicLimits shrunk = cfg_.limits;
        shrunk.robot_radius = kEscapeRadiusFactor * free;
        dwa = select_command(control_pose_, command_, target, clearance_, shrunk, cfg_.dwa);
        ++blocked_ticks_;
      } else {
        dwa.command = recovery_command(control_pose_, target, cfg_.limits, cfg_.dwa);
        ++blocked_ticks_;
      }
      command_ = dwa.command;
      if (blocked_ticks_ * dt >= cfg_.replan_timeout) {
        warnings.emplace_back("blocked, replanning");
        blocked_ticks_ = 0;
        path_ = track_ = {};
        command_ = {};
        transition(ExhibitState::planning);
      }
    });

    ++tick_;
    snap.tick = tick_;
    snap.time = static_cast<double>(tick_) * dt;
    snap.true_pose = true_pose_;
    snap.estimate = estimate_;
    for (int i = 0; i < scan.config.beam_count; ++i) {
      snap.scan_endpoints.push_back(beam_endpoint(estimate_.pose, scan.config.beam_offset(i),
                                                  scan.ranges[static_cast<std::size_t>(i)]));
    }
    snap.belief_shape = belief_.shape();
    snap.belief_xy_resolution = belief_.xy_resolution();
    snap.belief_origin = belief_.origin();
    snap.marginal = belief_.marginal_xy();
    snap.path = path_.waypoints;
    snap.goal = goal_;
    snap.command = command_;
    snap.selected = dwa.selected;
    for (const Trajectory& t : dwa.trajectories) {
      snap.trajectories.push_back({t.command, t.admissible, t.score, decimate(t.poses)});
    }
    snap.state = state_;
    const double navigating_for =
        state_ == ExhibitState::navigating ? static_cast<double>(tick_ - navigation_started_) * dt : 0.0;
    snap.snippet = snippet_for(state_, navigating_for, cfg_.snippet_period);
    snap.step_ms = elapsed_ms(t0);
    return snap;
  }

 private:
  void transition(ExhibitState to) {
    if (to != state_ && !is_valid_transition(state_, to) && to != ExhibitState::localizing) {
      throw std::logic_error("invalid state transition " + std::string(state_name(state_)) +
                             " -> " + std::string(state_name(to)));
    }
    if (to != state_) {
      planned_this_state_ = false;
    }
    state_ = to;
  }

  // Abandons the current goal after a planning failure.
  void reset_goal_only() {
    transition(ExhibitState::idle);
    goal_.reset();
    path_ = track_ = {};
    command_ = {};
  }

  SimConfig cfg_;
  GridMap map_;
  GridMap inflated_;
  LikelihoodField field_;
  LikelihoodField clearance_;
  BeliefShape shape_;
  BeliefGrid belief_;
  Rng rng_;
  Pose true_pose_;
  PoseEstimate estimate_{};
  Pose control_pose_;  // sub-cell estimate used by the local controller
  VelocityCommand command_{};
  ExhibitState state_ = ExhibitState::idle;
  std::optional<Point2> goal_;
  Path path_;
  Path track_;  // path_ densified for waypoint following
  std::uint64_t tick_ = 0;
  std::uint64_t navigation_started_ = 0;
  int blocked_ticks_ = 0;
  bool planned_this_state_ = false;
};

}  // namespace rhinonav
