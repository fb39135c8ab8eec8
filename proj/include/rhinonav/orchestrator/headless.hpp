#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include "rhinonav/orchestrator/protocol.hpp"
#include "rhinonav/orchestrator/simulation.hpp"

namespace rhinonav {

inline constexpr int kExitOk = 0;
inline constexpr int kExitTimeout = 1;
inline constexpr int kExitInvalidGoal = 2;
inline constexpr int kExitGoalFailed = 3;

inline constexpr const char* kMetricsHeader =
    "tick,time,state,snippet,goal,entropy,confidence,err_xy,err_theta,"
    "sense_ms,localize_ms,plan_ms,act_ms,step_ms";

struct HeadlessResult {
  int exit_code = kExitOk;
  std::uint64_t ticks = 0;
  std::size_t goals_reached = 0;
  std::size_t goals_failed = 0;
  double mean_step_ms = 0.0;
  double max_step_ms = 0.0;
  double final_err_xy = 0.0;
  double final_err_theta = 0.0;
};

inline std::string metrics_row(const Snapshot& s, int goal_index) {
  const double err_xy = distance(s.estimate.pose.position(), s.true_pose.position());
  const double err_theta = std::abs(normalize_angle(s.estimate.pose.theta - s.true_pose.theta));
  char buf[512];
  std::snprintf(buf, sizeof buf, "%llu,%.3f,%s,%s,%d,%.6f,%.6f,%.6f,%.6f,%.3f,%.3f,%.3f,%.3f,%.3f",
                static_cast<unsigned long long>(s.tick), s.time,
                std::string(state_name(s.state)).c_str(), std::string(snippet_name(s.snippet)).c_str(),
                goal_index, s.estimate.entropy, s.estimate.confidence, err_xy, err_theta,
                s.timing[0].duration_ms, s.timing[1].duration_ms, s.timing[2].duration_ms,
                s.timing[3].duration_ms, s.step_ms);
  return buf;
}

// Runs `ticks` steps without clients, feeding the scenario goals one after
// another. Writes one CSV row per tick and, optionally, every snapshot as a
// JSON line. Exit code: 0 when every goal was reached (or there were none),
// 1 on timeout, 2 when a scripted goal is invalid, 3 when a goal failed.
inline HeadlessResult run_headless(SimConfig cfg, const Scenario& scenario, std::uint64_t ticks,
                                   std::ostream& csv, std::ostream& log,
                                   std::ostream* snapshots = nullptr) {
  if (scenario.start) {
    cfg.start = *scenario.start;
  }
  HeadlessResult result;
  csv << kMetricsHeader << "\n";
  Simulation sim = Simulation::from_config(cfg);

  for (std::size_t i = 0; i < scenario.goals.size(); ++i) {
    if (const auto reason = goal_rejection(sim.inflated_map(), scenario.goals[i])) {
      log << "goal " << i << " (" << scenario.goals[i].x << ", " << scenario.goals[i].y
          << ") rejected: " << *reason << "\n";
      result.exit_code = kExitInvalidGoal;
      return result;
    }
  }
  if (ticks == 0) {
    return result;
  }

  std::size_t goal_index = 0;
  bool goal_active = false;
  auto start_next_goal = [&] {
    goal_active = goal_index < scenario.goals.size();
    if (goal_active) {
      sim.set_goal(scenario.goals[goal_index]);
    }
  };
  start_next_goal();

  double total_ms = 0.0;
  Snapshot last;
  for (std::uint64_t t = 0; t < ticks; ++t) {
    last = sim.step();
    const int shown = goal_active ? static_cast<int>(goal_index) : -1;
    csv << metrics_row(last, shown) << "\n";
    if (snapshots) {
      *snapshots << snapshot_message(last, true) << "\n";
    }
    total_ms += last.step_ms;
    result.max_step_ms = std::max(result.max_step_ms, last.step_ms);
    for (const std::string& w : last.warnings) {
      log << "tick " << last.tick << ": " << w << "\n";
    }
    if (goal_active && last.state == ExhibitState::arrived) {
      log << "tick " << last.tick << ": goal " << goal_index << " reached\n";
      ++result.goals_reached;
      ++goal_index;
      start_next_goal();
    } else if (goal_active && last.state == ExhibitState::idle) {
      log << "tick " << last.tick << ": goal " << goal_index << " failed\n";
      ++result.goals_failed;
      ++goal_index;
      start_next_goal();
    }
  }

  result.ticks = ticks;
  result.mean_step_ms = total_ms / static_cast<double>(ticks);
  result.final_err_xy = distance(last.estimate.pose.position(), last.true_pose.position());
  result.final_err_theta = std::abs(normalize_angle(last.estimate.pose.theta - last.true_pose.theta));
  if (result.goals_failed > 0) {
    result.exit_code = kExitGoalFailed;
  } else if (result.goals_reached < scenario.goals.size()) {
    result.exit_code = kExitTimeout;
  }
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "ticks=%llu goals_reached=%zu/%zu mean_step_ms=%.3f max_step_ms=%.3f "
                "final_err_xy=%.4f final_err_theta_deg=%.3f",
                static_cast<unsigned long long>(ticks), result.goals_reached,
                scenario.goals.size(), result.mean_step_ms, result.max_step_ms,
                result.final_err_xy, result.final_err_theta * 180.0 / kPi);
  log << buf << "\n";
  return result;
}

}  // namespace rhinonav
