#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rhinonav/control/dwa.hpp"
#include "rhinonav/localization/markov_filter.hpp"
#include "rhinonav/orchestrator/state_machine.hpp"

namespace rhinonav {

enum class Stage { sense, localize, plan, act };
inline constexpr std::array<std::string_view, 4> kStageNames{"sense", "localize", "plan", "act"};

// Wall-clock cost of one stage: when it started relative to the tick start,
// and how long it ran. Both are zero when timing is disabled.
struct StageTiming {
  double start_ms = 0.0;
  double duration_ms = 0.0;
};

struct TrajectorySummary {
  VelocityCommand command;
  bool admissible = false;
  double score = 0.0;
  std::vector<Point2> points;  // at most kMaxTrajectoryPoints
};

inline constexpr std::size_t kMaxTrajectoryPoints = 10;

// Everything one tick exposes to clients.
struct Snapshot {
  std::uint64_t tick = 0;
  double time = 0.0;
  Pose true_pose;
  PoseEstimate estimate;
  std::vector<Point2> scan_endpoints;
  BeliefShape belief_shape;
  double belief_xy_resolution = 0.0;
  Point2 belief_origin;
  std::vector<double> marginal;
  std::vector<Point2> path;
  std::optional<Point2> goal;
  VelocityCommand command;
  int selected = -1;
  std::vector<TrajectorySummary> trajectories;
  ExhibitState state = ExhibitState::idle;
  SnippetId snippet = SnippetId::a;
  std::array<StageTiming, 4> timing{};
  double step_ms = 0.0;
  std::vector<std::string> warnings;
};

// Evenly spaced subset of the poses, always keeping the first and last.
inline std::vector<Point2> decimate(const std::vector<Pose>& poses,
                                    std::size_t max_points = kMaxTrajectoryPoints) {
  std::vector<Point2> out;
  if (poses.size() <= max_points) {
    for (const Pose& p : poses) {
      out.push_back(p.position());
    }
    return out;
  }
  const std::size_t n = poses.size() - 1;
  for (std::size_t i = 0; i < max_points; ++i) {
    out.push_back(poses[(i * n + (max_points - 1) / 2) / (max_points - 1)].position());
  }
  return out;
}

}  // namespace rhinonav
