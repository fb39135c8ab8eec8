// Command-line entry point: serve the exhibit, run scenarios headless, or
// exercise the planner and localizer on their own.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "rhinonav/orchestrator/headless.hpp"
#include "rhinonav/orchestrator/server.hpp"

namespace {

using namespace rhinonav;

Point2 parse_point(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) {
    throw CLI::ValidationError("point", "expected 'x,y', got '" + s + "'");
  }
  return {parse_double(trim(std::string_view(s).substr(0, comma)), 0),
          parse_double(trim(std::string_view(s).substr(comma + 1)), 0)};
}

int run_command(const std::string& config_path, const std::string& scenario_path,
                std::uint64_t ticks, const std::string& out_path, const std::string& snapshots_path,
                bool no_timing) {
  SimConfig cfg = load_config_file(config_path);
  if (no_timing) {
    cfg.record_timing = false;
  }
  const Scenario scenario = scenario_path.empty() ? Scenario{} : load_scenario_file(scenario_path);
  std::ofstream csv(out_path);
  if (!csv) {
    std::cerr << "error: cannot write " << out_path << "\n";
    return 2;
  }
  std::unique_ptr<std::ofstream> snaps;
  if (!snapshots_path.empty()) {
    snaps = std::make_unique<std::ofstream>(snapshots_path);
  }
  return run_headless(cfg, scenario, ticks, csv, std::cerr, snaps.get()).exit_code;
}

int plan_command(const std::string& map_path, double radius, const std::string& from,
                 const std::string& to) {
  const GridMap inflated = inflate_obstacles(load_map_file(map_path), radius);
  const Path raw = plan(inflated, parse_point(from), parse_point(to));
  const Path pruned = prune_path(raw, inflated);
  std::cout << "cost " << raw.total_cost << "\n";
  for (const Point2& p : pruned.waypoints) {
    std::cout << p.x << " " << p.y << "\n";
  }
  return 0;
}

// Global localization of a stationary robot: repeated scans from a uniform
// prior, printing one trace line per cycle, until the belief converges.
int localize_command(const std::string& config_path, const std::string& map_path,
                     const std::string& scenario_path, int max_cycles) {
  SimConfig cfg = config_path.empty() ? SimConfig{} : load_config_file(config_path);
  if (!map_path.empty()) {
    cfg.map_path = map_path;
  }
  if (!scenario_path.empty()) {
    if (const auto start = load_scenario_file(scenario_path).start) {
      cfg.start = *start;
    }
  }
  Simulation sim = Simulation::from_config(cfg);
  for (int i = 1; i <= max_cycles; ++i) {
    const Snapshot s = sim.step();
    const double err = distance(s.estimate.pose.position(), s.true_pose.position());
    const double err_theta = std::abs(normalize_angle(s.estimate.pose.theta - s.true_pose.theta));
    std::printf("cycle %d entropy %.6f confidence %.6f estimate %.3f %.3f %.3f err_xy %.4f err_theta %.4f\n",
                i, s.estimate.entropy, s.estimate.confidence, s.estimate.pose.x, s.estimate.pose.y,
                s.estimate.pose.theta, err, err_theta);
    if (is_converged(sim.belief(), cfg.confidence_threshold)) {
      std::printf("converged after %d cycles\n", i);
      return 0;
    }
  }
  std::fprintf(stderr, "not converged after %d cycles\n", max_cycles);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RHINO-style museum tour-guide navigation simulator"};
  app.require_subcommand(1);

  std::string config_path = "data/config/default.conf";
  std::string bind = "127.0.0.1:8080";
  std::string static_dir;
  bool debug_truth = false;
  auto* serve = app.add_subcommand("serve", "Run the simulation and the WebSocket server");
  serve->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  serve->add_option("--bind", bind, "host:port to listen on");
  serve->add_option("--static", static_dir, "Directory of UI files served over HTTP")
      ->check(CLI::ExistingDirectory);
  serve->add_flag("--debug-truth", debug_truth, "Include the true pose in snapshots");

  std::string scenario_path;
  std::uint64_t ticks = 600;
  std::string out_path = "metrics.csv";
  std::string snapshots_path;
  bool no_timing = false;
  auto* run = app.add_subcommand("run", "Run a scenario without clients");
  run->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
  run->add_option("--scenario", scenario_path, "Scenario file")->check(CLI::ExistingFile);
  run->add_option("--ticks", ticks, "Number of ticks");
  run->add_option("--out", out_path, "Per-tick metrics CSV");
  run->add_option("--snapshots", snapshots_path, "Write every snapshot as a JSON line");
  run->add_flag("--no-timing", no_timing, "Zero all timings (byte-identical reruns)");

  std::string map_path;
  std::string from, to;
  double radius = 0.25;
  auto* plan_cmd = app.add_subcommand("plan", "Plan a path on a map");
  plan_cmd->add_option("--map", map_path, "Map file")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--from", from, "Start x,y")->required();
  plan_cmd->add_option("--to", to, "Goal x,y")->required();
  plan_cmd->add_option("--radius", radius, "Robot radius for inflation");

  int max_cycles = 30;
  std::string localize_config;
  auto* localize = app.add_subcommand("localize", "Localize a stationary robot from scratch");
  localize->add_option("--map", map_path, "Map file")->check(CLI::ExistingFile);
  localize->add_option("--scenario", scenario_path, "Scenario file (its start pose is used)")
      ->check(CLI::ExistingFile);
  localize->add_option("--config", localize_config, "Config file (defaults otherwise)")
      ->check(CLI::ExistingFile);
  localize->add_option("--cycles", max_cycles, "Maximum filter cycles");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      ServerOptions opts;
      opts.bind = bind;
      opts.static_dir = static_dir;
      opts.debug_truth = debug_truth;
      return serve_forever(load_config_file(config_path), opts, std::cerr);
    }
    if (*run) {
      return run_command(config_path, scenario_path, ticks, out_path, snapshots_path, no_timing);
    }
    if (*plan_cmd) {
      return plan_command(map_path, radius, from, to);
    }
    if (*localize) {
      if (map_path.empty() && localize_config.empty()) {
        std::cerr << "error: localize needs --map or --config\n";
        return 2;
      }
      return localize_command(localize_config, map_path, scenario_path, max_cycles);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
