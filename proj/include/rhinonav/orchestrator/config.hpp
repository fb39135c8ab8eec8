#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

#include "rhinonav/control/dwa.hpp"
#include "rhinonav/localization/odometry.hpp"
#include "rhinonav/perception/likelihood_field.hpp"
#include "rhinonav/util/text.hpp"
#include "rhinonav/world/scan.hpp"

namespace rhinonav {

struct SimConfig {
  std::filesystem::path map_path;
  Pose start{1.0, 1.0, 0.0};

  ScanConfig scan;
  double scan_noise = 0.0;  // std of range noise, meters
  SensorModelConfig sensor;
  MotionNoise motion;     // filter's motion model
  MotionNoise odometry;   // noise injected into the reported odometry
  KinematicLimits limits;
  DwaConfig dwa;

  double belief_xy_resolution = 0.2;
  int belief_ntheta = 36;

  double tick_rate = 10.0;
  double goal_tolerance = 0.3;
  double confidence_threshold = 0.5;
  bool reset_belief_on_goal = false;
  double lookahead = 0.5;
  double plan_margin = 0.15;       // extra inflation for planning, beyond robot_radius
  double replan_timeout = 3.0;     // seconds of DWA recovery before replanning
  double snippet_period = 10.0;    // seconds per in-transit snippet
  bool record_timing = true;
  std::uint64_t seed = 1;

  double dt() const { return 1.0 / tick_rate; }

  void validate() const {
    if (!(tick_rate > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "tick_rate must be positive");
    }
    if (!(goal_tolerance > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "goal_tolerance must be positive");
    }
    if (!(belief_xy_resolution > 0.0) || belief_ntheta < 1) {
      throw Error(ErrorCode::invalid_argument, "belief resolution must be positive");
    }
    if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "confidence_threshold must lie in [0, 1]");
    }
    if (!(scan_noise >= 0.0) || !(lookahead >= 0.0) || !(plan_margin >= 0.0) || !(replan_timeout > 0.0) ||
        !(snippet_period > 0.0)) {
      throw Error(ErrorCode::invalid_argument,
                  "scan_noise, lookahead must be >= 0; replan_timeout, snippet_period > 0");
    }
    if (std::abs(dwa.dt - dt()) > 1e-9) {
      throw Error(ErrorCode::invalid_argument, "dwa.dt must equal 1 / tick_rate");
    }
    scan.validate();
    sensor.validate();
    motion.validate();
    odometry.validate();
    limits.validate();
    dwa.validate();
  }
};

namespace detail {

struct ConfigField {
  std::function<void(SimConfig&, std::string_view, std::size_t)> set;
  std::function<std::string(const SimConfig&)> get;
};

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline bool parse_bool(std::string_view s, std::size_t line) {
  if (s == "true" || s == "1" || s == "yes") {
    return true;
  }
  if (s == "false" || s == "0" || s == "no") {
    return false;
  }
  throw ParseError(line, "invalid boolean '" + std::string(s) + "'");
}

template <class T>
ConfigField number_field(T SimConfig::*member) {
  return {[member](SimConfig& c, std::string_view v, std::size_t line) {
            c.*member = parse_double(v, line);
          },
          [member](const SimConfig& c) { return format_number(c.*member); }};
}

template <class S, class T>
ConfigField nested_number(S SimConfig::*outer, T S::*inner) {
  return {[outer, inner](SimConfig& c, std::string_view v, std::size_t line) {
            if constexpr (std::is_integral_v<T>) {
              (c.*outer).*inner = static_cast<T>(parse_integer(v, line));
            } else {
              (c.*outer).*inner = parse_double(v, line);
            }
          },
          [outer, inner](const SimConfig& c) {
            if constexpr (std::is_integral_v<T>) {
              return std::to_string((c.*outer).*inner);
            } else {
              return format_number((c.*outer).*inner);
            }
          }};
}

inline const std::map<std::string, ConfigField, std::less<>>& config_fields() {
  static const std::map<std::string, ConfigField, std::less<>> fields = [] {
    std::map<std::string, ConfigField, std::less<>> f;
    f["map"] = {[](SimConfig& c, std::string_view v, std::size_t) { c.map_path = std::string(v); },
                [](const SimConfig& c) { return c.map_path.string(); }};
    f["start"] = {[](SimConfig& c, std::string_view v, std::size_t line) {
                    const auto xs = parse_doubles(v, line);
                    if (xs.size() != 3) {
                      throw ParseError(line, "start expects 'x y theta'");
                    }
                    c.start = Pose(xs[0], xs[1], xs[2]);
                  },
                  [](const SimConfig& c) {
                    return format_number(c.start.x) + " " + format_number(c.start.y) + " " +
                           format_number(c.start.theta);
                  }};
    f["scan.beam_count"] = nested_number(&SimConfig::scan, &ScanConfig::beam_count);
    f["scan.angle_increment"] = nested_number(&SimConfig::scan, &ScanConfig::angle_increment);
    f["scan.max_range"] = nested_number(&SimConfig::scan, &ScanConfig::max_range);
    f["scan.noise_sigma"] = number_field(&SimConfig::scan_noise);
    f["sensor.sigma_hit"] = nested_number(&SimConfig::sensor, &SensorModelConfig::sigma_hit);
    f["sensor.z_hit"] = nested_number(&SimConfig::sensor, &SensorModelConfig::z_hit);
    f["sensor.z_rand"] = nested_number(&SimConfig::sensor, &SensorModelConfig::z_rand);
    f["sensor.z_max_weight"] = nested_number(&SimConfig::sensor, &SensorModelConfig::z_max_weight);
    f["sensor.beam_stride"] = nested_number(&SimConfig::sensor, &SensorModelConfig::beam_stride);
    for (const char* group : {"motion", "odometry"}) {
      auto member = std::string(group) == "motion" ? &SimConfig::motion : &SimConfig::odometry;
      const std::string g(group);
      f[g + ".alpha1"] = nested_number(member, &MotionNoise::alpha1);
      f[g + ".alpha2"] = nested_number(member, &MotionNoise::alpha2);
      f[g + ".alpha3"] = nested_number(member, &MotionNoise::alpha3);
      f[g + ".alpha4"] = nested_number(member, &MotionNoise::alpha4);
    }
    f["limits.v_max"] = nested_number(&SimConfig::limits, &KinematicLimits::v_max);
    f["limits.v_min"] = nested_number(&SimConfig::limits, &KinematicLimits::v_min);
    f["limits.omega_max"] = nested_number(&SimConfig::limits, &KinematicLimits::omega_max);
    f["limits.accel_v"] = nested_number(&SimConfig::limits, &KinematicLimits::accel_v);
    f["limits.accel_omega"] = nested_number(&SimConfig::limits, &KinematicLimits::accel_omega);
    f["limits.robot_radius"] = nested_number(&SimConfig::limits, &KinematicLimits::robot_radius);
    f["dwa.alpha"] = nested_number(&SimConfig::dwa, &DwaConfig::alpha);
    f["dwa.beta"] = nested_number(&SimConfig::dwa, &DwaConfig::beta);
    f["dwa.gamma"] = nested_number(&SimConfig::dwa, &DwaConfig::gamma);
    f["dwa.dt"] = nested_number(&SimConfig::dwa, &DwaConfig::dt);
    f["dwa.sim_horizon"] = nested_number(&SimConfig::dwa, &DwaConfig::sim_horizon);
    f["dwa.v_samples"] = nested_number(&SimConfig::dwa, &DwaConfig::v_samples);
    f["dwa.omega_samples"] = nested_number(&SimConfig::dwa, &DwaConfig::omega_samples);
    f["dwa.clearance_cap"] = nested_number(&SimConfig::dwa, &DwaConfig::clearance_cap);
    f["belief.xy_resolution"] = number_field(&SimConfig::belief_xy_resolution);
    f["belief.ntheta"] = {[](SimConfig& c, std::string_view v, std::size_t line) {
                            c.belief_ntheta = static_cast<int>(parse_integer(v, line));
                          },
                          [](const SimConfig& c) { return std::to_string(c.belief_ntheta); }};
    f["tick_rate"] = number_field(&SimConfig::tick_rate);
    f["goal_tolerance"] = number_field(&SimConfig::goal_tolerance);
    f["confidence_threshold"] = number_field(&SimConfig::confidence_threshold);
    f["lookahead"] = number_field(&SimConfig::lookahead);
    f["plan_margin"] = number_field(&SimConfig::plan_margin);
    f["replan_timeout"] = number_field(&SimConfig::replan_timeout);
    f["snippet_period"] = number_field(&SimConfig::snippet_period);
    f["reset_belief_on_goal"] = {[](SimConfig& c, std::string_view v, std::size_t line) {
                                   c.reset_belief_on_goal = parse_bool(v, line);
                                 },
                                 [](const SimConfig& c) {
                                   return std::string(c.reset_belief_on_goal ? "true" : "false");
                                 }};
    f["record_timing"] = {[](SimConfig& c, std::string_view v, std::size_t line) {
                            c.record_timing = parse_bool(v, line);
                          },
                          [](const SimConfig& c) {
                            return std::string(c.record_timing ? "true" : "false");
                          }};
    f["seed"] = {[](SimConfig& c, std::string_view v, std::size_t line) {
                   const long long s = parse_integer(v, line);
                   if (s < 0) {
                     throw ParseError(line, "seed must be non-negative");
                   }
                   c.seed = static_cast<std::uint64_t>(s);
                 },
                 [](const SimConfig& c) { return std::to_string(c.seed); }};
    return f;
  }();
  return fields;
}

// Splits "key = value" lines, skipping blanks and '#' comments.
inline std::vector<std::tuple<std::size_t, std::string_view, std::string_view>> key_values(
    std::string_view text) {
  std::vector<std::tuple<std::size_t, std::string_view, std::string_view>> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(i + 1, "expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError(i + 1, "expected 'key = value'");
    }
    out.emplace_back(i + 1, key, value);
  }
  return out;
}

}  // namespace detail

// Relative map paths are resolved against `base_dir`.
inline SimConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
  SimConfig cfg;
  const auto& fields = detail::config_fields();
  for (const auto& [line, key, value] : detail::key_values(text)) {
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw ParseError(line, "unknown config key '" + std::string(key) + "'");
    }
    it->second.set(cfg, value, line);
  }
  if (!cfg.map_path.empty() && cfg.map_path.is_relative() && !base_dir.empty()) {
    cfg.map_path = base_dir / cfg.map_path;
  }
  cfg.validate();
  return cfg;
}

inline SimConfig load_config_file(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.parent_path());
}

// Every key with its current value, one per line, in key order.
inline std::string format_config(const SimConfig& cfg) {
  std::string out;
  for (const auto& [key, field] : detail::config_fields()) {
    out += key + " = " + field.get(cfg) + "\n";
  }
  return out;
}

// Scenario: a start pose and an ordered list of goals.
struct Scenario {
  std::optional<Pose> start;
  std::vector<Point2> goals;
};

inline Scenario parse_scenario(std::string_view text) {
  Scenario s;
  for (const auto& [line, key, value] : detail::key_values(text)) {
    const auto xs = parse_doubles(value, line);
    if (key == "start") {
      if (xs.size() != 3) {
        throw ParseError(line, "start expects 'x y theta'");
      }
      s.start = Pose(xs[0], xs[1], xs[2]);
    } else if (key == "goal") {
      if (xs.size() != 2) {
        throw ParseError(line, "goal expects 'x y'");
      }
      s.goals.push_back({xs[0], xs[1]});
    } else {
      throw ParseError(line, "unknown scenario key '" + std::string(key) + "'");
    }
  }
  return s;
}

inline Scenario load_scenario_file(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path));
}

}  // namespace rhinonav
