#pragma once

#include <stdexcept>
#include <string>

namespace rhinonav {

enum class ErrorCode {
  parse,
  invalid_argument,
  ray_origin_blocked,
  no_obstacles,
  no_free_cells,
  belief_annihilated,
  measurement_annihilated,
  start_blocked,
  goal_blocked,
  unreachable,
  robot_in_collision,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failures carry the 1-based line they were detected on (0 when the
// failure is not tied to a line, e.g. an empty body).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::parse,
              line == 0 ? message : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rhinonav
