#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <variant>
#include <vector>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "json.hpp"
#include "rhinonav/orchestrator/snapshot.hpp"
#include "rhinonav/world/map_io.hpp"

namespace rhinonav {

using Json = nlohmann::ordered_json;

inline constexpr int kProtocolVersion = 1;

// ---------------------------------------------------------------------------
// Encodings

// Runs of "<count><char>" over the cells in storage order (x fastest, row 0
// at the lowest y), using the map-file characters.
inline std::string encode_cells(const GridMap& map) {
  std::string out;
  const auto cells = map.cells();
  std::size_t i = 0;
  while (i < cells.size()) {
    std::size_t j = i;
    while (j < cells.size() && cells[j] == cells[i]) {
      ++j;
    }
    out += std::to_string(j - i);
    out += cell_char(cells[i]);
    i = j;
  }
  return out;
}

inline std::vector<CellState> decode_cells(std::string_view rle, std::size_t expected) {
  std::vector<CellState> out;
  out.reserve(expected);
  std::size_t i = 0;
  while (i < rle.size()) {
    std::size_t count = 0;
    const std::size_t digits_start = i;
    while (i < rle.size() && rle[i] >= '0' && rle[i] <= '9') {
      count = count * 10 + static_cast<std::size_t>(rle[i] - '0');
      if (count > expected) {
        throw Error(ErrorCode::parse, "cell run exceeds map size");
      }
      ++i;
    }
    if (i == digits_start || i == rle.size() || count == 0) {
      throw Error(ErrorCode::parse, "malformed cell run");
    }
    const CellState s = rle[i] == '#'   ? CellState::occupied
                        : rle[i] == '.' ? CellState::free
                        : rle[i] == '?' ? CellState::unknown
                                        : throw Error(ErrorCode::parse, "unknown cell character");
    ++i;
    if (out.size() + count > expected) {
      throw Error(ErrorCode::parse, "cell run exceeds map size");
    }
    out.insert(out.end(), count, s);
  }
  if (out.size() != expected) {
    throw Error(ErrorCode::parse, "cell runs do not cover the map");
  }
  return out;
}

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::vector<std::uint8_t>::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

inline std::vector<std::uint8_t> base64_decode(std::string_view text) {
  using namespace boost::archive::iterators;
  if (text.size() % 4 != 0) {
    throw Error(ErrorCode::parse, "base64 length must be a multiple of 4");
  }
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') {
    ++pad;
  }
  std::string body(text.substr(0, text.size() - pad));
  body.append(pad, 'A');
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::vector<std::uint8_t> out;
  try {
    for (It it(body.begin()), end(body.end()); it != end; ++it) {
      out.push_back(static_cast<std::uint8_t>(*it));
    }
  } catch (const std::exception&) {
    throw Error(ErrorCode::parse, "invalid base64");
  }
  out.resize(out.size() - pad);
  return out;
}

// Little-endian IEEE-754 binary32, four bytes per value.
inline std::vector<std::uint8_t> float32_le_bytes(const std::vector<double>& values) {
  std::vector<std::uint8_t> out(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int b = 0; b < 4; ++b) {
      out[i * 4 + static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
  }
  return out;
}

inline std::vector<float> float32_le_values(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() % 4 != 0) {
    throw Error(ErrorCode::parse, "float32 payload length must be a multiple of 4");
  }
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(bytes[i * 4 + static_cast<std::size_t>(b)]) << (8 * b);
    }
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Server messages

// Fixed-point rounding keeps messages compact and stable across runs.
inline double rounded(double v, int decimals = 4) {
  const double scale = std::pow(10.0, decimals);
  const double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

inline Json point_json(Point2 p) { return Json::array({rounded(p.x), rounded(p.y)}); }

inline Json points_json(const std::vector<Point2>& pts) {
  Json a = Json::array();
  for (const Point2& p : pts) {
    a.push_back(point_json(p));
  }
  return a;
}

inline Json pose_json(const Pose& p) {
  return {{"x", rounded(p.x)}, {"y", rounded(p.y)}, {"theta", rounded(p.theta)}};
}

inline std::string welcome_message(std::string_view role, const GridMap& map) {
  Json j;
  j["type"] = "welcome";
  j["version"] = kProtocolVersion;
  j["role"] = role;
  j["map"] = {{"width", map.width()},
              {"height", map.height()},
              {"resolution", map.resolution()},
              {"origin", Json::array({map.origin().x, map.origin().y})},
              {"cells", encode_cells(map)}};
  return j.dump();
}

inline std::string error_message(std::string_view code, std::string_view message) {
  Json j;
  j["type"] = "error";
  j["code"] = code;
  j["message"] = message;
  return j.dump();
}

inline std::string snapshot_message(const Snapshot& s, bool include_truth) {
  Json j;
  j["type"] = "snapshot";
  j["tick"] = s.tick;
  j["time"] = rounded(s.time, 6);
  j["state"] = state_name(s.state);
  j["snippet"] = snippet_name(s.snippet);
  Json est = pose_json(s.estimate.pose);
  est["confidence"] = rounded(s.estimate.confidence, 6);
  est["entropy"] = rounded(s.estimate.entropy, 6);
  j["estimate"] = est;
  if (include_truth) {
    j["true_pose"] = pose_json(s.true_pose);
  }
  j["command"] = {{"v", rounded(s.command.v)}, {"omega", rounded(s.command.omega)}};
  j["goal"] = s.goal ? point_json(*s.goal) : Json(nullptr);
  j["path"] = points_json(s.path);
  j["scan"] = points_json(s.scan_endpoints);
  j["belief"] = {{"nx", s.belief_shape.nx},
                 {"ny", s.belief_shape.ny},
                 {"ntheta", s.belief_shape.ntheta},
                 {"xy_resolution", s.belief_xy_resolution},
                 {"origin", Json::array({s.belief_origin.x, s.belief_origin.y})},
                 {"marginal", base64_encode(float32_le_bytes(s.marginal))}};
  Json trajectories = Json::array();
  for (const TrajectorySummary& t : s.trajectories) {
    trajectories.push_back({{"v", rounded(t.command.v)},
                            {"omega", rounded(t.command.omega)},
                            {"admissible", t.admissible},
                            {"score", rounded(t.score, 6)},
                            {"points", points_json(t.points)}});
  }
  j["dwa"] = {{"selected", s.selected}, {"trajectories", trajectories}};
  Json timing;
  for (std::size_t i = 0; i < kStageNames.size(); ++i) {
    timing[std::string(kStageNames[i])] = {{"start_ms", rounded(s.timing[i].start_ms, 3)},
                                           {"duration_ms", rounded(s.timing[i].duration_ms, 3)}};
  }
  timing["step_ms"] = rounded(s.step_ms, 3);
  j["timing"] = timing;
  j["warnings"] = s.warnings;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Client messages

struct HelloMessage {
  std::string role;
};
struct SetGoalMessage {
  double x;
  double y;
};
struct ResetMessage {};
struct PauseMessage {};
struct ResumeMessage {};
using ClientMessage =
    std::variant<HelloMessage, SetGoalMessage, ResetMessage, PauseMessage, ResumeMessage>;

// A client message that could not be understood; `code` goes in the reply.
class ProtocolError : public Error {
 public:
  ProtocolError(std::string code, const std::string& message)
      : Error(ErrorCode::parse, message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline ClientMessage parse_client_message(std::string_view text) {
  const Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ProtocolError("malformed", "malformed message: expected a JSON object");
  }
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) {
    throw ProtocolError("malformed", "malformed message: missing 'type'");
  }
  const std::string t = type->get<std::string>();
  if (t == "hello") {
    const auto role = j.find("role");
    if (role == j.end() || !role->is_string() ||
        (*role != "operator" && *role != "observer")) {
      throw ProtocolError("malformed", "malformed message: role must be 'operator' or 'observer'");
    }
    return HelloMessage{role->get<std::string>()};
  }
  if (t == "set_goal") {
    const auto x = j.find("x");
    const auto y = j.find("y");
    if (x == j.end() || y == j.end() || !x->is_number() || !y->is_number()) {
      throw ProtocolError("malformed", "malformed message: set_goal needs numeric x and y");
    }
    return SetGoalMessage{x->get<double>(), y->get<double>()};
  }
  if (t == "reset") {
    return ResetMessage{};
  }
  if (t == "pause") {
    return PauseMessage{};
  }
  if (t == "resume") {
    return ResumeMessage{};
  }
  throw ProtocolError("unknown_type", "unknown message type '" + t + "'");
}

}  // namespace rhinonav
