#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rhinonav/orchestrator/headless.hpp"
#include "rhinonav/orchestrator/session.hpp"
#include "test_support.hpp"

namespace rhinonav {
namespace {

const std::filesystem::path kData = RHINONAV_DATA;
const std::filesystem::path kFixtures = RHINONAV_FIXTURES;

SimConfig test_config() {
  SimConfig cfg = load_config_file(kData / "config/test10.conf");
  cfg.record_timing = false;
  return cfg;
}

// Compares against a checked-in file; RHINONAV_UPDATE_GOLDEN=1 rewrites it.
void expect_golden(const std::string& name, const std::string& actual) {
  const auto path = kFixtures / name;
  if (std::getenv("RHINONAV_UPDATE_GOLDEN")) {
    std::ofstream(path) << actual << "\n";
  }
  ASSERT_TRUE(std::filesystem::exists(path)) << path;
  std::string expected = read_text_file(path);
  while (!expected.empty() && expected.back() == '\n') {
    expected.pop_back();
  }
  EXPECT_EQ(actual, expected) << "golden mismatch: " << name;
}

// --- config -----------------------------------------------------------------

TEST(Config, ParsesKeysAndComments) {
  const SimConfig c = parse_config(
      "# comment\nmap = m.map\nstart = 1 2 0.5\nscan.beam_count = 90  # trailing\n"
      "sensor.beam_stride = 3\nreset_belief_on_goal = true\nseed = 42\n",
      "/base");
  EXPECT_EQ(c.map_path, std::filesystem::path("/base/m.map"));
  EXPECT_EQ(c.start, Pose(1, 2, 0.5));
  EXPECT_EQ(c.scan.beam_count, 90);
  EXPECT_EQ(c.sensor.beam_stride, 3);
  EXPECT_TRUE(c.reset_belief_on_goal);
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, UnknownKeyIsRejected) {
  try {
    parse_config("map = x\nscan.beams = 3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown config key 'scan.beams'"), std::string::npos);
  }
}

TEST(Config, ControlPeriodMustMatchTickRate) {
  EXPECT_THROW(parse_config("tick_rate = 5\n"), Error);
  EXPECT_NO_THROW(parse_config("tick_rate = 5\ndwa.dt = 0.2\n"));
}

TEST(Config, FormatRoundTrips) {
  const SimConfig a = load_config_file(kData / "config/default.conf");
  const SimConfig b = parse_config(format_config(a));
  EXPECT_EQ(format_config(a), format_config(b));
}

TEST(Config, Scenario) {
  const Scenario s = parse_scenario("start = 1 1 0\ngoal = 2 3\ngoal = 4 5\n");
  ASSERT_TRUE(s.start);
  ASSERT_EQ(s.goals.size(), 2u);
  EXPECT_EQ(s.goals[1], Point2(4, 5));
  EXPECT_THROW(parse_scenario("goal = 1\n"), ParseError);
}

TEST(Data, TestMapIsUpsampledFixture) {
  const GridMap m = load_map_file(kData / "maps/test10.map");
  EXPECT_EQ(format_map(m), format_map(testing::fine_asymmetric_map()));
}

// --- state machine -----------------------------------------------------------

TEST(StateMachine, Transitions) {
  using S = ExhibitState;
  EXPECT_TRUE(is_valid_transition(S::idle, S::goal_received));
  EXPECT_TRUE(is_valid_transition(S::goal_received, S::localizing));
  EXPECT_TRUE(is_valid_transition(S::localizing, S::planning));
  EXPECT_TRUE(is_valid_transition(S::planning, S::navigating));
  EXPECT_TRUE(is_valid_transition(S::navigating, S::arrived));
  EXPECT_TRUE(is_valid_transition(S::navigating, S::planning));
  EXPECT_TRUE(is_valid_transition(S::navigating, S::goal_received));
  EXPECT_TRUE(is_valid_transition(S::arrived, S::goal_received));
  for (S s : {S::goal_received, S::localizing, S::planning, S::navigating, S::arrived}) {
    EXPECT_TRUE(is_valid_transition(s, S::idle));
  }
  EXPECT_FALSE(is_valid_transition(S::idle, S::navigating));
  EXPECT_FALSE(is_valid_transition(S::localizing, S::navigating));
  EXPECT_FALSE(is_valid_transition(S::arrived, S::navigating));
}

TEST(StateMachine, Snippets) {
  using S = ExhibitState;
  EXPECT_EQ(snippet_for(S::idle), SnippetId::a);
  EXPECT_EQ(snippet_for(S::goal_received), SnippetId::b);
  EXPECT_EQ(snippet_for(S::arrived), SnippetId::b);
  EXPECT_EQ(snippet_for(S::localizing), SnippetId::c);
  EXPECT_EQ(snippet_for(S::planning), SnippetId::d);
  EXPECT_EQ(snippet_for(S::navigating, 0.0), SnippetId::d);
  EXPECT_EQ(snippet_for(S::navigating, 10.0), SnippetId::e);
  EXPECT_EQ(snippet_for(S::navigating, 25.0), SnippetId::f);
  EXPECT_EQ(snippet_for(S::navigating, 30.0), SnippetId::d);
}

// --- simulation ---------------------------------------------------------------

TEST(Simulation, GoalValidation) {
  Simulation sim = Simulation::from_config(test_config());
  const GoalResult wall = sim.set_goal({3.0, 7.5});
  ASSERT_FALSE(accepted(wall));
  EXPECT_EQ(std::get<GoalRejected>(wall).reason, "inside obstacle");
  const GoalResult outside = sim.set_goal({-1.0, 5.0});
  ASSERT_FALSE(accepted(outside));
  EXPECT_EQ(std::get<GoalRejected>(outside).reason, "out of bounds");
  EXPECT_EQ(sim.state(), ExhibitState::idle);
  EXPECT_TRUE(accepted(sim.set_goal({8.5, 8.5})));
  EXPECT_EQ(sim.state(), ExhibitState::goal_received);
}

TEST(Simulation, IdleRobotStaysPut) {
  Simulation sim = Simulation::from_config(test_config());
  const Pose start = sim.true_pose();
  for (int i = 0; i < 5; ++i) {
    const Snapshot s = sim.step();
    EXPECT_EQ(s.state, ExhibitState::idle);
    EXPECT_EQ(s.snippet, SnippetId::a);
    EXPECT_EQ(s.command, VelocityCommand{});
  }
  EXPECT_EQ(sim.true_pose(), start);
}

TEST(Simulation, GoalSequenceAndPreemption) {
  Simulation sim = Simulation::from_config(test_config());
  ASSERT_TRUE(accepted(sim.set_goal({8.5, 8.5})));
  std::vector<ExhibitState> seen = {sim.state()};
  for (int i = 0; i < 60 && sim.state() != ExhibitState::navigating; ++i) {
    const ExhibitState s = sim.step().state;
    if (s != seen.back()) {
      seen.push_back(s);
    }
  }
  const std::vector<ExhibitState> expected = {ExhibitState::goal_received,
                                              ExhibitState::localizing, ExhibitState::planning,
                                              ExhibitState::navigating};
  EXPECT_EQ(seen, expected);
  ASSERT_FALSE(sim.path().waypoints.empty());
  EXPECT_TRUE(accepted(sim.set_goal({1.5, 5.5})));
  EXPECT_EQ(sim.state(), ExhibitState::goal_received);
  EXPECT_TRUE(sim.path().waypoints.empty());
  sim.reset();
  EXPECT_EQ(sim.state(), ExhibitState::idle);
  EXPECT_FALSE(sim.goal());
}

TEST(Simulation, MarginalMatchesBelief) {
  Simulation sim = Simulation::from_config(test_config());
  const Snapshot s = sim.step();
  EXPECT_EQ(s.marginal.size(), s.belief_shape.nx * s.belief_shape.ny);
  double sum = 0.0;
  for (double v : s.marginal) {
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_EQ(s.scan_endpoints.size(), static_cast<std::size_t>(sim.config().scan.beam_count));
}

TEST(Simulation, Deterministic) {
  auto run = [] {
    std::ostringstream csv, log, snaps;
    run_headless(test_config(), load_scenario_file(kData / "scenarios/test10_two_goals.scn"),
                 80, csv, log, &snaps);
    return csv.str() + snaps.str();
  };
  EXPECT_EQ(run(), run());
}

// --- headless -----------------------------------------------------------------

TEST(Headless, ZeroTicksWritesHeaderOnly) {
  std::ostringstream csv, log;
  const HeadlessResult r = run_headless(test_config(), {}, 0, csv, log);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_EQ(csv.str(), std::string(kMetricsHeader) + "\n");
}

TEST(Headless, InvalidGoalAbortsBeforeRunning) {
  std::ostringstream csv, log;
  const HeadlessResult r = run_headless(
      test_config(), load_scenario_file(kData / "scenarios/test10_blocked_goal.scn"), 100, csv, log);
  EXPECT_EQ(r.exit_code, kExitInvalidGoal);
  EXPECT_EQ(r.ticks, 0u);
  EXPECT_NE(log.str().find("inside obstacle"), std::string::npos);
}

TEST(Headless, TimeoutIsNonzero) {
  std::ostringstream csv, log;
  const HeadlessResult r = run_headless(
      test_config(), load_scenario_file(kData / "scenarios/test10_two_goals.scn"), 5, csv, log);
  EXPECT_EQ(r.exit_code, kExitTimeout);
  std::size_t lines = 0;
  for (char c : csv.str()) {
    lines += c == '\n';
  }
  EXPECT_EQ(lines, 6u);
}

TEST(Headless, ReachesAllGoalsOnTestMap) {
  std::ostringstream csv, log;
  const HeadlessResult r = run_headless(
      test_config(), load_scenario_file(kData / "scenarios/test10_two_goals.scn"), 1500, csv, log);
  EXPECT_EQ(r.exit_code, kExitOk) << log.str();
  EXPECT_EQ(r.goals_reached, 2u);
  EXPECT_LT(r.final_err_xy, 0.3);
}

// --- protocol -----------------------------------------------------------------

TEST(Protocol, CellRunLength) {
  GridMap m(4, 2, 0.5, {1.0, 2.0});
  m.set(1, 0, CellState::occupied);
  m.set(2, 0, CellState::occupied);
  m.set(3, 1, CellState::unknown);
  EXPECT_EQ(encode_cells(m), "1.2#4.1?");
  const auto cells = decode_cells(encode_cells(m), m.size());
  EXPECT_TRUE(std::equal(cells.begin(), cells.end(), m.cells().begin()));
  EXPECT_THROW(decode_cells("3.", 4), Error);
  EXPECT_THROW(decode_cells("5.", 4), Error);
  EXPECT_THROW(decode_cells("2x2.", 4), Error);
}

TEST(Protocol, CellRunLengthRoundTripOnMuseum) {
  const GridMap m = load_map_file(kData / "maps/museum.map");
  const auto cells = decode_cells(encode_cells(m), m.size());
  EXPECT_TRUE(std::equal(cells.begin(), cells.end(), m.cells().begin()));
}

TEST(Protocol, Base64) {
  EXPECT_EQ(base64_encode({}), "");
  EXPECT_EQ(base64_encode({'f'}), "Zg==");
  EXPECT_EQ(base64_encode({'f', 'o'}), "Zm8=");
  EXPECT_EQ(base64_encode({'f', 'o', 'o'}), "Zm9v");
  std::mt19937_64 rng(3);
  for (std::size_t n = 0; n < 40; ++n) {
    std::vector<std::uint8_t> bytes(n);
    for (auto& b : bytes) {
      b = static_cast<std::uint8_t>(rng());
    }
    EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
  }
  EXPECT_THROW(base64_decode("abc"), Error);
}

TEST(Protocol, Float32LittleEndian) {
  const auto bytes = float32_le_bytes({1.0, -2.0, 0.25});
  const std::vector<std::uint8_t> expected = {0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0,
                                              0x00, 0x00, 0x80, 0x3e};
  EXPECT_EQ(bytes, expected);
  EXPECT_EQ(base64_encode(float32_le_bytes({1.0})), "AACAPw==");
  EXPECT_EQ(float32_le_values(bytes), (std::vector<float>{1.0f, -2.0f, 0.25f}));
}

TEST(Protocol, ClientMessages) {
  EXPECT_EQ(std::get<HelloMessage>(parse_client_message(R"({"type":"hello","role":"observer"})")).role,
            "observer");
  const auto g = std::get<SetGoalMessage>(parse_client_message(R"({"type":"set_goal","x":1.5,"y":2})"));
  EXPECT_EQ(g.x, 1.5);
  EXPECT_EQ(g.y, 2.0);
  EXPECT_TRUE(std::holds_alternative<PauseMessage>(parse_client_message(R"({"type":"pause"})")));
  auto code_of = [](std::string_view text) {
    try {
      parse_client_message(text);
    } catch (const ProtocolError& e) {
      return e.code();
    }
    return std::string("ok");
  };
  EXPECT_EQ(code_of("not json"), "malformed");
  EXPECT_EQ(code_of("[1]"), "malformed");
  EXPECT_EQ(code_of(R"({"type":"set_goal","x":"1","y":2})"), "malformed");
  EXPECT_EQ(code_of(R"({"type":"hello","role":"admin"})"), "malformed");
  EXPECT_EQ(code_of(R"({"type":"teleport"})"), "unknown_type");
}

TEST(Protocol, SnapshotFields) {
  Simulation sim = Simulation::from_config(test_config());
  sim.set_goal({8.5, 8.5});
  const Snapshot s = sim.step();
  const Json j = Json::parse(snapshot_message(s, false));
  for (const char* key : {"type", "tick", "time", "state", "snippet", "estimate", "command",
                          "goal", "path", "scan", "belief", "dwa", "timing", "warnings"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_FALSE(j.contains("true_pose"));
  EXPECT_TRUE(Json::parse(snapshot_message(s, true)).contains("true_pose"));
  const auto marginal = float32_le_values(base64_decode(j["belief"]["marginal"].get<std::string>()));
  ASSERT_EQ(marginal.size(), s.marginal.size());
  for (std::size_t i = 0; i < marginal.size(); ++i) {
    EXPECT_EQ(marginal[i], static_cast<float>(s.marginal[i]));
  }
}

TEST(Golden, Welcome) {
  expect_golden("welcome.json", welcome_message("operator", testing::asymmetric_test_map()));
}

TEST(Golden, Error) {
  expect_golden("error.json", error_message("goal_rejected", "inside obstacle"));
}

TEST(Golden, Snapshot) {
  Simulation sim = Simulation::from_config(test_config());
  sim.set_goal({8.5, 8.5});
  Snapshot s;
  for (int i = 0; i < 3; ++i) {
    s = sim.step();
  }
  expect_golden("snapshot.json", snapshot_message(s, true));
}

// --- sessions -----

TEST(Outbox, DropsOldestQueuedMessage) {
  Outbox box(3);
  EXPECT_FALSE(box.push("1"));
  EXPECT_EQ(box.begin_write(), "1");
  box.push("2");
  box.push("3");
  EXPECT_TRUE(box.push("4"));  // "2" goes; "1" is on the wire
  EXPECT_EQ(box.size(), 3u);
  box.finish_write();
  EXPECT_EQ(box.begin_write(), "3");
  box.finish_write();
  EXPECT_EQ(box.begin_write(), "4");
  box.finish_write();
  EXPECT_TRUE(box.empty());
}

std::string type_of(const std::string& text) { return Json::parse(text)["type"]; }
std::string code_of(const std::string& text) { return Json::parse(text)["code"]; }

TEST(Session, OperatorIsExclusive) {
  SessionHub hub(testing::asymmetric_test_map());
  const ClientId a = hub.connect();
  const ClientId b = hub.connect();
  auto ra = hub.handle(a, R"({"type":"hello","role":"operator"})");
  ASSERT_EQ(ra.size(), 1u);
  EXPECT_EQ(type_of(ra[0].text), "welcome");
  EXPECT_EQ(Json::parse(ra[0].text)["role"], "operator");
  auto rb = hub.handle(b, R"({"type":"hello","role":"operator"})");
  ASSERT_EQ(rb.size(), 1u);
  EXPECT_EQ(code_of(rb[0].text), "operator_taken");
  EXPECT_FALSE(hub.role_of(b).has_value());
  hub.disconnect(a);
  rb = hub.handle(b, R"({"type":"hello","role":"operator"})");
  EXPECT_EQ(type_of(rb[0].text), "welcome");
  EXPECT_EQ(hub.operator_client(), b);
}

TEST(Session, ObserversCannotCommand) {
  SessionHub hub(testing::asymmetric_test_map());
  const ClientId o = hub.connect();
  const ClientId p = hub.connect();
  EXPECT_EQ(code_of(hub.handle(o, R"({"type":"pause"})")[0].text), "no_role");
  hub.handle(o, R"({"type":"hello","role":"observer"})");
  EXPECT_EQ(code_of(hub.handle(o, R"({"type":"set_goal","x":1,"y":1})")[0].text), "observer_role");
  hub.handle(p, R"({"type":"hello","role":"operator"})");
  EXPECT_TRUE(hub.handle(p, R"({"type":"set_goal","x":1,"y":1})").empty());
  const auto pending = hub.drain();
  ASSERT_EQ(pending.size(), 1u);
  EXPECT_EQ(pending[0].from, p);
  EXPECT_TRUE(hub.drain().empty());
  EXPECT_EQ(hub.subscribers().size(), 2u);
  EXPECT_EQ(code_of(hub.handle(p, "{")[0].text), "malformed");
}

TEST(Session, ApplyCommand) {
  Simulation sim = Simulation::from_config(test_config());
  bool paused = false;
  auto reply = apply_command(sim, paused, {1, SetGoalMessage{3.0, 7.5}});
  ASSERT_TRUE(reply);
  EXPECT_EQ(code_of(reply->text), "goal_rejected");
  EXPECT_FALSE(apply_command(sim, paused, {1, SetGoalMessage{8.5, 8.5}}));
  EXPECT_EQ(sim.state(), ExhibitState::goal_received);
  apply_command(sim, paused, {1, PauseMessage{}});
  EXPECT_TRUE(paused);
  apply_command(sim, paused, {1, ResumeMessage{}});
  EXPECT_FALSE(paused);
  apply_command(sim, paused, {1, ResetMessage{}});
  EXPECT_EQ(sim.state(), ExhibitState::idle);
}

}  // namespace
}  // namespace rhinonav
