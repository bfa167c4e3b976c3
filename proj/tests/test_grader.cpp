// Copyright 2026 The musclerun Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <future>

#include "test_support.hpp"

namespace musclerun {
namespace {

using nlohmann::json;
using namespace std::chrono_literals;

const auto kNoon = std::chrono::system_clock::time_point(std::chrono::milliseconds(1800000000000LL));

EvaluationSpec small_spec() { return {"small", {11, 12}, 2, 3}; }

PolicyFactory gentle() { return stateless(constant_policy(0.05)); }

class GraderTest : public ::testing::Test {
 protected:
  void SetUp() override {
    board_ = testing::temp_path("board.jsonl");
    std::filesystem::remove(board_);
  }

  ServerConfig config(EvaluationSpec spec = small_spec()) {
    ServerConfig c;
    c.bind = net::parse_endpoint("127.0.0.1:0");
    c.spec = std::move(spec);
    c.leaderboard_path = board_;
    c.clock = [this] { return now_; };
    return c;
  }

  static net::Endpoint endpoint(const GraderServer& s) { return {"127.0.0.1", s.port()}; }

  std::string board_;
  std::chrono::system_clock::time_point now_ = kNoon;
};

// A hand-driven session for exercising protocol errors.
class RawSession {
 public:
  explicit RawSession(const net::Endpoint& ep) : sock_(net::connect_to(ep)) {}

  void send(json msg) {
    msg["seq"] = ++seq_;
    sock_.send_line(msg.dump());
  }
  void send_raw(const std::string& line) { sock_.send_line(line); }

  json receive(std::chrono::milliseconds timeout = 10s) {
    std::string line;
    if (sock_.read_line(line, timeout) != net::Socket::ReadStatus::line) return json();
    return json::parse(line);
  }

  void hello(const std::string& token = "alice") {
    send({{"kind", "hello"}, {"token", token}, {"version", kProtocolVersion}});
  }

 private:
  net::Socket sock_;
  std::int64_t seq_ = 0;
};

std::string error_code(const json& msg) {
  return msg.is_object() && msg.value("kind", "") == "error" ? msg.value("code", "") : "";
}

TEST(EvaluationSpecs, Presets) {
  const auto open = open_stage_spec();
  EXPECT_EQ(open.name, "open-stage");
  EXPECT_EQ(open.seeds.size(), 3u);
  EXPECT_EQ(open.difficulty, 2);
  EXPECT_EQ(playoff_spec().seeds.size(), 10u);
  EXPECT_EQ(load_evaluation_spec("open-stage"), open);
  EXPECT_THROW(load_evaluation_spec("no-such-spec"), Error);
}

TEST(EvaluationSpecs, JsonRoundTripAndValidation) {
  const auto s = small_spec();
  EXPECT_EQ(evaluation_spec_from_json(to_json(s)), s);
  auto j = to_json(s);
  j["seeds"] = json::array();
  EXPECT_THROW(evaluation_spec_from_json(j), Error);
  j = to_json(s);
  j["difficulty"] = 4;
  EXPECT_THROW(evaluation_spec_from_json(j), Error);
}

TEST(Wire, NonFiniteValuesTravelAsNull) {
  const std::vector<double> v{1.5, std::nan(""), -std::numeric_limits<double>::infinity(), 0.1};
  const auto j = wire::encode_values(v);
  EXPECT_TRUE(j[1].is_null());
  EXPECT_TRUE(j[2].is_null());
  const auto back = wire::decode_values(json::parse(j.dump()));
  ASSERT_TRUE(back);
  EXPECT_EQ((*back)[0], 1.5);
  EXPECT_TRUE(std::isnan((*back)[1]));
  EXPECT_EQ((*back)[3], 0.1);
  EXPECT_FALSE(wire::decode_values(json::parse(R"([1, "x"])")));
  EXPECT_FALSE(wire::decode_values(json::parse("{}")));
}

TEST(Wire, DoublesRoundTripExactly) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::vector<double> v(1000);
  for (auto& x : v) x = n01(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
  EXPECT_EQ(*wire::decode_values(json::parse(wire::encode_values(v).dump())), v);
}

TEST(Budget, PerTokenPerDay) {
  SubmissionBudget b(2);
  EXPECT_TRUE(b.try_consume("a", 10));
  EXPECT_TRUE(b.try_consume("a", 10));
  EXPECT_FALSE(b.try_consume("a", 10));
  EXPECT_TRUE(b.try_consume("b", 10));
  EXPECT_TRUE(b.try_consume("a", 11));
  EXPECT_EQ(b.used("a", 10), 2);
}

TEST(Time, UtcDayAndTimestamp) {
  EXPECT_EQ(iso_timestamp(kNoon), "2027-01-15T08:00:00.000Z");
  EXPECT_EQ(utc_day(kNoon), 20833);
  EXPECT_EQ(utc_day(kNoon + 16h), 20834);
}

TEST(Leaderboard, EntryLineRoundTrip) {
  LeaderboardEntry e{"alice", iso_timestamp(kNoon), unix_millis(kNoon), {1.25, -0.5}, 0.375, kProtocolVersion, "small"};
  EXPECT_EQ(entry_from_line(to_line(e)), e);
  EXPECT_THROW(entry_from_line("{}"), std::exception);
}

TEST_F(GraderTest, LeaderboardReportOrdersBestPerToken) {
  LeaderboardWriter w(board_);
  auto entry = [&](const std::string& token, double score, std::int64_t ms) {
    w.append({token, iso_timestamp(kNoon), ms, {score}, score, kProtocolVersion, "small"});
  };
  entry("a", 10, 1);
  entry("b", 20, 2);
  entry("c", 15, 3);
  entry("a", 12, 4);
  entry("d", 20, 1);
  { std::ofstream(board_, std::ios::app) << "{not json\n"; }
  entry("c", 14, 5);
  std::vector<std::string> warnings;
  const auto report = leaderboard_report(board_, 10, &warnings);
  ASSERT_EQ(report.size(), 4u);
  EXPECT_EQ(report[0].token, "d");  // ties go to the earlier submission
  EXPECT_EQ(report[1].token, "b");
  EXPECT_EQ(report[2].token, "c");
  EXPECT_EQ(report[2].score, 15);
  EXPECT_EQ(report[3].token, "a");
  EXPECT_EQ(report[3].score, 12);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_EQ(leaderboard_report(board_, 2).size(), 2u);
}

TEST_F(GraderTest, MissingLeaderboardIsEmpty) {
  EXPECT_TRUE(leaderboard_report(board_, 10).empty());
}

TEST_F(GraderTest, RemoteEqualsLocal) {
  GraderServer server(config(open_stage_spec()));
  server.start();
  const auto factory = scripted_policy(std::vector<Action>(30, Action(kActionSize, 0.3)));
  const auto remote = client_run(endpoint(server), "alice", factory);
  const auto local = evaluate_local(factory, open_stage_spec());
  ASSERT_EQ(remote.rewards.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(remote.rewards[i], local.rewards[i], 1e-9);
  EXPECT_NEAR(remote.score, local.score, 1e-9);
  const auto board = read_leaderboard(board_);
  ASSERT_EQ(board.size(), 1u);
  EXPECT_EQ(board[0].token, "alice");
  EXPECT_EQ(board[0].rewards, remote.rewards);
  EXPECT_EQ(board[0].unix_ms, unix_millis(kNoon));
  EXPECT_EQ(board[0].spec, "open-stage");
}

TEST_F(GraderTest, OneSeedScoreIsItsReward) {
  GraderServer server(config({"one", {5}, 1, 3}));
  server.start();
  const auto r = client_run(endpoint(server), "alice", gentle());
  ASSERT_EQ(r.rewards.size(), 1u);
  EXPECT_EQ(r.score, r.rewards[0]);
}

TEST_F(GraderTest, DailyBudgetEnforcedAndPersisted) {
  {
    GraderServer server(config({"one", {5}, 1, 3}));
    server.start();
    for (int i = 0; i < 5; ++i) EXPECT_NO_THROW(client_run(endpoint(server), "alice", gentle()));
    try {
      client_run(endpoint(server), "alice", gentle());
      FAIL() << "sixth evaluation accepted";
    } catch (const GraderError& e) {
      EXPECT_EQ(e.code(), "budget_exhausted");
    }
    EXPECT_NO_THROW(client_run(endpoint(server), "bob", gentle()));
  }
  GraderServer restarted(config({"one", {5}, 1, 3}));
  restarted.start();
  EXPECT_THROW(client_run(endpoint(restarted), "alice", gentle()), GraderError);
  now_ += 24h;
  EXPECT_NO_THROW(client_run(endpoint(restarted), "alice", gentle()));
}

TEST_F(GraderTest, ConcurrentSessionsAreIsolated) {
  GraderServer server(config());
  server.start();
  const auto a = scripted_policy(std::vector<Action>(40, Action(kActionSize, 0.3)));
  const auto b = gentle();
  const auto serial_a = evaluate_local(a, small_spec());
  const auto serial_b = evaluate_local(b, small_spec());
  for (int round = 0; round < 2; ++round) {
    auto fa = std::async(std::launch::async, [&] { return client_run(endpoint(server), "a", a); });
    auto fb = std::async(std::launch::async, [&] { return client_run(endpoint(server), "b", b); });
    EXPECT_EQ(fa.get().rewards, serial_a.rewards);
    EXPECT_EQ(fb.get().rewards, serial_b.rewards);
  }
}

TEST_F(GraderTest, UnknownTokenRejectedBeforeAnyEpisode) {
  auto c = config();
  c.tokens = {"alice"};
  GraderServer server(c);
  server.start();
  try {
    client_run(endpoint(server), "mallory", gentle());
    FAIL();
  } catch (const GraderError& e) {
    EXPECT_EQ(e.code(), "auth_error");
  }
  RawSession s(endpoint(server));
  s.hello("");
  EXPECT_EQ(error_code(s.receive()), "auth_error");
  EXPECT_TRUE(read_leaderboard(board_).empty());
  EXPECT_NO_THROW(client_run(endpoint(server), "alice", gentle()));
}

TEST_F(GraderTest, VersionMismatch) {
  GraderServer server(config());
  server.start();
  RawSession s(endpoint(server));
  s.send({{"kind", "hello"}, {"token", "alice"}, {"version", "musclerun-grader/0"}});
  EXPECT_EQ(error_code(s.receive()), "version_mismatch");
}

TEST_F(GraderTest, MalformedMessage) {
  GraderServer server(config());
  server.start();
  RawSession s(endpoint(server));
  s.send_raw("this is not json");
  const auto err = s.receive();
  EXPECT_EQ(error_code(err), "protocol_error");
  EXPECT_EQ(err["offending_seq"], 1);
}

TEST_F(GraderTest, OutOfOrderMessages) {
  GraderServer server(config());
  server.start();
  RawSession s(endpoint(server));
  s.send({{"kind", "reset"}});
  EXPECT_EQ(error_code(s.receive()), "protocol_error");
}

TEST_F(GraderTest, WrongActionLengthIsProtocolError) {
  GraderServer server(config());
  server.start();
  RawSession s(endpoint(server));
  s.hello();
  EXPECT_EQ(s.receive()["kind"], "hello");
  s.send({{"kind", "reset"}});
  const auto obs = s.receive();
  EXPECT_EQ(obs["observation"].size(), 41u);
  s.send({{"kind", "action"}, {"action", std::vector<double>(17, 0.0)}});
  const auto err = s.receive();
  EXPECT_EQ(error_code(err), "protocol_error");
  EXPECT_EQ(err["offending_seq"], 3);
}

TEST_F(GraderTest, HelloAnnouncesContract) {
  GraderServer server(config());
  server.start();
  RawSession s(endpoint(server));
  s.hello();
  const auto h = s.receive();
  EXPECT_EQ(h["version"], kProtocolVersion);
  EXPECT_EQ(h["episodes"], 2);
  EXPECT_EQ(h["difficulty"], 2);
  ASSERT_EQ(h["observation_layout"].size(), 41u);
  EXPECT_EQ(h["observation_layout"][38], "obstacle_distance");
}

TEST_F(GraderTest, NonFiniteActionEndsEpisodeAsDiverged) {
  GraderServer server(config());
  server.start();
  RawSession s(endpoint(server));
  s.hello();
  s.receive();
  s.send({{"kind", "reset"}});
  s.receive();
  std::vector<double> a(kActionSize, 0.1);
  a[2] = std::nan("");
  s.send({{"kind", "action"}, {"action", wire::encode_values(a)}});
  const auto step = s.receive();
  EXPECT_EQ(step["kind"], "step_result");
  EXPECT_EQ(step["done"], true);
  const auto done = s.receive();
  EXPECT_EQ(done["kind"], "episode_done");
  EXPECT_EQ(done["termination"], "diverged");
  EXPECT_EQ(done["steps"], 1);
}

TEST_F(GraderTest, IdleSessionTimesOut) {
  auto c = config();
  c.idle_timeout = 300ms;
  GraderServer server(c);
  server.start();
  RawSession s(endpoint(server));
  s.hello();
  s.receive();
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_EQ(error_code(s.receive(5s)), "timeout");
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 3s);
}

}  // namespace
}  // namespace musclerun
