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

#pragma once

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "musclerun/episode.hpp"
#include "musclerun/environment.hpp"
#include "musclerun/socket.hpp"

namespace musclerun {

inline constexpr const char* kProtocolVersion = "musclerun-grader/1";

// ---------------------------------------------------------------------------
// Evaluation specs

struct EvaluationSpec {
  std::string name;
  std::vector<std::uint64_t> seeds;
  int difficulty = 2;
  int max_obstacles = 3;

  bool operator==(const EvaluationSpec&) const = default;
};

inline EvaluationSpec open_stage_spec() {
  return {"open-stage", {20170614, 3141592653589793, 7289164520947}, 2, 3};
}

inline EvaluationSpec playoff_spec() {
  return {"playoff",
          {1106, 58213, 917364, 44021987, 600613, 2718281828, 9007199254740993, 3735928559,
           123456789123, 5555555},
          2, 10};
}

inline void validate(const EvaluationSpec& spec) {
  if (spec.seeds.empty()) throw Error("evaluation spec '" + spec.name + "' has no seeds");
  for (auto s : spec.seeds) validate(EpisodeConfig{s, spec.difficulty, spec.max_obstacles});
}

inline nlohmann::json to_json(const EvaluationSpec& s) {
  return {{"name", s.name}, {"seeds", s.seeds}, {"difficulty", s.difficulty},
          {"max_obstacles", s.max_obstacles}, {"aggregation", "mean"}};
}

inline EvaluationSpec evaluation_spec_from_json(const nlohmann::json& j) {
  EvaluationSpec s;
  try {
    s.name = j.at("name").get<std::string>();
    s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    s.difficulty = j.at("difficulty").get<int>();
    s.max_obstacles = j.at("max_obstacles").get<int>();
    if (j.contains("aggregation") && j.at("aggregation") != "mean") {
      throw Error("only 'mean' aggregation is supported");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("evaluation spec: ") + e.what());
  }
  validate(s);
  return s;
}

// A shipped spec name ("open-stage", "playoff") or a path to a spec file.
inline EvaluationSpec load_evaluation_spec(const std::string& name_or_path) {
  if (name_or_path == "open-stage") return open_stage_spec();
  if (name_or_path == "playoff") return playoff_spec();
  std::ifstream in(name_or_path);
  if (!in) throw Error("unknown evaluation spec '" + name_or_path + "'");
  try {
    return evaluation_spec_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("evaluation spec '" + name_or_path + "': " + e.what());
  }
}

struct EvaluationResult {
  std::vector<double> rewards;  // per seed, in spec order
  double score = 0.0;           // mean of rewards
};

inline double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Offline grading: same engine and seeds as the server. A policy emitting a
// non-finite excitation ends that episode as diverged.
inline EvaluationResult evaluate_local(const PolicyFactory& make_policy, const EvaluationSpec& spec,
                                       const ModelDefinition& model = default_model()) {
  validate(spec);
  Environment env(model);
  EvaluationResult out;
  for (auto seed : spec.seeds) {
    const auto r = run_episode(env, {seed, spec.difficulty, spec.max_obstacles}, make_policy());
    out.rewards.push_back(r.reward);
  }
  out.score = mean(out.rewards);
  return out;
}

// ---------------------------------------------------------------------------
// Leaderboard

using Clock = std::function<std::chrono::system_clock::time_point()>;

inline std::int64_t unix_millis(std::chrono::system_clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

inline std::int64_t utc_day(std::chrono::system_clock::time_point t) {
  return std::chrono::floor<std::chrono::days>(t).time_since_epoch().count();
}

inline std::string iso_timestamp(std::chrono::system_clock::time_point t) {
  const std::int64_t ms = unix_millis(t);
  const std::time_t secs = static_cast<std::time_t>(ms >= 0 ? ms / 1000 : (ms - 999) / 1000);
  std::tm tm{};
  ::gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(((ms % 1000) + 1000) % 1000));
  return buf;
}

struct LeaderboardEntry {
  std::string token;
  std::string timestamp;     // ISO-8601 UTC
  std::int64_t unix_ms = 0;
  std::vector<double> rewards;
  double score = 0.0;
  std::string protocol = kProtocolVersion;
  std::string spec;

  bool operator==(const LeaderboardEntry&) const = default;
};

inline std::string to_line(const LeaderboardEntry& e) {
  nlohmann::json j = {{"token", e.token},   {"timestamp", e.timestamp}, {"unix_ms", e.unix_ms},
                      {"rewards", e.rewards}, {"score", e.score},       {"protocol", e.protocol},
                      {"spec", e.spec}};
  return j.dump();
}

inline LeaderboardEntry entry_from_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  LeaderboardEntry e;
  e.token = j.at("token").get<std::string>();
  e.timestamp = j.at("timestamp").get<std::string>();
  e.unix_ms = j.at("unix_ms").get<std::int64_t>();
  e.rewards = j.at("rewards").get<std::vector<double>>();
  e.score = j.at("score").get<double>();
  e.protocol = j.at("protocol").get<std::string>();
  e.spec = j.value("spec", "");
  if (e.rewards.empty()) throw Error("entry has no rewards");
  return e;
}

// Corrupt lines are skipped and described in `warnings`.
inline std::vector<LeaderboardEntry> read_leaderboard(const std::string& path,
                                                      std::vector<std::string>* warnings = nullptr) {
  std::vector<LeaderboardEntry> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(entry_from_line(line));
    } catch (const std::exception& e) {
      if (warnings) {
        warnings->push_back("line " + std::to_string(line_no) + " skipped: " + e.what());
      }
    }
  }
  return out;
}

// Best entry per token, by score descending; ties go to the earlier entry.
inline std::vector<LeaderboardEntry> leaderboard_report(const std::string& path, std::size_t top_n,
                                                        std::vector<std::string>* warnings = nullptr) {
  auto better = [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.unix_ms < b.unix_ms;
  };
  std::map<std::string, LeaderboardEntry> best;
  for (auto& e : read_leaderboard(path, warnings)) {
    auto it = best.find(e.token);
    if (it == best.end()) {
      best.emplace(e.token, std::move(e));
    } else if (better(e, it->second)) {
      it->second = std::move(e);
    }
  }
  std::vector<LeaderboardEntry> out;
  for (auto& [token, e] : best) out.push_back(std::move(e));
  std::sort(out.begin(), out.end(), better);
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

// Appends one self-contained line per call with a single write, then fsyncs.
class LeaderboardWriter {
 public:
  explicit LeaderboardWriter(std::string path) : path_(std::move(path)) {}

  void append(const LeaderboardEntry& e) {
    const std::string line = to_line(e) + "\n";
    std::lock_guard lock(mutex_);
    const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) throw Error("cannot open leaderboard '" + path_ + "'");
    const ssize_t n = ::write(fd, line.data(), line.size());
    ::fsync(fd);
    ::close(fd);
    if (n != static_cast<ssize_t>(line.size())) throw Error("short write to leaderboard");
  }

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  std::mutex mutex_;
};

// Evaluations started per token per UTC day. A started evaluation consumes
// budget even if the client disconnects.
class SubmissionBudget {
 public:
  explicit SubmissionBudget(int per_day) : per_day_(per_day) {}

  bool try_consume(const std::string& token, std::int64_t day) {
    std::lock_guard lock(mutex_);
    int& used = used_[{token, day}];
    if (used >= per_day_) return false;
    ++used;
    return true;
  }

  void record(const std::string& token, std::int64_t day) {
    std::lock_guard lock(mutex_);
    ++used_[{token, day}];
  }

  int used(const std::string& token, std::int64_t day) const {
    std::lock_guard lock(mutex_);
    auto it = used_.find({token, day});
    return it == used_.end() ? 0 : it->second;
  }

 private:
  int per_day_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::int64_t>, int> used_;
};

// ---------------------------------------------------------------------------
// Wire protocol helpers

namespace wire {

using nlohmann::json;

// Non-finite values have no JSON number form; they travel as null.
inline json encode_values(std::span<const double> v) {
  json a = json::array();
  for (double x : v) {
    if (std::isfinite(x)) {
      a.push_back(x);
    } else {
      a.push_back(nullptr);
    }
  }
  return a;
}

inline std::optional<std::vector<double>> decode_values(const json& a) {
  if (!a.is_array()) return std::nullopt;
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& v : a) {
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_null()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      return std::nullopt;
    }
  }
  return out;
}

}  // namespace wire

class GraderError : public Error {
 public:
  GraderError(std::string code, const std::string& message)
      : Error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// ---------------------------------------------------------------------------
// Server

struct ServerConfig {
  net::Endpoint bind;
  EvaluationSpec spec = open_stage_spec();
  int budget = 5;  // evaluations per token per UTC day
  std::string leaderboard_path = "leaderboard.jsonl";
  std::set<std::string> tokens;  // empty: any non-empty token is accepted
  std::chrono::milliseconds idle_timeout{60000};
  Clock clock = [] { return std::chrono::system_clock::now(); };
  ModelDefinition model = default_model();
};

class GraderServer {
 public:
  explicit GraderServer(ServerConfig config)
      : config_(std::move(config)),
        board_(config_.leaderboard_path),
        budget_(config_.budget) {
    validate(config_.spec);
    const auto today = utc_day(config_.clock());
    for (const auto& e : read_leaderboard(config_.leaderboard_path)) {
      if (utc_day(std::chrono::system_clock::time_point(std::chrono::milliseconds(e.unix_ms))) == today) {
        budget_.record(e.token, today);
      }
    }
  }

  GraderServer(const GraderServer&) = delete;
  GraderServer& operator=(const GraderServer&) = delete;
  ~GraderServer() { stop(); }

  void start() {
    listener_ = net::listen_on(config_.bind);
    port_ = net::local_port(listener_);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
  }

  int port() const noexcept { return port_; }
  bool running() const noexcept { return running_; }

  void stop() {
    if (!running_.exchange(false)) return;
    if (acceptor_.joinable()) acceptor_.join();
    std::vector<std::thread> sessions;
    {
      std::lock_guard lock(sessions_mutex_);
      sessions.swap(sessions_);
    }
    for (auto& t : sessions) t.join();
    listener_.close();
  }

  // Blocks until stop() is called from another thread.
  void wait() {
    while (running_) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }

  const ServerConfig& config() const noexcept { return config_; }

 private:
  static constexpr std::chrono::milliseconds kPollSlice{100};

  void accept_loop() {
    while (running_) {
      auto sock = net::accept_for(listener_, kPollSlice);
      if (!sock) continue;
      std::lock_guard lock(sessions_mutex_);
      sessions_.emplace_back([this, s = std::move(*sock)]() mutable { run_session(std::move(s)); });
    }
  }

  enum class Read { ok, closed, timeout, stopped, malformed };

  Read read_message(net::Socket& sock, nlohmann::json& msg) {
    const auto deadline = std::chrono::steady_clock::now() + config_.idle_timeout;
    std::string line;
    while (running_) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return Read::timeout;
      const auto status = sock.read_line(line, std::min(left, kPollSlice));
      if (status == net::Socket::ReadStatus::closed) return Read::closed;
      if (status == net::Socket::ReadStatus::timeout) continue;
      try {
        msg = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error&) {
        return Read::malformed;
      }
      if (!msg.is_object() || !msg.contains("kind") || !msg["kind"].is_string() ||
          !msg.contains("seq") || !msg["seq"].is_number_integer()) {
        return Read::malformed;
      }
      return Read::ok;
    }
    return Read::stopped;
  }

  void run_session(net::Socket sock) {
    std::int64_t out_seq = 0;
    std::int64_t last_in = 0;
    auto send = [&](nlohmann::json msg) {
      msg["seq"] = ++out_seq;
      sock.send_line(msg.dump());
    };
    auto fail = [&](const std::string& code, const std::string& message, std::int64_t offending) {
      nlohmann::json err = {{"kind", "error"}, {"code", code}, {"message", message}};
      err["offending_seq"] = offending;
      try {
        send(std::move(err));
      } catch (const net::NetError&) {
      }
    };
    // Reads the next message and enforces the sequence rule; false ends the session.
    auto next = [&](nlohmann::json& msg) {
      switch (read_message(sock, msg)) {
        case Read::ok: break;
        case Read::timeout: fail("timeout", "idle for more than the session timeout", last_in); return false;
        case Read::malformed: fail("protocol_error", "malformed message", last_in + 1); return false;
        case Read::closed:
        case Read::stopped: return false;
      }
      const std::int64_t seq = msg["seq"].get<std::int64_t>();
      if (seq <= last_in) {
        fail("protocol_error", "sequence number must increase", seq);
        return false;
      }
      last_in = seq;
      return true;
    };
    auto expect = [&](const nlohmann::json& msg, const char* kind) {
      if (msg["kind"] == kind) return true;
      fail("protocol_error",
           "expected '" + std::string(kind) + "', got '" + msg["kind"].get<std::string>() + "'",
           msg["seq"].get<std::int64_t>());
      return false;
    };

    try {
      nlohmann::json msg;
      if (!next(msg) || !expect(msg, "hello")) return;
      if (msg.value("version", "") != kProtocolVersion) {
        fail("version_mismatch", std::string("server speaks ") + kProtocolVersion, last_in);
        return;
      }
      const std::string token = msg.value("token", "");
      if (token.empty() || (!config_.tokens.empty() && !config_.tokens.count(token))) {
        fail("auth_error", "unknown token", last_in);
        return;
      }
      const auto started = config_.clock();
      if (!budget_.try_consume(token, utc_day(started))) {
        fail("budget_exhausted",
             "daily budget of " + std::to_string(config_.budget) + " evaluations used", last_in);
        return;
      }
      const auto& spec = config_.spec;
      nlohmann::json layout = nlohmann::json::array();
      for (auto name : observation_layout()) layout.push_back(std::string(name));
      send({{"kind", "hello"},
            {"version", kProtocolVersion},
            {"spec", spec.name},
            {"episodes", spec.seeds.size()},
            {"difficulty", spec.difficulty},
            {"max_obstacles", spec.max_obstacles},
            {"observation_layout", layout}});

      Environment env(config_.model);
      std::vector<double> rewards;
      for (std::size_t ep = 0; ep < spec.seeds.size(); ++ep) {
        if (!next(msg) || !expect(msg, "reset")) return;
        const auto obs = env.reset({spec.seeds[ep], spec.difficulty, spec.max_obstacles});
        send({{"kind", "observation"}, {"episode", ep}, {"observation", wire::encode_values(obs)}});
        while (env.active()) {
          if (!next(msg) || !expect(msg, "action")) return;
          const auto action = msg.contains("action") ? wire::decode_values(msg["action"]) : std::nullopt;
          if (!action || static_cast<int>(action->size()) != kActionSize) {
            fail("protocol_error", "action must be an array of " + std::to_string(kActionSize) + " numbers",
                 last_in);
            return;
          }
          const auto r = env.step(*action);
          send({{"kind", "step_result"},
                {"observation", wire::encode_values(r.observation)},
                {"reward", r.reward},
                {"done", r.done}});
        }
        const auto& result = env.result();
        rewards.push_back(result.reward);
        send({{"kind", "episode_done"},
              {"episode", ep},
              {"reward", result.reward},
              {"steps", result.steps_taken},
              {"termination", std::string(to_string(result.termination))}});
      }
      LeaderboardEntry entry;
      entry.token = token;
      const auto now = config_.clock();
      entry.timestamp = iso_timestamp(now);
      entry.unix_ms = unix_millis(now);
      entry.rewards = rewards;
      entry.score = mean(rewards);
      entry.spec = spec.name;
      board_.append(entry);
      send({{"kind", "evaluation_done"}, {"rewards", rewards}, {"score", entry.score}});
    } catch (const net::NetError&) {
      // Connection lost: the evaluation is abandoned and its budget stays consumed.
    } catch (const std::exception& e) {
      fail("internal_error", e.what(), last_in);
    }
  }

  ServerConfig config_;
  LeaderboardWriter board_;
  SubmissionBudget budget_;
  net::Socket listener_;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex sessions_mutex_;
  std::vector<std::thread> sessions_;
};

// ---------------------------------------------------------------------------
// Client

// Drives hello / reset / (observation -> action)* / episode_done for every
// seed the server announces. Server errors surface as GraderError.
inline EvaluationResult client_run(const net::Endpoint& server, const std::string& token,
                                   const PolicyFactory& make_policy,
                                   std::chrono::milliseconds timeout = std::chrono::seconds(120)) {
  auto sock = net::connect_to(server);
  std::int64_t seq = 0;
  auto send = [&](nlohmann::json msg) {
    msg["seq"] = ++seq;
    sock.send_line(msg.dump());
  };
  auto receive = [&](const char* kind) {
    std::string line;
    const auto status = sock.read_line(line, timeout);
    if (status == net::Socket::ReadStatus::timeout) throw GraderError("timeout", "no reply from server");
    if (status == net::Socket::ReadStatus::closed) {
      throw GraderError("connection_closed", "server closed the connection");
    }
    auto msg = nlohmann::json::parse(line);
    if (msg.value("kind", "") == "error") {
      throw GraderError(msg.value("code", "error"), msg.value("message", ""));
    }
    if (msg.value("kind", "") != kind) {
      throw GraderError("protocol_error", "expected '" + std::string(kind) + "' from server");
    }
    return msg;
  };
  auto observation = [](const nlohmann::json& msg) {
    const auto v = wire::decode_values(msg.at("observation"));
    if (!v || v->size() != kObservationSize) throw GraderError("protocol_error", "bad observation");
    Observation o{};
    std::copy(v->begin(), v->end(), o.begin());
    return o;
  };

  send({{"kind", "hello"}, {"token", token}, {"version", kProtocolVersion}});
  const auto hello = receive("hello");
  const auto episodes = hello.at("episodes").get<std::size_t>();
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    const Policy policy = make_policy();
    send({{"kind", "reset"}});
    Observation obs = observation(receive("observation"));
    while (true) {
      send({{"kind", "action"}, {"action", wire::encode_values(policy(obs))}});
      const auto r = receive("step_result");
      obs = observation(r);
      if (r.at("done").get<bool>()) break;
    }
    receive("episode_done");
  }
  const auto done = receive("evaluation_done");
  return {done.at("rewards").get<std::vector<double>>(), done.at("score").get<double>()};
}

}  // namespace musclerun
