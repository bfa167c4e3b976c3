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

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "musclerun.hpp"

namespace {

using namespace musclerun;

struct EpisodeFlags {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int difficulty = 0;
  int max_obstacles = 3;

  EpisodeConfig config() const {
    EpisodeConfig c;
    if (seed_given) c.seed = seed;
    c.difficulty = difficulty;
    c.max_obstacles = max_obstacles;
    return c;
  }
};

void add_episode_flags(CLI::App* cmd, EpisodeFlags& f, bool seed_required = false) {
  auto* seed = cmd->add_option("--seed", f.seed, "Episode seed, below 2^63 (default: entropy)");
  seed->each([&f](const std::string&) { f.seed_given = true; });
  if (seed_required) seed->required();
  cmd->add_option("--difficulty", f.difficulty, "0 flat, 1 obstacles, 2 obstacles and weak psoas")
      ->check(CLI::Range(0, 2));
  cmd->add_option("--max-obstacles", f.max_obstacles, "Number of obstacles")->check(CLI::NonNegativeNumber);
}

struct PolicyFlags {
  bool zero = false;
  double constant = 0.0;
  std::string script;

  PolicyFactory factory() const {
    if (!script.empty()) return scripted_policy(read_action_script(script));
    return stateless(constant_policy(constant));
  }
};

void add_policy_flags(CLI::App* cmd, PolicyFlags& p) {
  auto* zero = cmd->add_flag("--zero", p.zero, "All excitations zero (default)");
  auto* constant = cmd->add_option("--constant", p.constant, "Every excitation fixed at this value");
  auto* script = cmd->add_option("--script", p.script, "Action script: 18 comma-separated values per line")
                     ->check(CLI::ExistingFile);
  zero->excludes(constant)->excludes(script);
  constant->excludes(script);
}

ModelDefinition model_from_path(const std::string& path) {
  if (path.empty()) return default_model();
  std::ifstream in(path);
  if (!in) throw Error("cannot read model '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  std::vector<std::string> warnings;
  auto def = load_model(buf.str(), false, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return def;
}

void print_result(const EpisodeResult& r, const Environment& env) {
  std::cout << "seed=" << env.reset_info().seed << " reward=" << format_double(r.reward)
            << " distance=" << format_double(r.final_x) << " ligament_integral=" << format_double(r.ligament_integral)
            << " steps=" << r.steps_taken << " termination=" << to_string(r.termination) << "\n";
}

int cmd_run(const std::string& model_path, const EpisodeFlags& ep, const PolicyFlags& pol,
            const std::string& log_path) {
  Environment env(model_from_path(model_path));
  const auto policy = pol.factory()();
  EpisodeResult result;
  if (log_path.empty()) {
    result = run_episode(env, ep.config(), policy);
  } else {
    std::ofstream log(log_path);
    if (!log) throw Error("cannot write log '" + log_path + "'");
    result = run_episode(env, ep.config(), policy, &log);
  }
  print_result(result, env);
  return 0;
}

int cmd_bench(int episodes, const std::string& model_path) {
  Environment env(model_from_path(model_path));
  const auto policy = zero_policy();
  long steps = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < episodes; ++i) {
    steps += run_episode(env, EpisodeConfig{static_cast<std::uint64_t>(i), 0, 3}, policy).steps_taken;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "steps_per_second=" << format_double(steps / secs) << " steps=" << steps
            << " episodes=" << episodes << " seconds=" << format_double(secs)
            << " integrator=semi-implicit-euler substeps=" << kSubstepsPerControl
            << " h=" << format_double(kSubstep) << "\n";
  return 0;
}

int cmd_course(const EpisodeFlags& ep) {
  const auto course = generate_obstacles(ep.seed, ep.difficulty, ep.max_obstacles);
  if (course.obstacles.empty()) {
    std::cout << "no obstacles\n";
    return 0;
  }
  std::cout << "index,x,y,r,psoas_scale_l,psoas_scale_r\n";
  for (std::size_t i = 0; i < course.obstacles.size(); ++i) {
    const auto& o = course.obstacles[i];
    std::cout << i << "," << format_double(o.x) << "," << format_double(o.y) << "," << format_double(o.r) << ","
              << format_double(course.psoas_scale_l) << "," << format_double(course.psoas_scale_r) << "\n";
  }
  return 0;
}

std::atomic<bool> g_stop{false};

std::set<std::string> read_tokens(const std::string& arg) {
  std::set<std::string> out;
  std::string text = arg;
  if (std::ifstream in(arg); in) {
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  std::string tok;
  for (char c : text + ",") {
    if (c == ',' || c == '\n' || c == ' ' || c == '\r') {
      if (!tok.empty()) out.insert(tok);
      tok.clear();
    } else {
      tok.push_back(c);
    }
  }
  return out;
}

int cmd_serve(const std::string& bind, const std::string& spec, int budget, const std::string& board,
              const std::string& tokens, double idle_timeout, const std::string& model_path) {
  ServerConfig c;
  c.bind = net::parse_endpoint(bind);
  c.spec = load_evaluation_spec(spec);
  c.budget = budget;
  c.leaderboard_path = board;
  if (!tokens.empty()) c.tokens = read_tokens(tokens);
  c.idle_timeout = std::chrono::milliseconds(static_cast<long>(idle_timeout * 1000));
  c.model = model_from_path(model_path);
  GraderServer server(c);
  server.start();
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  std::cout << "listening on " << c.bind.host << ":" << server.port() << " spec=" << c.spec.name
            << " protocol=" << kProtocolVersion << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

int cmd_submit(const std::string& address, std::string token, const PolicyFlags& pol, double timeout) {
  if (token.empty()) {
    if (const char* env = std::getenv("MUSCLERUN_TOKEN")) token = env;
  }
  if (token.empty()) throw Error("no token: pass --token or set MUSCLERUN_TOKEN");
  const auto r = client_run(net::parse_endpoint(address), token, pol.factory(),
                            std::chrono::milliseconds(static_cast<long>(timeout * 1000)));
  std::cout << "score=" << format_double(r.score) << " rewards=";
  for (std::size_t i = 0; i < r.rewards.size(); ++i) std::cout << (i ? "," : "") << format_double(r.rewards[i]);
  std::cout << "\n";
  return 0;
}

int cmd_board(const std::string& path, std::size_t top) {
  std::vector<std::string> warnings;
  const auto rows = leaderboard_report(path, top, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "rank,token,score,timestamp,spec,rewards\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& e = rows[i];
    std::cout << i + 1 << "," << e.token << "," << format_double(e.score) << "," << e.timestamp << "," << e.spec
              << ",";
    for (std::size_t k = 0; k < e.rewards.size(); ++k) std::cout << (k ? ";" : "") << format_double(e.rewards[k]);
    std::cout << "\n";
  }
  return 0;
}

Trajectory read_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read trajectory log '" + path + "'");
  return read_trajectory(in);
}

int cmd_analyze(const std::string& log_path, const std::string& foot, double window, const std::string& out_path,
                const std::array<std::string, 3>& bands) {
  const auto log = read_log(log_path);
  const auto rep = segment_and_average(log, foot == "left" ? Foot::left : Foot::right, window);
  if (out_path.empty()) {
    write_representative_cycle(std::cout, rep);
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write '" + out_path + "'");
    write_representative_cycle(out, rep);
  }
  const bool any_band = !bands[0].empty() || !bands[1].empty() || !bands[2].empty();
  if (any_band) {
    ExperimentalBand band;
    for (int j = 0; j < 3; ++j) {
      if (bands[j].empty()) throw Error(std::string("band file for ") + kGaitJointNames[j] + " missing");
      std::ifstream in(bands[j]);
      if (!in) throw Error("cannot read band file '" + bands[j] + "'");
      read_band_joint(in, band, static_cast<GaitJoint>(j));
    }
    const auto agree = band_agreement(rep, band);
    std::cerr << "agreement cycles=" << rep.cycles;
    for (int j = 0; j < 3; ++j) std::cerr << " " << kGaitJointNames[j] << "=" << format_double(agree[j]);
    std::cerr << "\n";
  } else {
    std::cerr << "cycles=" << rep.cycles << "\n";
  }
  return 0;
}

int cmd_replay(const std::string& script, const std::string& log_path, const std::string& model_path) {
  const auto stored = read_log(log_path);
  EpisodeConfig cfg{stored.header.seed, stored.header.difficulty, stored.header.max_obstacles};
  Environment env(model_from_path(model_path));
  std::stringstream fresh_text;
  run_episode(env, cfg, scripted_policy(read_action_script(script))(), &fresh_text);
  const auto fresh = read_trajectory(fresh_text);
  if (fresh.header != stored.header) throw Error("replay mismatch: header differs");
  const std::size_t n = std::min(fresh.records.size(), stored.records.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(fresh.records[i] == stored.records[i])) {
      throw Error("replay mismatch at step " + std::to_string(fresh.records[i].step));
    }
  }
  if (fresh.records.size() != stored.records.size()) {
    throw Error("replay mismatch: " + std::to_string(fresh.records.size()) + " records vs " +
                std::to_string(stored.records.size()) + " stored");
  }
  std::cout << "verified records=" << n << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Musculoskeletal running environment, grader and gait analysis"};
  app.require_subcommand(1);
  std::string model_path;
  app.add_option("--model", model_path, "Model file (default: built-in model)");

  EpisodeFlags run_ep;
  PolicyFlags run_pol;
  std::string log_path;
  auto* run = app.add_subcommand("run", "Run one episode");
  add_episode_flags(run, run_ep);
  add_policy_flags(run, run_pol);
  run->add_option("--log", log_path, "Write the trajectory log here");

  int bench_episodes = 10;
  auto* bench = app.add_subcommand("bench", "Measure control steps per second");
  bench->add_option("--episodes", bench_episodes, "Episodes to run")->check(CLI::PositiveNumber);

  EpisodeFlags course_ep;
  auto* course = app.add_subcommand("course", "Print the obstacle course for a seed");
  add_episode_flags(course, course_ep, true);

  std::string bind = "127.0.0.1:7878", spec = "open-stage", board = "leaderboard.jsonl", tokens;
  int budget = 5;
  double idle = 60.0;
  auto* serve = app.add_subcommand("serve", "Run the grading server");
  serve->add_option("--bind", bind, "host:port to listen on");
  serve->add_option("--spec", spec, "Evaluation spec name or file");
  serve->add_option("--budget", budget, "Evaluations per token per UTC day")->check(CLI::NonNegativeNumber);
  serve->add_option("--leaderboard", board, "Leaderboard file");
  serve->add_option("--tokens", tokens, "Accepted tokens: comma list or file (default: any)");
  serve->add_option("--idle-timeout", idle, "Seconds of client silence before a session ends");

  std::string address = "127.0.0.1:7878", token;
  PolicyFlags submit_pol;
  double submit_timeout = 120.0;
  auto* submit = app.add_subcommand("submit", "Evaluate a policy on a grading server");
  submit->add_option("--address", address, "Server host:port");
  submit->add_option("--token", token, "Submission token (default: $MUSCLERUN_TOKEN)");
  submit->add_option("--timeout", submit_timeout, "Seconds to wait for each server reply");
  add_policy_flags(submit, submit_pol);

  std::size_t top = 10;
  auto* boardcmd = app.add_subcommand("board", "Print the leaderboard");
  boardcmd->add_option("--path", board, "Leaderboard file");
  boardcmd->add_option("--top", top, "Rows to show");

  std::string analyze_log, foot = "right", out_path;
  double window = kAnalysisWindow;
  std::array<std::string, 3> bands;
  auto* analyze = app.add_subcommand("analyze", "Representative gait cycle from a trajectory log");
  analyze->add_option("--log", analyze_log, "Trajectory log")->required()->check(CLI::ExistingFile);
  analyze->add_option("--foot", foot, "right or left")->check(CLI::IsMember({"right", "left"}));
  analyze->add_option("--window", window, "Seconds analysed at the end of the log");
  analyze->add_option("--out", out_path, "Write the cycle table here (default: stdout)");
  analyze->add_option("--band-hip", bands[0], "Band file (percent,mean,sd)");
  analyze->add_option("--band-knee", bands[1], "Band file (percent,mean,sd)");
  analyze->add_option("--band-ankle", bands[2], "Band file (percent,mean,sd)");

  std::string replay_script, replay_log;
  auto* replay = app.add_subcommand("replay", "Re-simulate an action script and verify a stored log");
  replay->add_option("--script", replay_script, "Action script")->required()->check(CLI::ExistingFile);
  replay->add_option("--log", replay_log, "Stored trajectory log")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*run) return cmd_run(model_path, run_ep, run_pol, log_path);
    if (*bench) return cmd_bench(bench_episodes, model_path);
    if (*course) return cmd_course(course_ep);
    if (*serve) return cmd_serve(bind, spec, budget, board, tokens, idle, model_path);
    if (*submit) return cmd_submit(address, token, submit_pol, submit_timeout);
    if (*boardcmd) return cmd_board(board, top);
    if (*analyze) return cmd_analyze(analyze_log, foot, window, out_path, bands);
    if (*replay) return cmd_replay(replay_script, replay_log, model_path);
  } catch (const GraderError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << msg << "\n";
    return 1;
  }
  return 0;
}
