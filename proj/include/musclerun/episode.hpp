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

#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "musclerun/environment.hpp"
#include "musclerun/text.hpp"
#include "musclerun/trajectory.hpp"

namespace musclerun {

using Policy = std::function<Action(const Observation&)>;
// Builds a fresh policy for each episode, so stateful policies restart.
using PolicyFactory = std::function<Policy()>;

inline Policy constant_policy(double value) {
  return [value](const Observation&) { return Action(kActionSize, value); };
}

inline Policy zero_policy() { return constant_policy(0.0); }

// One line of 18 comma-separated excitations per control step; '#' lines and
// blank lines are skipped.
inline std::vector<Action> read_action_script(std::istream& in) {
  std::vector<Action> steps;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != kActionSize) {
      throw Error("action script line " + std::to_string(line_no) + ": expected " +
                  std::to_string(kActionSize) + " values, found " + std::to_string(fields.size()));
    }
    Action a;
    a.reserve(kActionSize);
    for (auto f : fields) a.push_back(parse_double(f));
    steps.push_back(std::move(a));
  }
  return steps;
}

inline std::vector<Action> read_action_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read action script '" + path + "'");
  return read_action_script(in);
}

inline void write_action_script(std::ostream& out, const std::vector<Action>& steps) {
  for (const auto& a : steps) {
    for (std::size_t i = 0; i < a.size(); ++i) out << (i ? "," : "") << format_double(a[i]);
    out << "\n";
  }
}

// Replays the script step by step; past its end the excitations are zero.
inline PolicyFactory scripted_policy(std::vector<Action> steps) {
  auto shared = std::make_shared<const std::vector<Action>>(std::move(steps));
  return [shared]() -> Policy {
    auto cursor = std::make_shared<std::size_t>(0);
    return [shared, cursor](const Observation&) {
      const std::size_t i = (*cursor)++;
      return i < shared->size() ? (*shared)[i] : Action(kActionSize, 0.0);
    };
  };
}

inline PolicyFactory stateless(Policy p) {
  return [p = std::move(p)]() { return p; };
}

inline TrajectoryHeader trajectory_header(const Environment& env) {
  TrajectoryHeader h;
  h.seed = env.reset_info().seed;
  h.difficulty = env.config().difficulty;
  h.max_obstacles = env.config().max_obstacles;
  h.body_weight = env.model().body_weight();
  for (int k = 0; k < env.model().dof(); ++k) h.coordinates.push_back(env.model().coordinate_name(k));
  for (const auto& mu : env.model().definition().muscles) h.muscles.push_back(mu.name);
  return h;
}

inline TrajectoryRecord trajectory_record(const Environment& env, int step, double grf_r,
                                          double grf_l, double reward) {
  const auto& s = env.state();
  TrajectoryRecord r;
  r.step = step;
  r.time = s.time;
  r.q.assign(s.q.data(), s.q.data() + s.q.size());
  r.qdot.assign(s.qdot.data(), s.qdot.data() + s.qdot.size());
  r.activations.assign(s.activations.data(), s.activations.data() + s.activations.size());
  r.grf_r = grf_r;
  r.grf_l = grf_l;
  r.reward = reward;
  return r;
}

// Runs one full episode. Writes a trajectory log when `log` is given.
inline EpisodeResult run_episode(Environment& env, const EpisodeConfig& cfg, const Policy& policy,
                                 std::ostream* log = nullptr) {
  Observation obs = env.reset(cfg);
  if (log) {
    write_trajectory_header(*log, trajectory_header(env));
    write_trajectory_record(*log, trajectory_record(env, 0, 0.0, 0.0, 0.0));
  }
  while (env.active()) {
    const auto r = env.step(policy(obs));
    obs = r.observation;
    if (log) {
      write_trajectory_record(*log, trajectory_record(env, env.result().steps_taken,
                                                      r.info.foot_force_r, r.info.foot_force_l,
                                                      r.reward));
    }
  }
  return env.result();
}

}  // namespace musclerun
