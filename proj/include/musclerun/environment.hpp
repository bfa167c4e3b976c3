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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "musclerun/default_model.hpp"
#include "musclerun/dynamics.hpp"
#include "musclerun/rng.hpp"

namespace musclerun {

inline constexpr std::uint64_t kMaxSeed = (std::uint64_t{1} << 63) - 1;
inline constexpr int kObservationSize = 41;
inline constexpr int kActionSize = 18;
inline constexpr int kEpisodeSteps = 1000;
inline constexpr double kFallHeight = 0.65;
inline constexpr double kLigamentWeight = 1e-7;
inline constexpr double kNoObstacleDistance = 100.0;

struct EpisodeConfig {
  std::optional<std::uint64_t> seed;  // absent: drawn from entropy at reset
  int difficulty = 0;
  int max_obstacles = 3;
};

inline void validate(const EpisodeConfig& cfg) {
  if (cfg.seed && *cfg.seed > kMaxSeed) throw Error("seed must be below 2^63");
  if (cfg.difficulty < 0 || cfg.difficulty > 2) throw Error("difficulty must be 0, 1 or 2");
  if (cfg.max_obstacles < 0) throw Error("max_obstacles must be non-negative");
}

struct ObstacleCourse {
  std::vector<Obstacle> obstacles;
  double psoas_scale_l = 1.0;
  double psoas_scale_r = 1.0;

  bool operator==(const ObstacleCourse&) const = default;
};

// Difficulty 0: flat ground. Otherwise the first min(3, max_obstacles) x
// positions are i.i.d. U(1, 5) sorted ascending and each later one sits U(2, 4)
// past its predecessor; then per obstacle y ~ U(-0.25, 0.25) and
// r = 0.05 + Exp(mean 0.05); difficulty 2 finally draws the left and right
// psoas strength scales from U(0.5, 1).
inline ObstacleCourse generate_obstacles(std::uint64_t seed, int difficulty, int max_obstacles) {
  ObstacleCourse course;
  if (difficulty == 0) return course;
  SplitMix64 rng(seed);
  const int n = std::max(0, max_obstacles);
  const int head = std::min(n, 3);
  std::vector<double> xs;
  xs.reserve(n);
  for (int i = 0; i < head; ++i) xs.push_back(rng.uniform(1.0, 5.0));
  std::sort(xs.begin(), xs.end());
  for (int i = head; i < n; ++i) xs.push_back(xs.back() + rng.uniform(2.0, 4.0));
  for (int i = 0; i < n; ++i) {
    const double y = rng.uniform(-0.25, 0.25);
    const double r = 0.05 + rng.exponential(0.05);
    course.obstacles.push_back({xs[i], y, r});
  }
  if (difficulty >= 2) {
    course.psoas_scale_l = rng.uniform(0.5, 1.0);
    course.psoas_scale_r = rng.uniform(0.5, 1.0);
  }
  return course;
}

inline ObstacleCourse generate_obstacles(const EpisodeConfig& cfg) {
  validate(cfg);
  return generate_obstacles(cfg.seed.value_or(0), cfg.difficulty, cfg.max_obstacles);
}

using Observation = std::array<double, kObservationSize>;
using Action = std::vector<double>;

inline const std::array<std::string_view, kObservationSize>& observation_layout() {
  static const std::array<std::string_view, kObservationSize> names = {
      "pelvis_rotation", "pelvis_x", "pelvis_y",
      "pelvis_rotation_speed", "pelvis_x_speed", "pelvis_y_speed",
      "hip_r", "knee_r", "ankle_r", "hip_l", "knee_l", "ankle_l",
      "hip_r_speed", "knee_r_speed", "ankle_r_speed", "hip_l_speed", "knee_l_speed", "ankle_l_speed",
      "com_x", "com_y", "com_x_speed", "com_y_speed",
      "head_x", "head_y", "pelvis_pos_x", "pelvis_pos_y", "torso_x", "torso_y",
      "toes_l_x", "toes_l_y", "toes_r_x", "toes_r_y", "talus_l_x", "talus_l_y",
      "talus_r_x", "talus_r_y",
      "psoas_strength_r", "psoas_strength_l",
      "obstacle_distance", "obstacle_y", "obstacle_radius"};
  return names;
}

// The next obstacle is the one with the smallest x strictly ahead of the pelvis.
inline Observation observe(const Model& m, const SimState& s, const Kinematics& kin,
                           const ObstacleCourse& course) {
  Observation o{};
  const Vec2 pelvis = kin.origin[0];
  const Vec2 pelvis_vel = kin.origin_vel[0];
  o[0] = s.q[2];
  o[1] = pelvis.x();
  o[2] = pelvis.y();
  o[3] = s.qdot[2];
  o[4] = pelvis_vel.x();
  o[5] = pelvis_vel.y();
  for (int j = 0; j < 6; ++j) {
    o[6 + j] = s.q[3 + j];
    o[12 + j] = s.qdot[3 + j];
  }
  o[18] = kin.center_of_mass.x();
  o[19] = kin.center_of_mass.y();
  o[20] = kin.center_of_mass_vel.x();
  o[21] = kin.center_of_mass_vel.y();
  int slot = 22;
  for (const char* name : {"head", "pelvis", "torso", "toes_l", "toes_r", "talus_l", "talus_r"}) {
    const auto& st = m.stations()[m.station_index(name)];
    const Vec2 p = kin.point(st.body, st.local);
    o[slot++] = p.x();
    o[slot++] = p.y();
  }
  o[36] = course.psoas_scale_r;
  o[37] = course.psoas_scale_l;
  o[38] = kNoObstacleDistance;
  o[39] = 0.0;
  o[40] = 0.0;
  const Obstacle* next = nullptr;
  for (const auto& ob : course.obstacles) {
    if (ob.x > pelvis.x() && (!next || ob.x < next->x)) next = &ob;
  }
  if (next) {
    o[38] = next->x - pelvis.x();
    o[39] = next->y;
    o[40] = next->r;
  }
  return o;
}

enum class Termination { none, time_limit, fell, diverged };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::none: return "none";
    case Termination::time_limit: return "time_limit";
    case Termination::fell: return "fell";
    case Termination::diverged: return "diverged";
  }
  return "none";
}

struct EpisodeResult {
  double final_x = 0.0;
  double ligament_integral = 0.0;
  double reward = 0.0;
  int steps_taken = 0;
  Termination termination = Termination::none;

  bool operator==(const EpisodeResult&) const = default;
};

struct ResetInfo {
  std::uint64_t seed = 0;
  bool seed_from_entropy = false;
  std::array<std::string_view, kObservationSize> layout = observation_layout();
};

struct StepInfo {
  Termination termination = Termination::none;
  StepTelemetry telemetry;
  double pelvis_x = 0.0;
  double foot_force_r = 0.0;  // vertical contact force, N
  double foot_force_l = 0.0;
  std::string diverged_coordinate;
};

struct StepResult {
  Observation observation{};
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct EnvOptions {
  double ligament_weight = kLigamentWeight;
};

// One episode at a time: reset, then step until done.
class Environment {
 public:
  explicit Environment(ModelDefinition def = default_model(), EnvOptions options = {})
      : base_(std::move(def)), options_(options), model_(base_, true) {
    foot_r_ = model_.stations()[model_.station_index("talus_r")].body;
    foot_l_ = model_.stations()[model_.station_index("talus_l")].body;
  }

  Observation reset(const EpisodeConfig& cfg) {
    validate(cfg);
    cfg_ = cfg;
    info_ = ResetInfo{};
    if (cfg.seed) {
      info_.seed = *cfg.seed;
    } else {
      std::random_device rd;
      info_.seed = ((std::uint64_t{rd()} << 32) | rd()) & kMaxSeed;
      info_.seed_from_entropy = true;
    }
    cfg_.seed = info_.seed;
    course_ = generate_obstacles(info_.seed, cfg.difficulty, cfg.max_obstacles);
    ModelDefinition def = base_;
    for (auto& mu : def.muscles) {
      if (mu.name == "iliopsoas_r") mu.f_max_iso *= course_.psoas_scale_r;
      if (mu.name == "iliopsoas_l") mu.f_max_iso *= course_.psoas_scale_l;
    }
    model_ = Model(std::move(def), false);
    state_ = initial_state(model_);
    result_ = EpisodeResult{};
    kin_ = forward_kinematics(model_, state_);
    result_.final_x = kin_.origin[0].x();
    active_ = true;
    return observe(model_, state_, kin_, course_);
  }

  StepResult step(std::span<const double> action) {
    if (!active_) {
      throw ProtocolMisuse(result_.termination == Termination::none ? "step called before reset"
                                                                     : "step called after episode end");
    }
    if (static_cast<int>(action.size()) != model_.muscle_count()) {
      throw ProtocolMisuse("action has " + std::to_string(action.size()) + " values, expected " +
                           std::to_string(model_.muscle_count()));
    }
    StepResult out;
    const double x_before = kin_.origin[0].x();
    const bool finite = std::all_of(action.begin(), action.end(), [](double v) { return std::isfinite(v); });
    try {
      if (!finite) throw SimulationDiverged("action", std::nan(""));
      auto [next, tel] = advance_control_step(model_, state_, action, course_.obstacles);
      state_ = std::move(next);
      state_.time = (result_.steps_taken + 1) * kControlStep;
      kin_ = forward_kinematics(model_, state_);
      out.info.telemetry = std::move(tel);
    } catch (const SimulationDiverged& e) {
      ++result_.steps_taken;
      out.info.termination = result_.termination = Termination::diverged;
      out.info.diverged_coordinate = e.coordinate();
      out.info.pelvis_x = x_before;
      out.done = true;
      active_ = false;
      finish();
      out.observation = observe(model_, state_, kin_, course_);
      return out;
    }
    ++result_.steps_taken;
    const double x_after = kin_.origin[0].x();
    result_.ligament_integral += out.info.telemetry.ligament_integral;
    out.reward = (x_after - x_before) - options_.ligament_weight * out.info.telemetry.ligament_integral;
    out.info.pelvis_x = x_after;
    for (std::size_t i = 0; i < model_.spheres().size(); ++i) {
      const int body = model_.spheres()[i].body;
      const double fy = out.info.telemetry.sphere_forces[i].y();
      if (body == foot_r_) out.info.foot_force_r += fy;
      if (body == foot_l_) out.info.foot_force_l += fy;
    }
    if (kin_.origin[0].y() < kFallHeight) {
      result_.termination = Termination::fell;
    } else if (result_.steps_taken >= kEpisodeSteps) {
      result_.termination = Termination::time_limit;
    }
    out.info.termination = result_.termination;
    out.done = result_.termination != Termination::none;
    if (out.done) {
      active_ = false;
      finish();
    }
    out.observation = observe(model_, state_, kin_, course_);
    return out;
  }

  bool active() const noexcept { return active_; }
  const EpisodeResult& result() const noexcept { return result_; }
  const EpisodeConfig& config() const noexcept { return cfg_; }
  const ResetInfo& reset_info() const noexcept { return info_; }
  const SimState& state() const noexcept { return state_; }
  const Kinematics& kinematics() const noexcept { return kin_; }
  const ObstacleCourse& course() const noexcept { return course_; }
  const Model& model() const noexcept { return model_; }
  const EnvOptions& options() const noexcept { return options_; }
  double pelvis_x() const noexcept { return kin_.origin[0].x(); }

 private:
  void finish() {
    result_.final_x = kin_.origin[0].x();
    result_.reward = result_.final_x - options_.ligament_weight * result_.ligament_integral;
  }

  ModelDefinition base_;
  EnvOptions options_;
  Model model_;
  EpisodeConfig cfg_;
  ResetInfo info_;
  ObstacleCourse course_;
  SimState state_;
  Kinematics kin_;
  EpisodeResult result_;
  int foot_r_ = 0;
  int foot_l_ = 0;
  bool active_ = false;
};

}  // namespace musclerun
