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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

namespace musclerun {
namespace {

EpisodeConfig config(std::uint64_t seed, int difficulty = 0) {
  EpisodeConfig cfg;
  cfg.seed = seed;
  cfg.difficulty = difficulty;
  return cfg;
}

std::vector<Action> wave_script(int steps) {
  std::vector<Action> out;
  for (int t = 0; t < steps; ++t) {
    Action a(kActionSize);
    for (int i = 0; i < kActionSize; ++i) a[i] = 0.5 + 0.4 * std::sin(0.2 * t + 0.7 * i);
    out.push_back(a);
  }
  return out;
}

TEST(ActionScript, SkipsCommentsAndBlankLines) {
  std::stringstream in;
  in << "# header\n\n";
  for (int r = 0; r < 2; ++r) {
    for (int i = 0; i < kActionSize; ++i) in << (i ? "," : "") << 0.1 * r + 0.01 * i;
    in << "\n";
  }
  const auto steps = read_action_script(in);
  ASSERT_EQ(steps.size(), 2u);
  EXPECT_EQ(steps[1][3], 0.1 + 0.03);
}

TEST(ActionScript, WrongWidthNamesLine) {
  std::stringstream in("# c\n0,1,2\n");
  try {
    read_action_script(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ActionScript, WriteReadRoundTrip) {
  const auto steps = wave_script(7);
  std::stringstream buf;
  write_action_script(buf, steps);
  EXPECT_EQ(read_action_script(buf), steps);
}

TEST(ActionScript, ScriptedPolicyPadsWithZerosAndRestarts) {
  const auto factory = scripted_policy(wave_script(2));
  auto p = factory();
  const Observation o{};
  EXPECT_EQ(p(o), wave_script(2)[0]);
  EXPECT_EQ(p(o), wave_script(2)[1]);
  EXPECT_EQ(p(o), Action(kActionSize, 0.0));
  EXPECT_EQ(factory()(o), wave_script(2)[0]);
}

TEST(TrajectoryLog, RoundTripIsExact) {
  Environment env;
  std::stringstream log;
  const auto factory = scripted_policy(wave_script(40));
  const auto result = run_episode(env, config(5, 1), factory(), &log);
  const auto t = read_trajectory(log);
  EXPECT_EQ(t.header.seed, 5u);
  EXPECT_EQ(t.header.difficulty, 1);
  EXPECT_EQ(t.header.body_weight, env.model().body_weight());
  EXPECT_EQ(t.header.coordinates.size(), 9u);
  EXPECT_EQ(t.header.muscles.size(), 18u);
  ASSERT_EQ(t.records.size(), std::size_t(result.steps_taken + 1));
  EXPECT_EQ(t.records[0].q, std::vector<double>(default_model().initial_q));
  const auto& last = t.records.back();
  const auto& s = env.state();
  for (int k = 0; k < 9; ++k) EXPECT_EQ(last.q[k], s.q[k]);
  std::stringstream again;
  write_trajectory_header(again, t.header);
  for (const auto& r : t.records) write_trajectory_record(again, r);
  EXPECT_EQ(again.str(), log.str());
}

TEST(TrajectoryLog, RecordsMatchEpisode) {
  Environment env;
  std::stringstream log;
  const auto result = run_episode(env, config(2), constant_policy(0.4), &log);
  const auto t = read_trajectory(log);
  double sum = 0.0;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    EXPECT_EQ(t.records[i].step, static_cast<int>(i));
    EXPECT_NEAR(t.records[i].time, 0.01 * i, 1e-12);
    sum += t.records[i].reward;
  }
  EXPECT_NEAR(sum, result.reward, 1e-12);
}

TEST(TrajectoryLog, MalformedInputRejected) {
  std::stringstream no_version("step,time\n");
  EXPECT_THROW(read_trajectory(no_version), Error);
  std::stringstream missing_key("# musclerun-trajectory/1\n# seed=1 difficulty=0\nstep\n");
  EXPECT_THROW(read_trajectory(missing_key), Error);
  Environment env;
  std::stringstream log;
  run_episode(env, config(2), zero_policy(), &log);
  std::string text = log.str();
  text += "1,2,3\n";
  std::stringstream bad(text);
  EXPECT_THROW(read_trajectory(bad), Error);
}

TEST(TrajectoryLog, IdenticalSeedsGiveIdenticalLogs) {
  const auto factory = scripted_policy(wave_script(100));
  std::stringstream a, b;
  Environment ea, eb;
  run_episode(ea, config(77, 2), factory(), &a);
  run_episode(eb, config(77, 2), factory(), &b);
  EXPECT_EQ(a.str(), b.str());
}

// Golden 100-step run of a low-tone standing script, recorded at twice the
// substep resolution. Regenerate with MUSCLERUN_REGENERATE_GOLDEN=1.
constexpr double kGoldenExcitation = 0.05;
constexpr int kGoldenSteps = 100;

std::vector<SimState> scripted_run(const Model& m, int substeps) {
  std::vector<SimState> out{initial_state(m)};
  const Action a(kActionSize, kGoldenExcitation);
  for (int t = 0; t < kGoldenSteps; ++t) out.push_back(advance_control_step(m, out.back(), a, {}, substeps).first);
  return out;
}

std::vector<std::vector<double>> read_golden_q() {
  std::stringstream in(testing::read_file(testing::golden_path("trajectory_100.csv")));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    for (auto f : split_csv(line)) row.push_back(parse_double(f));
    rows.push_back(std::move(row));
  }
  return rows;
}

TEST(GoldenTrajectory, DoubleResolutionReproducesFile) {
  const Model m{default_model()};
  const auto run = scripted_run(m, 2 * kSubstepsPerControl);
  if (std::getenv("MUSCLERUN_REGENERATE_GOLDEN")) {
    std::ofstream out(testing::golden_path("trajectory_100.csv"));
    out << "# step,q[0..8]; constant excitation " << format_double(kGoldenExcitation) << ", "
        << 2 * kSubstepsPerControl << " substeps per control step\n";
    for (std::size_t t = 0; t < run.size(); ++t) {
      out << t;
      for (int k = 0; k < m.dof(); ++k) out << "," << format_double(run[t].q[k]);
      out << "\n";
    }
  }
  const auto golden = read_golden_q();
  ASSERT_EQ(golden.size(), run.size());
  for (std::size_t t = 0; t < run.size(); ++t) {
    ASSERT_EQ(golden[t].size(), 10u);
    for (int k = 0; k < m.dof(); ++k) EXPECT_NEAR(run[t].q[k], golden[t][k + 1], 1e-9) << t << " " << k;
  }
}

TEST(GoldenTrajectory, DefaultResolutionPelvisPathWithinBound) {
  const Model m{default_model()};
  const auto run = scripted_run(m, kSubstepsPerControl);
  const auto golden = read_golden_q();
  ASSERT_EQ(golden.size(), run.size());
  double worst = 0.0;
  for (std::size_t t = 0; t < run.size(); ++t) {
    worst = std::max(worst, std::hypot(run[t].q[0] - golden[t][1], run[t].q[1] - golden[t][2]));
  }
  RecordProperty("pelvis_deviation", std::to_string(worst));
  EXPECT_LT(worst, 1e-4);
}

}  // namespace
}  // namespace musclerun
