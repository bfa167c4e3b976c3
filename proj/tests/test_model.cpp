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

#include <set>

#include "test_support.hpp"

namespace musclerun {
namespace {

using testing::golden_path;
using testing::read_file;
using testing::source_path;

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(DefaultModel, TopologyMatchesRunner) {
  const auto m = default_model();
  EXPECT_EQ(m.bodies.size(), 7u);
  EXPECT_EQ(m.joints.size(), 7u);
  EXPECT_EQ(total_dof(m), 9);
  EXPECT_EQ(m.muscles.size(), 18u);
  EXPECT_EQ(m.contact_spheres.size(), 4u);
  EXPECT_TRUE(validate(m, true).empty());
}

TEST(DefaultModel, MaxIsometricForcesWithinRange) {
  const auto m = default_model();
  double lo = 1e9, hi = 0.0;
  for (const auto& mu : m.muscles) {
    EXPECT_GE(mu.f_max_iso, 557.0) << mu.name;
    EXPECT_LE(mu.f_max_iso, 9594.0) << mu.name;
    lo = std::min(lo, mu.f_max_iso);
    hi = std::max(hi, mu.f_max_iso);
  }
  EXPECT_EQ(lo, 557.0);
  EXPECT_EQ(hi, 9594.0);
}

TEST(DefaultModel, TotalMassEqualsDocumentedConstant) {
  const auto m = default_model();
  double sum = 0.0;
  for (const auto& b : m.bodies) sum += b.mass;
  EXPECT_DOUBLE_EQ(sum, 75.0);
  EXPECT_DOUBLE_EQ(m.metadata.total_mass, sum);
}

TEST(DefaultModel, NineMusclesPerLegWithMirroredNames) {
  const auto m = default_model();
  std::set<std::string> right, left;
  for (const auto& mu : m.muscles) {
    const auto side = mu.name.substr(mu.name.size() - 2);
    (side == "_r" ? right : left).insert(mu.name.substr(0, mu.name.size() - 2));
  }
  EXPECT_EQ(right.size(), 9u);
  EXPECT_EQ(right, left);
  for (const char* name : {"hamstrings", "bifemsh", "glut_max", "iliopsoas", "rect_fem", "vasti",
                           "gastroc", "soleus", "tib_ant"}) {
    EXPECT_TRUE(right.count(name)) << name;
  }
}

TEST(DefaultModel, RepeatedCallsCompareEqual) { EXPECT_EQ(default_model(), default_model()); }

TEST(DefaultModel, ShippedFileIsTheCanonicalSerialization) {
  EXPECT_EQ(save_model(default_model()), read_file(source_path("models/default.json")));
}

TEST(LoadModel, ShippedFileLoadsWithRunnerTopology) {
  std::vector<std::string> warnings;
  const auto m = load_model(read_file(source_path("models/default.json")), true, &warnings);
  EXPECT_TRUE(warnings.empty());
  EXPECT_EQ(m.bodies.size(), 7u);
  EXPECT_EQ(total_dof(m), 9);
  EXPECT_EQ(m.muscles.size(), 18u);
  EXPECT_EQ(m, default_model());
}

TEST(LoadModel, UnknownBodyInMusclePathIsReferentialError) {
  auto doc = model_to_json(default_model());
  doc["muscles"][3]["path"][1]["body"] = "tail";
  try {
    load_model(doc.dump());
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "$.muscles[3].path[1].body");
    EXPECT_NE(std::string(e.what()).find("tail"), std::string::npos);
  }
}

TEST(LoadModel, SchemaViolationsNameTheOffendingPath) {
  auto expect_path = [](nlohmann::json doc, const std::string& path) {
    try {
      load_model(doc.dump());
      ADD_FAILURE() << "expected SchemaError at " << path;
    } catch (const SchemaError& e) {
      EXPECT_EQ(e.path(), path) << e.what();
    }
  };
  const auto base = model_to_json(default_model());
  {
    auto d = base;
    d["bodies"][2]["mass"] = -1.0;
    expect_path(d, "$.bodies[2].mass");
  }
  {
    auto d = base;
    d["bodies"][0].erase("inertia_zz");
    expect_path(d, "$.bodies[0].inertia_zz");
  }
  {
    auto d = base;
    d["version"] = "musclerun-model/0";
    expect_path(d, "$.version");
  }
  {
    auto d = base;
    d["muscles"][0]["pennation_angle"] = 2.0;
    expect_path(d, "$.muscles[0].pennation_angle");
  }
  {
    auto d = base;
    d["ligaments"][1]["engage_angle_lo"] = 5.0;
    expect_path(d, "$.ligaments[1]");
  }
  {
    auto d = base;
    d["contact_spheres"][0]["radius"] = 0.0;
    expect_path(d, "$.contact_spheres[0].radius");
  }
  {
    auto d = base;
    d["muscles"][0]["path"].erase(1);
    expect_path(d, "$.muscles[0].path");
  }
  EXPECT_THROW(load_model("{ not json"), SchemaError);
}

TEST(LoadModel, TopologyViolationIsFatalOnlyWhenStrict) {
  auto def = default_model();
  def.muscles.pop_back();
  const auto text = save_model(def);
  std::vector<std::string> warnings;
  const auto loaded = load_model(text, false, &warnings);
  EXPECT_EQ(loaded.muscles.size(), 17u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("18 muscles"), std::string::npos);
  EXPECT_THROW(load_model(text, true), TopologyError);
}

TEST(LoadModel, ExtraRevoluteJointChangesDofCount) {
  auto def = default_model();
  def.bodies.push_back({"tail", 1.0, 0.01, {0.0, -0.1}, {}});
  def.joints.push_back({"pelvis_tail", "pelvis", "tail", JointKind::revolute, {-0.2, 0.0}, {0, 0}, {-1, 1}});
  def.metadata.total_mass += 1.0;
  def.initial_q.push_back(0.0);
  def.initial_qdot.push_back(0.0);
  std::vector<std::string> warnings;
  load_model(save_model(def), false, &warnings);
  EXPECT_FALSE(warnings.empty());
  EXPECT_THROW(load_model(save_model(def), true), TopologyError);
  const Model compiled(def);
  EXPECT_EQ(compiled.dof(), 10);
}

TEST(SaveModel, RoundTripIsIdentity) {
  const auto m = default_model();
  EXPECT_EQ(load_model(save_model(m)), m);
  auto edited = m;
  edited.tendon.compliant = true;
  edited.metadata.notes["extra"] = "value";
  edited.initial_q[1] = 0.01;
  EXPECT_EQ(load_model(save_model(edited)), edited);
}

TEST(SaveModel, TwoSavesAreByteIdentical) {
  EXPECT_EQ(save_model(default_model()), save_model(default_model()));
}

TEST(SaveModel, KeysAreSorted) {
  const auto doc = nlohmann::json::parse(save_model(default_model()));
  std::vector<std::string> keys;
  for (auto it = doc.begin(); it != doc.end(); ++it) keys.push_back(it.key());
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
}

TEST(SaveModel, EditedMassChangesOnlyThatField) {
  auto m = default_model();
  const auto before = lines(save_model(m));
  m.bodies[2].mass = 3.5;
  const auto after = lines(save_model(m));
  ASSERT_EQ(before.size(), after.size());
  std::vector<std::size_t> diff;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i] != after[i]) diff.push_back(i);
  }
  ASSERT_EQ(diff.size(), 1u);
  EXPECT_NE(after[diff[0]].find("\"mass\": 3.5"), std::string::npos);
}

TEST(CompiledModel, BodyAndCoordinateNaming) {
  const Model m(default_model(), true);
  EXPECT_EQ(m.dof(), 9);
  const char* names[] = {"pelvis_tx", "pelvis_ty", "pelvis_tilt", "hip_r", "knee_r",
                         "ankle_r",   "hip_l",     "knee_l",      "ankle_l"};
  for (int k = 0; k < 9; ++k) EXPECT_EQ(m.coordinate_name(k), names[k]);
  EXPECT_DOUBLE_EQ(m.total_mass(), 75.0);
  EXPECT_DOUBLE_EQ(m.body_weight(), 75.0 * 9.80665);
  EXPECT_EQ(m.body(m.body_index("foot_l")).parent, m.body_index("shank_l"));
}

}  // namespace
}  // namespace musclerun
