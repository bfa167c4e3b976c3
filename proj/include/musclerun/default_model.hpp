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

#include <string>

#include "musclerun/model.hpp"

namespace musclerun {

// The shipped planar runner: 7 bodies, 9 DOF, 18 muscles, 4 contact spheres.
// Anthropometry approximates a 75 kg, 1.8 m adult. Frames: x forward, y up;
// every joint angle is counter-clockwise positive, so hip flexion and ankle
// dorsiflexion are positive and knee flexion is negative. Each thigh and shank
// frame has its origin at the proximal joint; the foot frame is at the ankle.
inline ModelDefinition default_model() {
  ModelDefinition m;
  m.metadata.name = "planar-runner";
  m.metadata.total_mass = 75.0;
  m.metadata.height = 1.8;
  m.metadata.notes = {
      {"anthropometry", "75 kg, 1.8 m adult; segment lengths thigh 0.43 m, shank 0.43 m, "
                        "ankle 0.07 m above ground in the reference pose"},
      {"coordinates", "x forward, y up; joint angles counter-clockwise positive: hip flexion +, "
                      "knee flexion -, ankle dorsiflexion +"},
      {"reference_pose", "q = 0: legs straight, feet flat touching the ground, pelvis origin "
                         "at (0, 1.0) m"},
      {"tendon_slack_length", "chosen so every fiber sits at its optimal length (to 0.1 mm "
                              "of tendon) in the reference pose"},
      {"pelvis", "pelvis, torso and head combined; origin between the hip joints' vertical "
                 "line and the sacrum"},
  };
  m.gravity = {0.0, -9.80665};

  m.bodies.push_back({"pelvis", 51.0, 3.0, {-0.03, 0.30}, {}});
  for (const char* side : {"_r", "_l"}) {
    const std::string s = side;
    m.bodies.push_back({"thigh" + s, 7.5, 0.13, {0.0, -0.18}, {}});
    m.bodies.push_back({"shank" + s, 3.25, 0.05, {0.0, -0.19}, {}});
    m.bodies.push_back({"foot" + s, 1.25, 0.004, {0.05, -0.03}, {"heel" + s, "toes" + s}});
  }

  JointDef root;
  root.name = "ground_pelvis";
  root.parent = kGround;
  root.child = "pelvis";
  root.kind = JointKind::planar_free;
  root.anchor_parent = {0.0, 1.0};
  m.joints.push_back(root);
  for (const char* side : {"_r", "_l"}) {
    const std::string s = side;
    m.joints.push_back({"hip" + s, "pelvis", "thigh" + s, JointKind::revolute,
                        {-0.07, -0.07}, {0.0, 0.0}, {-0.7, 2.2}});
    m.joints.push_back({"knee" + s, "thigh" + s, "shank" + s, JointKind::revolute,
                        {0.0, -0.43}, {0.0, 0.0}, {-2.4, 0.3}});
    m.joints.push_back({"ankle" + s, "shank" + s, "foot" + s, JointKind::revolute,
                        {0.0, -0.43}, {0.0, 0.0}, {-1.0, 0.7}});
  }

  // name, F_max-iso (N), optimal fiber length (m), tendon slack length (m),
  // pennation (rad), path.
  struct Spec {
    const char* name;
    double f_max;
    double l_opt;
    double slack;
    double alpha;
    std::vector<std::pair<const char*, Vec2>> path;
  };
  const std::vector<Spec> specs = {
      {"hamstrings", 2594.0, 0.0976, 0.3555, 0.2094,
       {{"pelvis", {-0.13, -0.10}}, {"shank", {-0.03, -0.05}}}},
      {"bifemsh", 557.0, 0.1103, 0.1587, 0.4014,
       {{"thigh", {-0.02, -0.22}}, {"shank", {-0.03, -0.05}}}},
      {"glut_max", 1944.0, 0.1569, 0.0348, 0.3840,
       {{"pelvis", {-0.15, 0.0}}, {"thigh", {-0.02, -0.10}}}},
      {"iliopsoas", 2342.0, 0.1066, 0.1146, 0.1396,
       {{"pelvis", {0.0, 0.05}}, {"pelvis", {0.0, -0.08}}, {"thigh", {-0.005, -0.06}}}},
      {"rect_fem", 1169.0, 0.0759, 0.4586, 0.2426,
       {{"pelvis", {-0.03, -0.03}}, {"thigh", {0.05, -0.40}}, {"shank", {0.03, -0.06}}}},
      {"vasti", 5000.0, 0.0993, 0.1940, 0.0524,
       {{"thigh", {0.03, -0.20}}, {"thigh", {0.05, -0.40}}, {"shank", {0.03, -0.06}}}},
      {"gastroc", 2500.0, 0.0586, 0.4149, 0.2967,
       {{"thigh", {-0.02, -0.39}}, {"foot", {-0.05, 0.0}}}},
      {"soleus", 9594.0, 0.0440, 0.2417, 0.4363,
       {{"shank", {-0.02, -0.15}}, {"foot", {-0.05, 0.0}}}},
      {"tib_ant", 3000.0, 0.0683, 0.2170, 0.1745,
       {{"shank", {0.02, -0.18}}, {"shank", {0.03, -0.40}}, {"foot", {0.08, -0.01}}}},
  };
  for (const char* side : {"_r", "_l"}) {
    const std::string s = side;
    for (const auto& sp : specs) {
      MuscleDef mu;
      mu.name = sp.name + s;
      mu.f_max_iso = sp.f_max;
      mu.optimal_fiber_length = sp.l_opt;
      mu.tendon_slack_length = sp.slack;
      mu.pennation_angle = sp.alpha;
      mu.max_contraction_velocity = 10.0;
      for (const auto& [body, point] : sp.path) {
        mu.path.push_back({body == std::string("pelvis") ? std::string("pelvis") : body + s, point});
      }
      m.muscles.push_back(std::move(mu));
    }
  }

  for (const char* side : {"_r", "_l"}) {
    const std::string s = side;
    m.ligaments.push_back({"hip" + s, -0.35, 1.92, 10.0, 5.0});
    m.ligaments.push_back({"knee" + s, -2.09, 0.17, 10.0, 5.0});
    m.ligaments.push_back({"ankle" + s, -0.79, 0.52, 10.0, 5.0});
  }

  for (const char* side : {"_r", "_l"}) {
    const std::string s = side;
    m.contact_spheres.push_back({"heel" + s, "foot" + s, {-0.03, -0.035}, 0.035});
    m.contact_spheres.push_back({"toes" + s, "foot" + s, {0.16, -0.04}, 0.03});
  }

  m.stations = {
      {"head", "pelvis", {-0.03, 0.68}},   {"torso", "pelvis", {-0.03, 0.35}},
      {"pelvis", "pelvis", {0.0, 0.0}},    {"toes_l", "foot_l", {0.16, -0.04}},
      {"toes_r", "foot_r", {0.16, -0.04}}, {"talus_l", "foot_l", {0.0, 0.0}},
      {"talus_r", "foot_r", {0.0, 0.0}},
  };

  m.initial_q.assign(9, 0.0);
  m.initial_qdot.assign(9, 0.0);
  return m;
}

}  // namespace musclerun
