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
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "musclerun/common.hpp"
#include "musclerun/curves.hpp"

namespace musclerun {

inline constexpr const char* kModelSchemaVersion = "musclerun-model/1";
inline constexpr const char* kGround = "ground";

struct BodyDef {
  std::string name;
  double mass = 0.0;
  double inertia_zz = 0.0;
  Vec2 com_offset = Vec2::Zero();
  std::vector<std::string> contact_spheres;

  bool operator==(const BodyDef&) const = default;
};

enum class JointKind { planar_free, revolute };

struct JointDef {
  std::string name;
  std::string parent;
  std::string child;
  JointKind kind = JointKind::revolute;
  Vec2 anchor_parent = Vec2::Zero();
  Vec2 anchor_child = Vec2::Zero();
  std::array<double, 2> range{0.0, 0.0};

  bool operator==(const JointDef&) const = default;
};

struct PathPoint {
  std::string body;
  Vec2 point = Vec2::Zero();

  bool operator==(const PathPoint&) const = default;
};

struct MuscleDef {
  std::string name;
  double f_max_iso = 0.0;
  double optimal_fiber_length = 0.0;
  double tendon_slack_length = 0.0;
  double pennation_angle = 0.0;
  double max_contraction_velocity = 10.0;
  std::vector<PathPoint> path;

  bool operator==(const MuscleDef&) const = default;
};

struct LigamentDef {
  std::string joint;
  double engage_angle_lo = 0.0;
  double engage_angle_hi = 0.0;
  double stiffness_scale = 0.0;
  double exponent_rate = 0.0;

  bool operator==(const LigamentDef&) const = default;
};

struct ContactSphereDef {
  std::string id;
  std::string body;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;

  bool operator==(const ContactSphereDef&) const = default;
};

struct ContactParams {
  double stiffness = 2.5e6;    // N/m^exponent
  double exponent = 1.5;
  double dissipation = 1.0;    // s/m
  double friction = 0.9;
  double slip_velocity = 0.1;  // m/s, tanh regularization scale

  bool operator==(const ContactParams&) const = default;
};

struct ActivationParams {
  double tau_act = 0.01;
  double tau_deact = 0.04;
  double baseline = 0.05;  // activation of every muscle at reset

  bool operator==(const ActivationParams&) const = default;
};

struct TendonParams {
  bool compliant = false;
  double stiffness_per_slack = 30.0;  // tendon stiffness in F_max-iso per slack length

  bool operator==(const TendonParams&) const = default;
};

// Named points observed by the environment (head, toes, talus, ...).
struct StationDef {
  std::string name;
  std::string body;
  Vec2 point = Vec2::Zero();

  bool operator==(const StationDef&) const = default;
};

struct ModelMetadata {
  std::string name;
  double total_mass = 0.0;  // documented; must equal the sum of body masses
  double height = 0.0;
  std::map<std::string, std::string> notes;

  bool operator==(const ModelMetadata&) const = default;
};

struct ModelDefinition {
  ModelMetadata metadata;
  Vec2 gravity{0.0, -9.80665};
  std::vector<BodyDef> bodies;
  std::vector<JointDef> joints;
  std::vector<MuscleDef> muscles;
  std::vector<LigamentDef> ligaments;
  std::vector<ContactSphereDef> contact_spheres;
  std::vector<StationDef> stations;
  ContactParams contact;
  ActivationParams activation;
  TendonParams tendon;
  MuscleCurves curves;
  std::vector<double> initial_q;
  std::vector<double> initial_qdot;

  bool operator==(const ModelDefinition&) const = default;
};

inline int joint_dof(JointKind k) { return k == JointKind::planar_free ? 3 : 1; }

inline int total_dof(const ModelDefinition& m) {
  int n = 0;
  for (const auto& j : m.joints) n += joint_dof(j.kind);
  return n;
}

inline double summed_mass(const ModelDefinition& m) {
  double total = 0.0;
  for (const auto& b : m.bodies) total += b.mass;
  return total;
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw SchemaError(path, what);
}

inline bool finite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

}  // namespace detail

// Checks every per-type invariant and referential integrity; these always
// throw SchemaError. Returns the list of default-runner topology deviations
// (7 bodies, 9 DOF, 18 muscles, ...), which throw TopologyError only in
// strict mode.
inline std::vector<std::string> validate(const ModelDefinition& m, bool strict = false) {
  auto require = [](bool ok, const std::string& path, const std::string& what) {
    detail::require(ok, "$." + path, what);
  };
  std::set<std::string> bodies;
  for (std::size_t i = 0; i < m.bodies.size(); ++i) {
    const auto& b = m.bodies[i];
    const std::string path = "bodies[" + std::to_string(i) + "]";
    require(!b.name.empty() && b.name != kGround, path + ".name", "invalid body name");
    require(bodies.insert(b.name).second, path + ".name", "duplicate body '" + b.name + "'");
    require(std::isfinite(b.mass) && b.mass > 0.0, path + ".mass", "must be > 0");
    require(std::isfinite(b.inertia_zz) && b.inertia_zz > 0.0, path + ".inertia_zz", "must be > 0");
    require(detail::finite(b.com_offset), path + ".com_offset", "must be finite");
  }
  auto known_body = [&](const std::string& id) { return bodies.count(id) > 0; };

  std::set<std::string> spheres;
  for (std::size_t i = 0; i < m.contact_spheres.size(); ++i) {
    const auto& s = m.contact_spheres[i];
    const std::string path = "contact_spheres[" + std::to_string(i) + "]";
    require(spheres.insert(s.id).second, path + ".id", "duplicate sphere '" + s.id + "'");
    require(known_body(s.body), path + ".body", "unknown body '" + s.body + "'");
    require(std::isfinite(s.radius) && s.radius > 0.0, path + ".radius", "must be > 0");
    require(detail::finite(s.center), path + ".center", "must be finite");
  }
  for (std::size_t i = 0; i < m.bodies.size(); ++i) {
    const auto& b = m.bodies[i];
    for (std::size_t k = 0; k < b.contact_spheres.size(); ++k) {
      const std::string path =
          "bodies[" + std::to_string(i) + "].contact_spheres[" + std::to_string(k) + "]";
      const auto it = std::find_if(m.contact_spheres.begin(), m.contact_spheres.end(),
                                   [&](const auto& s) { return s.id == b.contact_spheres[k]; });
      require(it != m.contact_spheres.end(), path, "unknown sphere '" + b.contact_spheres[k] + "'");
      require(it->body == b.name, path, "sphere '" + it->id + "' belongs to body '" + it->body + "'");
    }
  }

  // Joints must be listed parent-before-child so DOF order follows the tree.
  std::set<std::string> attached{kGround};
  std::set<std::string> joint_names;
  int planar = 0;
  int revolute = 0;
  for (std::size_t i = 0; i < m.joints.size(); ++i) {
    const auto& j = m.joints[i];
    const std::string path = "joints[" + std::to_string(i) + "]";
    require(joint_names.insert(j.name).second, path + ".name", "duplicate joint '" + j.name + "'");
    require(j.parent == kGround || known_body(j.parent), path + ".parent",
            "unknown body '" + j.parent + "'");
    require(known_body(j.child), path + ".child", "unknown body '" + j.child + "'");
    require(attached.count(j.parent) > 0, path + ".parent",
            "parent '" + j.parent + "' is not attached by an earlier joint");
    require(attached.insert(j.child).second, path + ".child",
            "body '" + j.child + "' has more than one parent joint");
    require(detail::finite(j.anchor_parent) && detail::finite(j.anchor_child), path,
            "anchors must be finite");
    if (j.kind == JointKind::planar_free) {
      ++planar;
      require(j.parent == kGround, path + ".parent", "planar_free joint must attach to ground");
    } else {
      ++revolute;
      require(j.range[0] <= j.range[1], path + ".range", "min must not exceed max");
      require(j.parent != kGround, path + ".parent", "revolute joints attach body to body");
    }
  }
  require(planar == 1, "joints", "exactly one planar_free joint is required");
  for (const auto& b : m.bodies) {
    require(attached.count(b.name) > 0, "bodies", "body '" + b.name + "' is not attached");
  }

  std::set<std::string> muscles;
  for (std::size_t i = 0; i < m.muscles.size(); ++i) {
    const auto& mu = m.muscles[i];
    const std::string path = "muscles[" + std::to_string(i) + "]";
    require(muscles.insert(mu.name).second, path + ".name", "duplicate muscle '" + mu.name + "'");
    require(mu.f_max_iso > 0.0, path + ".f_max_iso", "must be > 0");
    require(mu.optimal_fiber_length > 0.0, path + ".optimal_fiber_length", "must be > 0");
    require(mu.tendon_slack_length > 0.0, path + ".tendon_slack_length", "must be > 0");
    require(mu.max_contraction_velocity > 0.0, path + ".max_contraction_velocity", "must be > 0");
    require(mu.pennation_angle >= 0.0 && mu.pennation_angle < std::numbers::pi / 2,
            path + ".pennation_angle", "must lie in [0, pi/2)");
    require(mu.path.size() >= 2, path + ".path", "needs at least 2 points");
    for (std::size_t k = 0; k < mu.path.size(); ++k) {
      require(known_body(mu.path[k].body), path + ".path[" + std::to_string(k) + "].body",
              "unknown body '" + mu.path[k].body + "'");
    }
  }

  for (std::size_t i = 0; i < m.ligaments.size(); ++i) {
    const auto& l = m.ligaments[i];
    const std::string path = "ligaments[" + std::to_string(i) + "]";
    const auto it = std::find_if(m.joints.begin(), m.joints.end(),
                                 [&](const auto& j) { return j.name == l.joint; });
    require(it != m.joints.end(), path + ".joint", "unknown joint '" + l.joint + "'");
    require(it->kind == JointKind::revolute, path + ".joint", "ligaments need a revolute joint");
    require(l.engage_angle_lo < l.engage_angle_hi, path, "engage_angle_lo must be < engage_angle_hi");
    require(l.stiffness_scale > 0.0, path + ".stiffness_scale", "must be > 0");
    require(l.exponent_rate >= 0.0, path + ".exponent_rate", "must be >= 0");
  }

  std::set<std::string> stations;
  for (std::size_t i = 0; i < m.stations.size(); ++i) {
    const std::string path = "stations[" + std::to_string(i) + "]";
    require(stations.insert(m.stations[i].name).second, path + ".name", "duplicate station");
    require(known_body(m.stations[i].body), path + ".body",
            "unknown body '" + m.stations[i].body + "'");
  }

  require(m.contact.stiffness > 0.0, "contact.stiffness", "must be > 0");
  require(m.contact.exponent > 0.0, "contact.exponent", "must be > 0");
  require(m.contact.dissipation >= 0.0, "contact.dissipation", "must be >= 0");
  require(m.contact.friction >= 0.0, "contact.friction", "must be >= 0");
  require(m.contact.slip_velocity > 0.0, "contact.slip_velocity", "must be > 0");
  require(m.activation.tau_act > 0.0 && m.activation.tau_deact > 0.0, "activation",
          "time constants must be > 0");
  require(m.activation.baseline >= 0.0 && m.activation.baseline <= 1.0, "activation.baseline",
          "must lie in [0, 1]");
  require(m.tendon.stiffness_per_slack > 0.0, "tendon.stiffness_per_slack", "must be > 0");

  const int dof = total_dof(m);
  require(dof <= kMaxDof, "joints", "more than " + std::to_string(kMaxDof) + " DOF");
  require(static_cast<int>(m.muscles.size()) <= kMaxMuscles, "muscles",
          "more than " + std::to_string(kMaxMuscles) + " muscles");
  require(m.initial_q.empty() || static_cast<int>(m.initial_q.size()) == dof, "initial_q",
          "length must equal DOF count");
  require(m.initial_qdot.empty() || static_cast<int>(m.initial_qdot.size()) == dof,
          "initial_qdot", "length must equal DOF count");

  // Default-runner profile.
  std::vector<std::string> issues;
  auto expect = [&](bool ok, std::string msg) {
    if (!ok) issues.push_back(std::move(msg));
  };
  expect(m.bodies.size() == 7, "expected 7 bodies, found " + std::to_string(m.bodies.size()));
  expect(revolute == 6, "expected 6 revolute joints, found " + std::to_string(revolute));
  expect(dof == 9, "expected 9 DOF, found " + std::to_string(dof));
  expect(m.muscles.size() == 18, "expected 18 muscles, found " + std::to_string(m.muscles.size()));
  expect(m.contact_spheres.size() == 4,
         "expected 4 contact spheres, found " + std::to_string(m.contact_spheres.size()));
  for (const auto& mu : m.muscles) {
    expect(mu.f_max_iso >= 557.0 && mu.f_max_iso <= 9594.0,
           "muscle '" + mu.name + "' f_max_iso outside [557, 9594] N");
  }
  for (const char* s : {"head", "torso", "pelvis", "toes_l", "toes_r", "talus_l", "talus_r"}) {
    expect(stations.count(s) > 0, std::string("missing station '") + s + "'");
  }
  expect(std::abs(summed_mass(m) - m.metadata.total_mass) <= 1e-9 * std::max(1.0, m.metadata.total_mass),
         "metadata.total_mass does not equal the summed body masses");
  if (strict && !issues.empty()) {
    std::string msg = "topology violation:";
    for (const auto& s : issues) msg += " " + s + ";";
    throw TopologyError(msg);
  }
  return issues;
}

// ---------------------------------------------------------------------------
// Structured-text (JSON) serialization

namespace detail {

using nlohmann::json;

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  require(j.is_object(), path, "expected an object");
  auto it = j.find(key);
  require(it != j.end(), path + "." + key, "missing field");
  return *it;
}

inline double number(const json& j, const std::string& key, const std::string& path) {
  const auto& v = field(j, key, path);
  require(v.is_number(), path + "." + key, "expected a number");
  return v.get<double>();
}

inline std::string text(const json& j, const std::string& key, const std::string& path) {
  const auto& v = field(j, key, path);
  require(v.is_string(), path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline Vec2 vec2(const json& j, const std::string& key, const std::string& path) {
  const auto& v = field(j, key, path);
  require(v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number(),
          path + "." + key, "expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

inline std::vector<double> numbers(const json& v, const std::string& path) {
  require(v.is_array(), path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i].is_number(), path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

inline const json& array(const json& j, const std::string& key, const std::string& path) {
  const auto& v = field(j, key, path);
  require(v.is_array(), path + "." + key, "expected an array");
  return v;
}

inline json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace detail

inline nlohmann::json model_to_json(const ModelDefinition& m) {
  using detail::to_json;
  using nlohmann::json;
  json doc;
  doc["version"] = kModelSchemaVersion;
  doc["metadata"] = {{"name", m.metadata.name},
                     {"total_mass", m.metadata.total_mass},
                     {"height", m.metadata.height},
                     {"notes", m.metadata.notes}};
  doc["gravity"] = to_json(m.gravity);
  json bodies = json::array();
  for (const auto& b : m.bodies) {
    bodies.push_back({{"name", b.name},
                      {"mass", b.mass},
                      {"inertia_zz", b.inertia_zz},
                      {"com_offset", to_json(b.com_offset)},
                      {"contact_spheres", b.contact_spheres}});
  }
  doc["bodies"] = std::move(bodies);
  json joints = json::array();
  for (const auto& j : m.joints) {
    json e = {{"name", j.name},
              {"parent", j.parent},
              {"child", j.child},
              {"kind", j.kind == JointKind::planar_free ? "planar_free" : "revolute"},
              {"anchor_parent", to_json(j.anchor_parent)},
              {"anchor_child", to_json(j.anchor_child)}};
    if (j.kind == JointKind::revolute) e["range"] = json::array({j.range[0], j.range[1]});
    joints.push_back(std::move(e));
  }
  doc["joints"] = std::move(joints);
  json muscles = json::array();
  for (const auto& mu : m.muscles) {
    json path = json::array();
    for (const auto& p : mu.path) path.push_back({{"body", p.body}, {"point", to_json(p.point)}});
    muscles.push_back({{"name", mu.name},
                       {"f_max_iso", mu.f_max_iso},
                       {"optimal_fiber_length", mu.optimal_fiber_length},
                       {"tendon_slack_length", mu.tendon_slack_length},
                       {"pennation_angle", mu.pennation_angle},
                       {"max_contraction_velocity", mu.max_contraction_velocity},
                       {"path", std::move(path)}});
  }
  doc["muscles"] = std::move(muscles);
  json ligaments = json::array();
  for (const auto& l : m.ligaments) {
    ligaments.push_back({{"joint", l.joint},
                         {"engage_angle_lo", l.engage_angle_lo},
                         {"engage_angle_hi", l.engage_angle_hi},
                         {"stiffness_scale", l.stiffness_scale},
                         {"exponent_rate", l.exponent_rate}});
  }
  doc["ligaments"] = std::move(ligaments);
  json spheres = json::array();
  for (const auto& s : m.contact_spheres) {
    spheres.push_back(
        {{"id", s.id}, {"body", s.body}, {"center", to_json(s.center)}, {"radius", s.radius}});
  }
  doc["contact_spheres"] = std::move(spheres);
  json stations = json::array();
  for (const auto& s : m.stations) {
    stations.push_back({{"name", s.name}, {"body", s.body}, {"point", to_json(s.point)}});
  }
  doc["stations"] = std::move(stations);
  doc["contact"] = {{"stiffness", m.contact.stiffness},
                    {"exponent", m.contact.exponent},
                    {"dissipation", m.contact.dissipation},
                    {"friction", m.contact.friction},
                    {"slip_velocity", m.contact.slip_velocity}};
  doc["activation"] = {{"tau_act", m.activation.tau_act},
                       {"tau_deact", m.activation.tau_deact},
                       {"baseline", m.activation.baseline}};
  doc["tendon"] = {{"compliant", m.tendon.compliant},
                   {"stiffness_per_slack", m.tendon.stiffness_per_slack}};
  doc["muscle_curves"] = {{"active_width", m.curves.active_width},
                          {"passive_shape", m.curves.passive_shape},
                          {"passive_strain", m.curves.passive_strain},
                          {"eccentric_plateau", m.curves.eccentric_plateau},
                          {"concentric_curvature", m.curves.concentric_curvature}};
  doc["initial_state"] = {{"q", m.initial_q}, {"qdot", m.initial_qdot}};
  return doc;
}

// Canonical form: sorted keys, two-space indent, shortest round-trip floats.
inline std::string save_model(const ModelDefinition& m) {
  return model_to_json(m).dump(2) + "\n";
}

inline ModelDefinition model_from_json(const nlohmann::json& doc) {
  using namespace detail;
  ModelDefinition m;
  require(doc.is_object(), "$", "expected an object");
  const std::string version = text(doc, "version", "$");
  require(version == kModelSchemaVersion, "$.version",
          "unsupported version '" + version + "', expected " + kModelSchemaVersion);

  const auto& meta = field(doc, "metadata", "$");
  m.metadata.name = text(meta, "name", "$.metadata");
  m.metadata.total_mass = number(meta, "total_mass", "$.metadata");
  m.metadata.height = number(meta, "height", "$.metadata");
  if (auto it = meta.find("notes"); it != meta.end()) {
    require(it->is_object(), "$.metadata.notes", "expected an object");
    for (const auto& [k, v] : it->items()) {
      require(v.is_string(), "$.metadata.notes." + k, "expected a string");
      m.metadata.notes[k] = v.get<std::string>();
    }
  }
  m.gravity = vec2(doc, "gravity", "$");

  const auto& bodies = array(doc, "bodies", "$");
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const std::string p = "$.bodies[" + std::to_string(i) + "]";
    BodyDef b;
    b.name = text(bodies[i], "name", p);
    b.mass = number(bodies[i], "mass", p);
    b.inertia_zz = number(bodies[i], "inertia_zz", p);
    b.com_offset = vec2(bodies[i], "com_offset", p);
    for (const auto& s : array(bodies[i], "contact_spheres", p)) {
      require(s.is_string(), p + ".contact_spheres", "expected sphere ids");
      b.contact_spheres.push_back(s.get<std::string>());
    }
    m.bodies.push_back(std::move(b));
  }

  const auto& joints = array(doc, "joints", "$");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string p = "$.joints[" + std::to_string(i) + "]";
    JointDef j;
    j.name = text(joints[i], "name", p);
    j.parent = text(joints[i], "parent", p);
    j.child = text(joints[i], "child", p);
    const std::string kind = text(joints[i], "kind", p);
    if (kind == "planar_free") {
      j.kind = JointKind::planar_free;
    } else if (kind == "revolute") {
      j.kind = JointKind::revolute;
      const auto range = numbers(field(joints[i], "range", p), p + ".range");
      require(range.size() == 2, p + ".range", "expected [min, max]");
      j.range = {range[0], range[1]};
    } else {
      throw SchemaError(p + ".kind", "unknown joint kind '" + kind + "'");
    }
    j.anchor_parent = vec2(joints[i], "anchor_parent", p);
    j.anchor_child = vec2(joints[i], "anchor_child", p);
    m.joints.push_back(std::move(j));
  }

  const auto& muscles = array(doc, "muscles", "$");
  for (std::size_t i = 0; i < muscles.size(); ++i) {
    const std::string p = "$.muscles[" + std::to_string(i) + "]";
    MuscleDef mu;
    mu.name = text(muscles[i], "name", p);
    mu.f_max_iso = number(muscles[i], "f_max_iso", p);
    mu.optimal_fiber_length = number(muscles[i], "optimal_fiber_length", p);
    mu.tendon_slack_length = number(muscles[i], "tendon_slack_length", p);
    mu.pennation_angle = number(muscles[i], "pennation_angle", p);
    mu.max_contraction_velocity = number(muscles[i], "max_contraction_velocity", p);
    const auto& path = array(muscles[i], "path", p);
    for (std::size_t k = 0; k < path.size(); ++k) {
      const std::string pp = p + ".path[" + std::to_string(k) + "]";
      mu.path.push_back({text(path[k], "body", pp), vec2(path[k], "point", pp)});
    }
    m.muscles.push_back(std::move(mu));
  }

  const auto& ligaments = array(doc, "ligaments", "$");
  for (std::size_t i = 0; i < ligaments.size(); ++i) {
    const std::string p = "$.ligaments[" + std::to_string(i) + "]";
    LigamentDef l;
    l.joint = text(ligaments[i], "joint", p);
    l.engage_angle_lo = number(ligaments[i], "engage_angle_lo", p);
    l.engage_angle_hi = number(ligaments[i], "engage_angle_hi", p);
    l.stiffness_scale = number(ligaments[i], "stiffness_scale", p);
    l.exponent_rate = number(ligaments[i], "exponent_rate", p);
    m.ligaments.push_back(std::move(l));
  }

  const auto& spheres = array(doc, "contact_spheres", "$");
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    const std::string p = "$.contact_spheres[" + std::to_string(i) + "]";
    m.contact_spheres.push_back({text(spheres[i], "id", p), text(spheres[i], "body", p),
                                 vec2(spheres[i], "center", p), number(spheres[i], "radius", p)});
  }

  const auto& stations = array(doc, "stations", "$");
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const std::string p = "$.stations[" + std::to_string(i) + "]";
    m.stations.push_back(
        {text(stations[i], "name", p), text(stations[i], "body", p), vec2(stations[i], "point", p)});
  }

  const auto& c = field(doc, "contact", "$");
  m.contact = {number(c, "stiffness", "$.contact"), number(c, "exponent", "$.contact"),
               number(c, "dissipation", "$.contact"), number(c, "friction", "$.contact"),
               number(c, "slip_velocity", "$.contact")};
  const auto& a = field(doc, "activation", "$");
  m.activation = {number(a, "tau_act", "$.activation"), number(a, "tau_deact", "$.activation"),
                  number(a, "baseline", "$.activation")};
  const auto& t = field(doc, "tendon", "$");
  const auto& compliant = field(t, "compliant", "$.tendon");
  require(compliant.is_boolean(), "$.tendon.compliant", "expected a boolean");
  m.tendon = {compliant.get<bool>(), number(t, "stiffness_per_slack", "$.tendon")};
  const auto& mc = field(doc, "muscle_curves", "$");
  m.curves = {number(mc, "active_width", "$.muscle_curves"),
              number(mc, "passive_shape", "$.muscle_curves"),
              number(mc, "passive_strain", "$.muscle_curves"),
              number(mc, "eccentric_plateau", "$.muscle_curves"),
              number(mc, "concentric_curvature", "$.muscle_curves")};
  const auto& init = field(doc, "initial_state", "$");
  m.initial_q = numbers(field(init, "q", "$.initial_state"), "$.initial_state.q");
  m.initial_qdot = numbers(field(init, "qdot", "$.initial_state"), "$.initial_state.qdot");
  return m;
}

// Parses and validates a model document. Per-type invariants and referential
// integrity always throw; default-profile topology deviations throw only when
// `strict`, otherwise they are returned through `warnings`.
inline ModelDefinition load_model(std::string_view document, bool strict = false,
                                  std::vector<std::string>* warnings = nullptr) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("$", std::string("not valid structured text: ") + e.what());
  }
  ModelDefinition m = model_from_json(doc);
  auto issues = validate(m, strict);
  if (warnings) *warnings = std::move(issues);
  return m;
}

}  // namespace musclerun
