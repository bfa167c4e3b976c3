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

#include <array>
#include <span>
#include <string>
#include <vector>

#include "musclerun/common.hpp"
#include "musclerun/model.hpp"

namespace musclerun {

// Which parts of the force model are active, and which DOFs are welded.
// Locked DOFs keep their current position and velocity.
struct SimOptions {
  std::array<bool, kMaxDof> locked{};
  bool muscles = true;
  bool ligaments = true;
  bool contact = true;

  bool operator==(const SimOptions&) const = default;
};

// A validated ModelDefinition with ids resolved to indices. Bodies are
// renumbered in joint order, so body k is the child of joint k and every
// parent index is smaller than its child's.
class Model {
 public:
  enum class DofKind { translate_x, translate_y, rotate };

  struct Body {
    std::string name;
    int parent = -1;  // -1: ground
    double mass = 0.0;
    double inertia = 0.0;
    Vec2 com = Vec2::Zero();
  };

  struct Joint {
    std::string name;
    JointKind kind = JointKind::revolute;
    Vec2 anchor_parent = Vec2::Zero();
    Vec2 anchor_child = Vec2::Zero();
    int first_dof = 0;
  };

  struct Point {
    int body = 0;
    Vec2 local = Vec2::Zero();
  };

  struct Muscle {
    std::vector<Point> path;
  };

  struct Ligament {
    int dof = 0;
    LigamentDef def;
  };

  struct Sphere {
    int body = 0;
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
  };

  explicit Model(ModelDefinition def, bool strict = false) : def_(std::move(def)) {
    validate(def_, strict);
    compile();
  }

  const ModelDefinition& definition() const noexcept { return def_; }
  const SimOptions& options() const noexcept { return options_; }

  Model with_options(const SimOptions& o) const {
    Model copy = *this;
    copy.options_ = o;
    return copy;
  }

  int dof() const noexcept { return dof_; }
  int body_count() const noexcept { return static_cast<int>(bodies_.size()); }
  int muscle_count() const noexcept { return static_cast<int>(muscles_.size()); }

  const Body& body(int i) const { return bodies_[i]; }
  const Joint& joint(int i) const { return joints_[i]; }
  const std::vector<Muscle>& muscles() const noexcept { return muscles_; }
  const std::vector<Ligament>& ligaments() const noexcept { return ligaments_; }
  const std::vector<Sphere>& spheres() const noexcept { return spheres_; }
  const std::vector<Point>& stations() const noexcept { return stations_; }

  DofKind dof_kind(int k) const { return dof_kind_[k]; }
  int dof_joint(int k) const { return dof_joint_[k]; }
  // Body moved directly by DOF k.
  int dof_body(int k) const { return dof_joint_[k]; }
  // DOFs from the root down to and including body b's own joint, ascending.
  std::span<const int> chain(int b) const { return chains_[b]; }

  const std::string& coordinate_name(int k) const { return coordinate_names_[k]; }
  int coordinate_index(const std::string& name) const {
    for (int k = 0; k < dof_; ++k) {
      if (coordinate_names_[k] == name) return k;
    }
    throw Error("unknown coordinate '" + name + "'");
  }
  int body_index(const std::string& name) const {
    for (int b = 0; b < body_count(); ++b) {
      if (bodies_[b].name == name) return b;
    }
    throw Error("unknown body '" + name + "'");
  }
  int station_index(const std::string& name) const {
    for (std::size_t i = 0; i < def_.stations.size(); ++i) {
      if (def_.stations[i].name == name) return static_cast<int>(i);
    }
    throw Error("unknown station '" + name + "'");
  }
  int muscle_index(const std::string& name) const {
    for (std::size_t i = 0; i < def_.muscles.size(); ++i) {
      if (def_.muscles[i].name == name) return static_cast<int>(i);
    }
    throw Error("unknown muscle '" + name + "'");
  }

  double total_mass() const noexcept { return total_mass_; }
  double body_weight() const noexcept { return total_mass_ * def_.gravity.norm(); }

 private:
  void compile() {
    bodies_.clear();
    joints_.clear();
    for (const auto& jd : def_.joints) {
      const auto it = std::find_if(def_.bodies.begin(), def_.bodies.end(),
                                   [&](const auto& b) { return b.name == jd.child; });
      Body b;
      b.name = it->name;
      b.parent = jd.parent == kGround ? -1 : body_index(jd.parent);
      b.mass = it->mass;
      b.inertia = it->inertia_zz;
      b.com = it->com_offset;
      Joint j;
      j.name = jd.name;
      j.kind = jd.kind;
      j.anchor_parent = jd.anchor_parent;
      j.anchor_child = jd.anchor_child;
      j.first_dof = dof_;
      const int joint_index = static_cast<int>(joints_.size());
      if (jd.kind == JointKind::planar_free) {
        for (auto [kind, suffix] : {std::pair{DofKind::translate_x, "_tx"},
                                    std::pair{DofKind::translate_y, "_ty"},
                                    std::pair{DofKind::rotate, "_tilt"}}) {
          dof_kind_[dof_] = kind;
          dof_joint_[dof_] = joint_index;
          coordinate_names_.push_back(b.name + suffix);
          ++dof_;
        }
      } else {
        dof_kind_[dof_] = DofKind::rotate;
        dof_joint_[dof_] = joint_index;
        coordinate_names_.push_back(jd.name);
        ++dof_;
      }
      std::vector<int> chain = b.parent >= 0 ? chains_[b.parent] : std::vector<int>{};
      for (int k = j.first_dof; k < dof_; ++k) chain.push_back(k);
      chains_.push_back(std::move(chain));
      bodies_.push_back(std::move(b));
      joints_.push_back(std::move(j));
    }
    total_mass_ = 0.0;
    for (const auto& b : bodies_) total_mass_ += b.mass;

    muscles_.clear();
    for (const auto& md : def_.muscles) {
      Muscle mu;
      for (const auto& p : md.path) mu.path.push_back({body_index(p.body), p.point});
      muscles_.push_back(std::move(mu));
    }
    ligaments_.clear();
    for (const auto& ld : def_.ligaments) {
      ligaments_.push_back({coordinate_index(ld.joint), ld});
    }
    spheres_.clear();
    for (const auto& sd : def_.contact_spheres) {
      spheres_.push_back({body_index(sd.body), sd.center, sd.radius});
    }
    stations_.clear();
    for (const auto& st : def_.stations) stations_.push_back({body_index(st.body), st.point});
  }

  ModelDefinition def_;
  SimOptions options_;
  int dof_ = 0;
  double total_mass_ = 0.0;
  std::vector<Body> bodies_;
  std::vector<Joint> joints_;
  std::vector<std::vector<int>> chains_;
  std::array<DofKind, kMaxDof> dof_kind_{};
  std::array<int, kMaxDof> dof_joint_{};
  std::vector<std::string> coordinate_names_;
  std::vector<Muscle> muscles_;
  std::vector<Ligament> ligaments_;
  std::vector<Sphere> spheres_;
  std::vector<Point> stations_;
};

struct SimState {
  VecN q;
  VecN qdot;
  VecM activations;
  VecM fiber_lengths;  // compliant-tendon mode only
  double time = 0.0;

  bool operator==(const SimState& o) const {
    return q == o.q && qdot == o.qdot && activations == o.activations &&
           fiber_lengths == o.fiber_lengths && time == o.time;
  }
};

// State at the model's documented initial pose, activations at baseline.
inline SimState initial_state(const Model& m) {
  const auto& d = m.definition();
  SimState s;
  s.q = VecN::Zero(m.dof());
  s.qdot = VecN::Zero(m.dof());
  for (int k = 0; k < m.dof() && k < static_cast<int>(d.initial_q.size()); ++k) s.q[k] = d.initial_q[k];
  for (int k = 0; k < m.dof() && k < static_cast<int>(d.initial_qdot.size()); ++k) {
    s.qdot[k] = d.initial_qdot[k];
  }
  s.activations = VecM::Constant(m.muscle_count(), d.activation.baseline);
  s.fiber_lengths = VecM::Zero(m.muscle_count());
  for (int i = 0; i < m.muscle_count(); ++i) {
    s.fiber_lengths[i] = d.muscles[i].optimal_fiber_length;
  }
  return s;
}

struct Kinematics {
  int bodies = 0;
  std::array<Vec2, kMaxDof> origin;      // body frame origin, world
  std::array<Vec2, kMaxDof> origin_vel;
  std::array<double, kMaxDof> angle{};
  std::array<double, kMaxDof> omega{};
  std::array<Vec2, kMaxDof> com;
  std::array<Vec2, kMaxDof> com_vel;
  std::array<Vec2, kMaxDof> pivot;       // joint k rotation point, world
  std::array<Vec2, kMaxDof> pivot_vel;
  Vec2 center_of_mass = Vec2::Zero();
  Vec2 center_of_mass_vel = Vec2::Zero();

  Vec2 point(int body, const Vec2& local) const {
    return origin[body] + rotate(angle[body], local);
  }
  Vec2 point_velocity(int body, const Vec2& local) const {
    return origin_vel[body] + omega[body] * perp(rotate(angle[body], local));
  }
};

inline Kinematics forward_kinematics(const Model& m, const SimState& s) {
  Kinematics k;
  k.bodies = m.body_count();
  double mass = 0.0;
  for (int b = 0; b < m.body_count(); ++b) {
    const auto& body = m.body(b);
    const auto& j = m.joint(b);
    const int d = j.first_dof;
    if (j.kind == JointKind::planar_free) {
      k.pivot[b] = j.anchor_parent + Vec2(s.q[d], s.q[d + 1]);
      k.pivot_vel[b] = Vec2(s.qdot[d], s.qdot[d + 1]);
      k.angle[b] = s.q[d + 2];
      k.omega[b] = s.qdot[d + 2];
    } else {
      const int p = body.parent;
      const Vec2 arm = rotate(k.angle[p], j.anchor_parent);
      k.pivot[b] = k.origin[p] + arm;
      k.pivot_vel[b] = k.origin_vel[p] + k.omega[p] * perp(arm);
      k.angle[b] = k.angle[p] + s.q[d];
      k.omega[b] = k.omega[p] + s.qdot[d];
    }
    const Vec2 back = rotate(k.angle[b], j.anchor_child);
    k.origin[b] = k.pivot[b] - back;
    k.origin_vel[b] = k.pivot_vel[b] - k.omega[b] * perp(back);
    k.com[b] = k.point(b, body.com);
    k.com_vel[b] = k.point_velocity(b, body.com);
    k.center_of_mass += body.mass * k.com[b];
    k.center_of_mass_vel += body.mass * k.com_vel[b];
    mass += body.mass;
  }
  k.center_of_mass /= mass;
  k.center_of_mass_vel /= mass;
  return k;
}

// Motion subspace of DOF k: spatial velocity per unit qdot_k.
inline Spatial motion_subspace(const Model& m, const Kinematics& k, int dof) {
  switch (m.dof_kind(dof)) {
    case Model::DofKind::translate_x: return {0.0, 1.0, 0.0};
    case Model::DofKind::translate_y: return {0.0, 0.0, 1.0};
    case Model::DofKind::rotate: {
      const Vec2& r = k.pivot[m.dof_joint(dof)];
      return {1.0, r.y(), -r.x()};
    }
  }
  return Spatial::Zero();
}

// Time derivative of the motion subspace (the pivot moves with its parent).
inline Spatial motion_subspace_rate(const Model& m, const Kinematics& k, int dof) {
  if (m.dof_kind(dof) != Model::DofKind::rotate) return Spatial::Zero();
  const Vec2& rd = k.pivot_vel[m.dof_joint(dof)];
  return {0.0, rd.y(), -rd.x()};
}

// World-point Jacobian: column k is d(point)/dq_k for a point fixed on `body`
// currently at world position `p`.
using PointJacobian = Eigen::Matrix<double, 2, Eigen::Dynamic, 0, 2, kMaxDof>;

inline PointJacobian point_jacobian(const Model& m, const Kinematics& k, int body, const Vec2& p) {
  PointJacobian J = PointJacobian::Zero(2, m.dof());
  for (int d : m.chain(body)) {
    const Spatial S = motion_subspace(m, k, d);
    J(0, d) = S[1] - S[0] * p.y();
    J(1, d) = S[2] + S[0] * p.x();
  }
  return J;
}

// Generalized force of a world-frame force applied at world point p on `body`.
inline void accumulate_point_force(const Model& m, const Kinematics& k, int body, const Vec2& p,
                                   const Vec2& force, VecN& tau) {
  const double moment = cross(p, force);
  for (int d : m.chain(body)) {
    const Spatial S = motion_subspace(m, k, d);
    tau[d] += S[0] * moment + S[1] * force.x() + S[2] * force.y();
  }
}

}  // namespace musclerun
