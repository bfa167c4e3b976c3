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
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "musclerun/common.hpp"
#include "musclerun/contact.hpp"
#include "musclerun/kinematics.hpp"
#include "musclerun/muscle.hpp"

namespace musclerun {

inline constexpr double kSubstep = 2e-4;      // s
inline constexpr int kSubstepsPerControl = 50;
inline constexpr double kControlStep = 0.01;  // s
inline constexpr double kDivergenceLimit = 1e6;

// Spatial inertia of a rigid body about the world origin, from its mass,
// world COM position and central rotational inertia.
inline SpatialInertia spatial_inertia(double mass, double inertia, const Vec2& com) {
  SpatialInertia I;
  I << inertia + mass * com.squaredNorm(), -mass * com.y(), mass * com.x(),
      -mass * com.y(), mass, 0.0,
      mass * com.x(), 0.0, mass;
  return I;
}

// Spatial force cross product v x* f.
inline Spatial cross_force(const Spatial& v, const Spatial& f) {
  return {v[1] * f[2] - v[2] * f[1], -v[0] * f[2], v[0] * f[1]};
}

// Joint-space inertia by the composite-rigid-body method.
inline MatN mass_matrix(const Model& m, const Kinematics& kin) {
  const int n = m.dof();
  std::array<SpatialInertia, kMaxDof> composite;
  for (int b = 0; b < m.body_count(); ++b) {
    const auto& body = m.body(b);
    composite[b] = spatial_inertia(body.mass, body.inertia, kin.com[b]);
  }
  for (int b = m.body_count() - 1; b >= 0; --b) {
    if (m.body(b).parent >= 0) composite[m.body(b).parent] += composite[b];
  }
  std::array<Spatial, kMaxDof> S;
  for (int k = 0; k < n; ++k) S[k] = motion_subspace(m, kin, k);
  MatN M = MatN::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const Spatial F = composite[m.dof_body(i)] * S[i];
    for (int j : m.chain(m.dof_body(i))) {
      if (j > i) break;
      M(i, j) = S[j].dot(F);
      M(j, i) = M(i, j);
    }
  }
  return M;
}

// Velocity-product and gravity terms C(q, qdot) qdot - G(q), by recursive
// Newton-Euler with qddot = 0.
inline VecN bias_forces(const Model& m, const Kinematics& kin, const VecN& qdot,
                        bool with_gravity = true) {
  const int n = m.dof();
  const Vec2& g = m.definition().gravity;
  const Spatial base_accel = with_gravity ? Spatial(0.0, -g.x(), -g.y()) : Spatial::Zero();
  std::array<Spatial, kMaxDof> vel;
  std::array<Spatial, kMaxDof> acc;
  std::array<Spatial, kMaxDof> force;
  for (int b = 0; b < m.body_count(); ++b) {
    const int p = m.body(b).parent;
    Spatial v = p >= 0 ? vel[p] : Spatial::Zero();
    Spatial a = p >= 0 ? acc[p] : base_accel;
    const auto& joint = m.joint(b);
    const int last = joint.first_dof + joint_dof(joint.kind);
    for (int k = joint.first_dof; k < last; ++k) {
      v += motion_subspace(m, kin, k) * qdot[k];
      a += motion_subspace_rate(m, kin, k) * qdot[k];
    }
    vel[b] = v;
    acc[b] = a;
    const auto& body = m.body(b);
    const SpatialInertia I = spatial_inertia(body.mass, body.inertia, kin.com[b]);
    force[b] = I * a + cross_force(v, I * v);
  }
  for (int b = m.body_count() - 1; b >= 0; --b) {
    if (m.body(b).parent >= 0) force[m.body(b).parent] += force[b];
  }
  VecN tau(n);
  for (int k = 0; k < n; ++k) tau[k] = motion_subspace(m, kin, k).dot(force[m.dof_body(k)]);
  return tau;
}

// Generalized forces by source. `gravity` is informational: forward_dynamics
// applies gravity through the bias term, so total() is what drives qddot
// together with the velocity-product terms.
struct GeneralizedForces {
  VecN muscle;
  VecN ligament;
  VecN contact;
  VecN gravity;

  static GeneralizedForces zero(int n) {
    return {VecN::Zero(n), VecN::Zero(n), VecN::Zero(n), VecN::Zero(n)};
  }
  VecN applied() const { return muscle + ligament + contact; }
  VecN total() const { return applied() + gravity; }
};

inline VecN gravity_forces(const Model& m, const Kinematics& kin) {
  VecN tau = VecN::Zero(m.dof());
  const Vec2& g = m.definition().gravity;
  for (int b = 0; b < m.body_count(); ++b) {
    accumulate_point_force(m, kin, b, kin.com[b], m.body(b).mass * g, tau);
  }
  return tau;
}

// Solves M(q) qddot = tau.applied() - bias(q, qdot); locked DOFs get qddot = 0.
inline VecN forward_dynamics(const Model& m, const SimState& s, const Kinematics& kin,
                             const GeneralizedForces& tau) {
  const int n = m.dof();
  const MatN M = mass_matrix(m, kin);
  const VecN rhs = tau.applied() - bias_forces(m, kin, s.qdot);
  const auto& locked = m.options().locked;
  std::array<int, kMaxDof> free{};
  int nf = 0;
  for (int k = 0; k < n; ++k) {
    if (!locked[k]) free[nf++] = k;
  }
  VecN qddot = VecN::Zero(n);
  if (nf == n) {
    qddot = M.llt().solve(rhs);
    return qddot;
  }
  MatN Mf(nf, nf);
  VecN rf(nf);
  for (int i = 0; i < nf; ++i) {
    rf[i] = rhs[free[i]];
    for (int j = 0; j < nf; ++j) Mf(i, j) = M(free[i], free[j]);
  }
  const VecN xf = Mf.llt().solve(rf);
  for (int i = 0; i < nf; ++i) qddot[free[i]] = xf[i];
  return qddot;
}

inline VecN forward_dynamics(const Model& m, const SimState& s, const GeneralizedForces& tau) {
  return forward_dynamics(m, s, forward_kinematics(m, s), tau);
}

inline double kinetic_energy(const Model& m, const SimState& s) {
  const auto kin = forward_kinematics(m, s);
  return 0.5 * s.qdot.dot(mass_matrix(m, kin) * s.qdot);
}

inline double potential_energy(const Model& m, const SimState& s) {
  const auto kin = forward_kinematics(m, s);
  double pe = 0.0;
  for (int b = 0; b < m.body_count(); ++b) {
    pe -= m.body(b).mass * m.definition().gravity.dot(kin.com[b]);
  }
  return pe;
}

inline Vec2 linear_momentum(const Model& m, const Kinematics& kin) {
  Vec2 p = Vec2::Zero();
  for (int b = 0; b < m.body_count(); ++b) p += m.body(b).mass * kin.com_vel[b];
  return p;
}

// What happened inside one substep, for telemetry.
struct SubstepReport {
  double ligament_load = 0.0;   // L = sum of squared ligament torques
  double max_penetration = 0.0;
  bool fiber_clamped = false;
  std::vector<ContactSample> contacts;
  GeneralizedForces forces;
};

// All generalized forces at the current state. Fills `report` when given.
inline GeneralizedForces compute_forces(const Model& m, const SimState& s, const Kinematics& kin,
                                        std::span<const Obstacle> course,
                                        SubstepReport* report = nullptr,
                                        VecM* solved_fibers = nullptr) {
  const int n = m.dof();
  const auto& opt = m.options();
  auto tau = GeneralizedForces::zero(n);
  if (opt.muscles && m.muscle_count() > 0) {
    const auto& d = m.definition();
    for (int i = 0; i < m.muscle_count(); ++i) {
      const double lf = s.fiber_lengths.size() > i ? s.fiber_lengths[i] : 0.0;
      const auto e = evaluate_muscle(m, kin, s.qdot, i, s.activations[i], lf);
      tau.muscle -= e.path.dl_dq * e.force.tendon;
      if (solved_fibers && d.tendon.compliant) (*solved_fibers)[i] = e.force.fiber_length;
      if (report && e.force.clamped) report->fiber_clamped = true;
    }
  }
  double load = 0.0;
  if (opt.ligaments) {
    for (const auto& lig : m.ligaments()) {
      const double t = ligament_torque(s.q[lig.dof], lig.def);
      tau.ligament[lig.dof] += t;
      load += t * t;
    }
  }
  if (opt.contact) {
    auto samples = collide(m, kin, course, m.definition().contact);
    tau.contact = contact_generalized_forces(m, kin, samples);
    if (report) {
      for (const auto& c : samples) report->max_penetration = std::max(report->max_penetration, c.depth);
      report->contacts = std::move(samples);
    }
  }
  if (report) {
    tau.gravity = gravity_forces(m, kin);
    report->ligament_load = load;
    report->forces = tau;
  }
  return tau;
}

namespace detail {

inline void check_finite(const Model& m, const SimState& s) {
  for (int k = 0; k < m.dof(); ++k) {
    if (!std::isfinite(s.q[k]) || std::abs(s.q[k]) > kDivergenceLimit) {
      throw SimulationDiverged(m.coordinate_name(k), s.q[k]);
    }
    if (!std::isfinite(s.qdot[k]) || std::abs(s.qdot[k]) > kDivergenceLimit) {
      throw SimulationDiverged(m.coordinate_name(k) + "_speed", s.qdot[k]);
    }
  }
  for (int i = 0; i < s.activations.size(); ++i) {
    if (!std::isfinite(s.activations[i])) {
      throw SimulationDiverged(m.definition().muscles[i].name + "_activation", s.activations[i]);
    }
  }
}

}  // namespace detail

// One semi-implicit Euler step: qdot += h qddot, then q += h qdot; activations
// take their exact first-order update for the held excitations.
inline SimState integrate_substep(const Model& m, const SimState& s, const VecM& excitations,
                                  double h, std::span<const Obstacle> course = {},
                                  SubstepReport* report = nullptr) {
  const auto kin = forward_kinematics(m, s);
  SimState next = s;
  const auto tau = compute_forces(m, s, kin, course, report, &next.fiber_lengths);
  const VecN qddot = forward_dynamics(m, s, kin, tau);
  const auto& locked = m.options().locked;
  for (int k = 0; k < m.dof(); ++k) {
    if (locked[k]) continue;
    next.qdot[k] = s.qdot[k] + h * qddot[k];
    next.q[k] = s.q[k] + h * next.qdot[k];
  }
  const auto& act = m.definition().activation;
  for (int i = 0; i < m.muscle_count(); ++i) {
    next.activations[i] = activation_step(s.activations[i], excitations[i], h, act.tau_act, act.tau_deact);
  }
  next.time = s.time + h;
  detail::check_finite(m, next);
  return next;
}

struct StepTelemetry {
  double ligament_integral = 0.0;  // sum over substeps of sqrt(L) h
  std::vector<Vec2> sphere_forces;  // per contact sphere, at the last substep
  std::array<double, kSubstepsPerControl> max_penetration{};
  bool fiber_clamped = false;
  int substeps = 0;
};

// Holds the excitations for one 10 ms window of 50 substeps. Excitations are
// clamped into [0, 1].
inline std::pair<SimState, StepTelemetry> advance_control_step(const Model& m, const SimState& s,
                                                               std::span<const double> excitations,
                                                               std::span<const Obstacle> course = {},
                                                               int substeps = kSubstepsPerControl) {
  VecM e(m.muscle_count());
  for (int i = 0; i < m.muscle_count(); ++i) {
    const double v = i < static_cast<int>(excitations.size()) ? excitations[i] : 0.0;
    e[i] = std::isnan(v) ? v : std::clamp(v, 0.0, 1.0);
  }
  const double h = kControlStep / substeps;
  StepTelemetry tel;
  tel.sphere_forces.assign(m.spheres().size(), Vec2::Zero());
  SimState cur = s;
  SubstepReport report;
  for (int i = 0; i < substeps; ++i) {
    report = SubstepReport{};
    cur = integrate_substep(m, cur, e, h, course, &report);
    tel.ligament_integral += std::sqrt(report.ligament_load) * h;
    if (i < kSubstepsPerControl) tel.max_penetration[i] = report.max_penetration;
    tel.fiber_clamped = tel.fiber_clamped || report.fiber_clamped;
  }
  for (const auto& c : report.contacts) tel.sphere_forces[c.sphere] += c.force;
  tel.substeps = substeps;
  cur.time = s.time + kControlStep;
  return {cur, tel};
}

}  // namespace musclerun
