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
#include <cmath>

#include "musclerun/curves.hpp"
#include "musclerun/kinematics.hpp"
#include "musclerun/model.hpp"

namespace musclerun {

// Exact solution of da/dt = (e - a)/tau over h with e held constant. The time
// constant is tau_act while rising (e > a) and tau_deact otherwise.
inline double activation_step(double a, double e, double h, double tau_act = 0.01,
                              double tau_deact = 0.04) {
  const double tau = e > a ? tau_act : tau_deact;
  const double next = e + (a - e) * std::exp(-h / tau);
  return std::clamp(next, 0.0, 1.0);
}

struct MuscleState {
  double activation = 0.0;
  double fiber_length = 0.0;  // compliant mode only
  double mtu_length = 0.0;
  double mtu_velocity = 0.0;
};

struct MusclePath {
  double length = 0.0;
  VecN dl_dq;  // moment arms are -dl_dq
};

// Polyline length through the attachment points and its exact gradient.
inline MusclePath mtu_length_and_jacobian(const Model& m, const Kinematics& kin, int muscle) {
  const auto& path = m.muscles()[muscle].path;
  MusclePath out;
  out.dl_dq = VecN::Zero(m.dof());
  Vec2 prev = kin.point(path[0].body, path[0].local);
  PointJacobian prev_j = point_jacobian(m, kin, path[0].body, prev);
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec2 cur = kin.point(path[i].body, path[i].local);
    PointJacobian cur_j = point_jacobian(m, kin, path[i].body, cur);
    const Vec2 seg = cur - prev;
    const double len = seg.norm();
    out.length += len;
    if (len > 0.0) {
      const Vec2 u = seg / len;
      out.dl_dq += ((cur_j - prev_j).transpose() * u);
    }
    prev = cur;
    prev_j = std::move(cur_j);
  }
  return out;
}

struct MuscleForce {
  double muscle = 0.0;        // F_muscle along the fibers, N
  double tendon = 0.0;        // F_tendon = F_muscle cos(alpha), N
  double fiber_length = 0.0;  // m
  bool clamped = false;       // fiber length hit the 1% floor
};

inline double fiber_length_floor(const MuscleDef& md) { return 0.01 * md.optimal_fiber_length; }

inline double muscle_force_at(const MuscleDef& md, double activation, double fiber_length,
                              double fiber_velocity, const MuscleCurves& curves) {
  const double l = fiber_length / md.optimal_fiber_length;
  const double v = fiber_velocity / (md.optimal_fiber_length * md.max_contraction_velocity);
  return md.f_max_iso *
         (activation * curves.active(l) * curves.velocity(v) + curves.passive(l));
}

// Rigid tendon unless `compliant`, in which case s.fiber_length is taken as the
// solved equilibrium fiber length.
inline MuscleForce muscle_force(const MuscleDef& md, const MuscleState& s, const MuscleCurves& curves,
                                bool compliant = false) {
  const double cos_a = std::cos(md.pennation_angle);
  MuscleForce f;
  f.fiber_length = compliant ? s.fiber_length : (s.mtu_length - md.tendon_slack_length) / cos_a;
  const double floor = fiber_length_floor(md);
  if (f.fiber_length < floor) {
    f.fiber_length = floor;
    f.clamped = true;
  }
  const double fiber_velocity = s.mtu_velocity / cos_a;
  f.muscle = muscle_force_at(md, s.activation, f.fiber_length, fiber_velocity, curves);
  f.tendon = std::max(0.0, f.muscle * cos_a);
  return f;
}

inline double tendon_force(const MuscleDef& md, double tendon_length, double stiffness_per_slack) {
  const double stretch = tendon_length - md.tendon_slack_length;
  if (stretch <= 0.0) return 0.0;
  return stiffness_per_slack * md.f_max_iso * stretch / md.tendon_slack_length;
}

struct TendonEquilibrium {
  double fiber_length = 0.0;
  double residual = 0.0;  // tendon-curve force minus F_muscle cos(alpha), N
  int iterations = 0;
  bool fallback = false;  // root not bracketed; rigid-tendon value returned
};

// Bisection on fiber length for F_tendon(l_mtu - l_f cos a) = F_muscle(l_f) cos a.
// Fiber velocity in the force-velocity term uses the rigid-tendon estimate.
inline TendonEquilibrium solve_tendon_equilibrium(const MuscleDef& md, double mtu_length,
                                                  double activation, const MuscleCurves& curves,
                                                  double stiffness_per_slack = 30.0,
                                                  double mtu_velocity = 0.0) {
  const double cos_a = std::cos(md.pennation_angle);
  const double fiber_velocity = mtu_velocity / cos_a;
  const double tol = 1e-6 * md.f_max_iso;
  auto residual = [&](double lf) {
    return tendon_force(md, mtu_length - lf * cos_a, stiffness_per_slack) -
           muscle_force_at(md, activation, lf, fiber_velocity, curves) * cos_a;
  };
  TendonEquilibrium out;
  double lo = fiber_length_floor(md);
  double hi = std::max(lo, mtu_length / cos_a);
  double g_lo = residual(lo);
  const double g_hi = residual(hi);
  if (!(g_lo >= 0.0 && g_hi <= 0.0)) {
    out.fallback = true;
    out.fiber_length = std::max(lo, (mtu_length - md.tendon_slack_length) / cos_a);
    out.residual = residual(out.fiber_length);
    return out;
  }
  if (std::abs(g_lo) < tol) return {lo, g_lo, 0, false};
  if (std::abs(g_hi) < tol) return {hi, g_hi, 0, false};
  double mid = lo;
  double g_mid = g_lo;
  for (int it = 1; it <= 100; ++it) {
    mid = 0.5 * (lo + hi);
    g_mid = residual(mid);
    out.iterations = it;
    if (std::abs(g_mid) < tol) break;
    if (g_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.fiber_length = mid;
  out.residual = g_mid;
  return out;
}

// Per-muscle evaluation at one instant, shared by the force and telemetry paths.
struct MuscleEvaluation {
  MusclePath path;
  MuscleState state;
  MuscleForce force;
};

inline MuscleEvaluation evaluate_muscle(const Model& m, const Kinematics& kin, const VecN& qdot,
                                        int i, double activation, double fiber_length) {
  const auto& d = m.definition();
  const auto& md = d.muscles[i];
  MuscleEvaluation e;
  e.path = mtu_length_and_jacobian(m, kin, i);
  e.state.activation = activation;
  e.state.mtu_length = e.path.length;
  e.state.mtu_velocity = e.path.dl_dq.dot(qdot);
  e.state.fiber_length = fiber_length;
  if (d.tendon.compliant) {
    e.state.fiber_length = solve_tendon_equilibrium(md, e.path.length, activation, d.curves,
                                                    d.tendon.stiffness_per_slack,
                                                    e.state.mtu_velocity)
                               .fiber_length;
  }
  e.force = muscle_force(md, e.state, d.curves, d.tendon.compliant);
  return e;
}

// tau = sum over muscles of (-dL/dq) * F_tendon.
inline VecN apply_muscle_forces(const Model& m, const Kinematics& kin, const VecN& qdot,
                                const VecM& activations, const VecM& fiber_lengths,
                                VecM* tendon_forces = nullptr, VecM* solved_fibers = nullptr) {
  VecN tau = VecN::Zero(m.dof());
  for (int i = 0; i < m.muscle_count(); ++i) {
    const double lf = fiber_lengths.size() > i ? fiber_lengths[i] : 0.0;
    const auto e = evaluate_muscle(m, kin, qdot, i, activations[i], lf);
    tau -= e.path.dl_dq * e.force.tendon;
    if (tendon_forces) (*tendon_forces)[i] = e.force.tendon;
    if (solved_fibers) (*solved_fibers)[i] = e.force.fiber_length;
  }
  return tau;
}

}  // namespace musclerun
