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

#include <cmath>
#include <span>
#include <vector>

#include "musclerun/kinematics.hpp"
#include "musclerun/model.hpp"

namespace musclerun {

// A ground-fixed ball; y is the vertical offset of its center from ground level.
struct Obstacle {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;

  bool operator==(const Obstacle&) const = default;
};

// F = k x^n (1 + 1.5 c xdot) for x > 0, never attractive.
inline double hunt_crossley_normal(double depth, double rate, const ContactParams& p) {
  if (depth <= 0.0) return 0.0;
  const double f = p.stiffness * std::pow(depth, p.exponent) * (1.0 + 1.5 * p.dissipation * rate);
  return f > 0.0 ? f : 0.0;
}

inline constexpr int kGroundCounterpart = -1;

struct ContactSample {
  int sphere = 0;
  int counterpart = kGroundCounterpart;  // obstacle index otherwise
  double depth = 0.0;
  double rate = 0.0;
  Vec2 normal = Vec2::Zero();
  Vec2 force = Vec2::Zero();  // on the sphere's body
  Vec2 point = Vec2::Zero();  // application point, world
};

namespace detail {

inline void resolve_contact(const Model& m, const Kinematics& kin, int sphere, int counterpart,
                            const Vec2& center, const Vec2& center_vel, const Vec2& normal,
                            double depth, const ContactParams& p, std::vector<ContactSample>& out) {
  const auto& s = m.spheres()[sphere];
  ContactSample c;
  c.sphere = sphere;
  c.counterpart = counterpart;
  c.depth = depth;
  c.rate = -center_vel.dot(normal);
  c.normal = normal;
  c.point = center - (s.radius - 0.5 * depth) * normal;
  const Vec2 point_vel = kin.origin_vel[s.body] + kin.omega[s.body] * perp(c.point - kin.origin[s.body]);
  const Vec2 tangent = perp(normal);
  const double fn = hunt_crossley_normal(depth, c.rate, p);
  const double ft = -p.friction * fn * std::tanh(point_vel.dot(tangent) / p.slip_velocity);
  c.force = fn * normal + ft * tangent;
  out.push_back(c);
}

}  // namespace detail

// One sample per penetrating (sphere, ground | obstacle) pair.
inline std::vector<ContactSample> collide(const Model& m, const Kinematics& kin,
                                          std::span<const Obstacle> course, const ContactParams& p) {
  std::vector<ContactSample> out;
  const auto& spheres = m.spheres();
  for (int i = 0; i < static_cast<int>(spheres.size()); ++i) {
    const auto& s = spheres[i];
    const Vec2 c = kin.point(s.body, s.center);
    const Vec2 cv = kin.point_velocity(s.body, s.center);
    const double ground_depth = s.radius - c.y();
    if (ground_depth > 0.0) {
      detail::resolve_contact(m, kin, i, kGroundCounterpart, c, cv, Vec2(0.0, 1.0), ground_depth,
                              p, out);
    }
    for (int o = 0; o < static_cast<int>(course.size()); ++o) {
      const Vec2 d = c - Vec2(course[o].x, course[o].y);
      const double reach = s.radius + course[o].r;
      if (std::abs(d.x()) >= reach || std::abs(d.y()) >= reach) continue;
      const double dist = d.norm();
      const double depth = reach - dist;
      if (depth <= 0.0 || dist == 0.0) continue;
      detail::resolve_contact(m, kin, i, o, c, cv, d / dist, depth, p, out);
    }
  }
  return out;
}

inline VecN contact_generalized_forces(const Model& m, const Kinematics& kin,
                                       std::span<const ContactSample> samples) {
  VecN tau = VecN::Zero(m.dof());
  for (const auto& c : samples) {
    accumulate_point_force(m, kin, m.spheres()[c.sphere].body, c.point, c.force, tau);
  }
  return tau;
}

// Zero inside [lo, hi]; exponentially stiffening restoring torque outside.
inline double ligament_torque(double angle, const LigamentDef& lig) {
  if (angle > lig.engage_angle_hi) {
    return -lig.stiffness_scale * std::expm1(lig.exponent_rate * (angle - lig.engage_angle_hi));
  }
  if (angle < lig.engage_angle_lo) {
    return lig.stiffness_scale * std::expm1(lig.exponent_rate * (lig.engage_angle_lo - angle));
  }
  return 0.0;
}

// L = sum of squared ligament torques.
inline double ligament_load(std::span<const double> torques) {
  double sum = 0.0;
  for (double t : torques) sum += t * t;
  return sum;
}

}  // namespace musclerun
