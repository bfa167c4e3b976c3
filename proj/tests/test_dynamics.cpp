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

#include "oracles.hpp"

namespace musclerun {
namespace {

using namespace testing;

TEST(MassMatrix, MatchesBruteForceAtReferenceAndRandomPoses) {
  EXPECT_LT(mass_matrix_error(5, 17), 1e-8);
}

TEST(MassMatrix, SymmetricAndPositiveDefinite) {
  const Model m(default_model());
  std::mt19937_64 rng(19);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 20; ++i) {
    const auto s = testing::random_state(m, rng);
    const MatN M = mass_matrix(m, forward_kinematics(m, s));
    EXPECT_LT((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    for (int t = 0; t < 100; ++t) {
      VecN x(m.dof());
      for (int k = 0; k < m.dof(); ++k) x[k] = n01(rng);
      EXPECT_GT(x.dot(M * x), 0.0);
    }
  }
}

TEST(ForwardDynamics, ZeroGravityZeroVelocityZeroForceIsAtRest) {
  auto def = default_model();
  def.gravity = Vec2::Zero();
  const Model m = Model(def).with_options(passive_options());
  std::mt19937_64 rng(23);
  auto s = testing::random_state(m, rng);
  s.qdot.setZero();
  const VecN qddot = forward_dynamics(m, s, GeneralizedForces::zero(m.dof()));
  EXPECT_LT(qddot.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ForwardDynamics, LockedSkeletonFallsFreely) {
  const Model m = locked_model(default_model(), {3, 4, 5, 6, 7, 8}, passive_options());
  std::mt19937_64 rng(29);
  auto s = testing::random_state(m, rng);
  s.qdot.setZero();
  const VecN qddot = forward_dynamics(m, s, GeneralizedForces::zero(m.dof()));
  EXPECT_NEAR(qddot[0], 0.0, 1e-12);
  EXPECT_NEAR(qddot[1], -kG, 1e-12);
  EXPECT_NEAR(qddot[2], 0.0, 1e-12);
  for (int k = 3; k < 9; ++k) EXPECT_EQ(qddot[k], 0.0);
}

TEST(ForwardDynamics, DoublePendulumMatchesClosedForm) {
  EXPECT_LT(double_pendulum_error(25, 31), 1e-8);
}

// The right leg swings as one rigid compound pendulum from a fixed pelvis.
TEST(Integrator, PassivePendulumEnergyDriftBelowOnePerMille) {
  EXPECT_LT(passive_pendulum_drift(), 1e-3);
}

// With several links the mass matrix depends on the configuration and the
// velocity-form update is no longer symplectic; the energy error then shrinks
// linearly with the step.
TEST(Integrator, ChainEnergyErrorIsFirstOrderInStep) {
  const Model m = locked_model(default_model(), {0, 1, 2}, passive_options());
  SimState s = initial_state(m);
  s.q << 0, 0, 0, 0.6, -0.5, 0.2, -0.3, -0.4, -0.1;
  const double coarse = energy_drift(m, s, 2 * kSubstep, 5000);
  const double fine = energy_drift(m, s, kSubstep, 10000);
  EXPECT_GT(coarse / fine, 1.7);
  EXPECT_LT(coarse / fine, 2.3);
}

SimState pendulum_run(const Model& m, SimState s, double h, double horizon) {
  const VecM e = VecM::Zero(m.muscle_count());
  const int n = static_cast<int>(std::lround(horizon / h));
  for (int i = 0; i < n; ++i) s = integrate_substep(m, s, e, h);
  return s;
}

TEST(Integrator, FirstOrderRichardsonRatio) {
  const Model m = locked_model(default_model(), {0, 1, 2}, passive_options());
  SimState s = initial_state(m);
  s.q << 0, 0, 0, 0.8, -0.9, 0.2, -0.4, -0.2, 0.1;
  s.qdot << 0, 0, 0, 1.0, -0.5, 0.0, 0.5, 0.0, 0.0;
  const double h = 2e-3;
  const auto a = pendulum_run(m, s, h, 0.5);
  const auto b = pendulum_run(m, s, h / 2, 0.5);
  const auto c = pendulum_run(m, s, h / 4, 0.5);
  const double ratio = (a.q - b.q).norm() / (b.q - c.q).norm();
  EXPECT_GE(ratio, 1.7);
  EXPECT_LE(ratio, 2.3);
}

TEST(Integrator, IdenticalInputsGiveBitIdenticalOutput) {
  const Model m{default_model()};
  std::mt19937_64 rng(37);
  const auto s = testing::random_state(m, rng);
  VecM e(m.muscle_count());
  for (int i = 0; i < e.size(); ++i) e[i] = (i % 3) / 2.0;
  const std::vector<Obstacle> course{{0.5, 0.0, 0.1}};
  auto a = s, b = s;
  for (int i = 0; i < 200; ++i) {
    a = integrate_substep(m, a, e, kSubstep, course);
    b = integrate_substep(m, b, e, kSubstep, course);
  }
  EXPECT_TRUE(a == b);
}

Model weightless_model() {
  auto def = default_model();
  def.gravity = Vec2::Zero();
  SimOptions o;
  o.contact = false;
  return Model(def).with_options(o);
}

double momentum_drift(const Model& m, SimState s, double h, double horizon) {
  const VecM e = VecM::Constant(m.muscle_count(), 0.2);
  const Vec2 p0 = linear_momentum(m, forward_kinematics(m, s));
  double worst = 0.0;
  for (int i = 0; i < static_cast<int>(std::lround(horizon / h)); ++i) {
    s = integrate_substep(m, s, e, h);
    worst = std::max(worst, (linear_momentum(m, forward_kinematics(m, s)) - p0).norm());
  }
  return worst;
}

TEST(Integrator, MomentumConservedForRigidMotionWithoutGravityOrContact) {
  auto m = weightless_model();
  SimState s = initial_state(m);
  s.q << 0, 0.5, 0.1, 0.3, -0.4, 0.1, -0.2, -0.3, 0.0;
  s.qdot << 0.3, -0.2, 0, 0, 0, 0, 0, 0, 0;
  // Muscles at baseline activation pull internally; lock the joints so the
  // skeleton translates as one body.
  SimOptions o = m.options();
  for (int k = 2; k < 9; ++k) o.locked[k] = true;
  EXPECT_LT(momentum_drift(m.with_options(o), s, kSubstep, 1.0), 1e-8);
}

// Internal motion couples translation to the configuration-dependent mass
// matrix; the velocity-form update then leaks momentum at first order in h.
TEST(Integrator, MomentumErrorWithInternalMotionIsFirstOrderInStep) {
  const auto m = weightless_model();
  SimState s = initial_state(m);
  s.q << 0, 0.5, 0.1, 0.3, -0.4, 0.1, -0.2, -0.3, 0.0;
  s.qdot << 0.3, -0.2, 0.4, 1.0, -1.5, 0.5, -0.8, 1.2, -0.3;
  const double coarse = momentum_drift(m, s, 2 * kSubstep, 1.0);
  const double fine = momentum_drift(m, s, kSubstep, 1.0);
  EXPECT_GT(coarse / fine, 1.7);
  EXPECT_LT(coarse / fine, 2.3);
  EXPECT_LT(fine, 1e-3 * linear_momentum(m, forward_kinematics(m, s)).norm());
}

TEST(Integrator, BlowUpReportsOffendingCoordinate) {
  const Model m = Model(default_model()).with_options(passive_options());
  SimState s = initial_state(m);
  s.q[4] = -2e6;
  try {
    integrate_substep(m, s, VecM::Zero(m.muscle_count()), kSubstep);
    FAIL() << "expected SimulationDiverged";
  } catch (const SimulationDiverged& e) {
    EXPECT_EQ(e.coordinate(), "knee_r");
    EXPECT_LT(e.value(), -1e6);
  }
}

TEST(ControlStep, AdvancesClockByTenMilliseconds) {
  const Model m{default_model()};
  SimState s = initial_state(m);
  const std::vector<double> e(18, 0.0);
  for (int i = 1; i <= 5; ++i) {
    auto [next, tel] = advance_control_step(m, s, e);
    EXPECT_EQ(tel.substeps, 50);
    EXPECT_EQ(next.time, s.time + 0.01);
    s = next;
  }
}

TEST(ControlStep, AirborneWithoutLigamentEngagementHasZeroIntegral) {
  const Model m{default_model()};
  SimState s = initial_state(m);
  s.q[1] = 2.0;
  auto [next, tel] = advance_control_step(m, s, std::vector<double>(18, 0.0));
  EXPECT_EQ(tel.ligament_integral, 0.0);
  for (const auto& f : tel.sphere_forces) EXPECT_EQ(f, Vec2::Zero());
  EXPECT_EQ(*std::max_element(tel.max_penetration.begin(), tel.max_penetration.end()), 0.0);
}

TEST(ControlStep, ExcitationsAreClampedIntoUnitInterval) {
  const Model m{default_model()};
  const SimState s = initial_state(m);
  std::vector<double> wild(18), tame(18);
  for (int i = 0; i < 18; ++i) {
    wild[i] = i % 2 ? 7.0 : -3.0;
    tame[i] = i % 2 ? 1.0 : 0.0;
  }
  EXPECT_TRUE(advance_control_step(m, s, wild).first == advance_control_step(m, s, tame).first);
}

TEST(GeneralizedForces, TotalIsSumOfSources) {
  const Model m{default_model()};
  SimState s = initial_state(m);
  s.q[1] = -0.01;
  s.q[3] = 0.4;
  s.qdot[3] = 1.0;
  SubstepReport report;
  const std::vector<Obstacle> course{{0.2, 0.0, 0.2}};
  const auto tau = compute_forces(m, s, forward_kinematics(m, s), course, &report);
  const VecN sum = tau.muscle + tau.ligament + tau.contact + tau.gravity;
  EXPECT_LT((tau.total() - sum).cwiseAbs().maxCoeff(), 1e-12 * sum.cwiseAbs().maxCoeff());
  EXPECT_FALSE(report.contacts.empty());
}

// All revolute joints welded in a crouch: the skeleton is one rigid body on
// four contact spheres and must come to rest carrying its weight.
TEST(Contact, StandingCrouchSettlesUnderBodyWeight) {
  const Model m = locked_model(default_model(), {3, 4, 5, 6, 7, 8}, SimOptions{});
  SimState s = initial_state(m);
  s.q << 0, 0, -0.2, 0.6, -0.8, 0.4, 0.6, -0.8, 0.4;
  auto kin = forward_kinematics(m, s);
  double lowest = 1e9;
  for (const auto& sp : m.spheres()) lowest = std::min(lowest, kin.point(sp.body, sp.center).y() - sp.radius);
  s.q[1] -= lowest - 0.002;
  kin = forward_kinematics(m, s);
  double heel = 1e9, toe = -1e9;
  for (const auto& sp : m.spheres()) {
    heel = std::min(heel, kin.point(sp.body, sp.center).x());
    toe = std::max(toe, kin.point(sp.body, sp.center).x());
  }
  ASSERT_GT(kin.center_of_mass.x(), heel);
  ASSERT_LT(kin.center_of_mass.x(), toe);

  const std::vector<double> zero(18, 0.0);
  StepTelemetry tel;
  for (int i = 0; i < 200; ++i) std::tie(s, tel) = advance_control_step(m, s, zero);
  double vertical = 0.0;
  for (const auto& f : tel.sphere_forces) vertical += f.y();
  EXPECT_NEAR(vertical, m.body_weight(), 0.02 * m.body_weight());
}

}  // namespace
}  // namespace musclerun
