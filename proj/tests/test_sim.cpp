// Copyright 2026 The resloco Authors
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

#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "resloco/episode.hpp"
#include "resloco/sim.hpp"

namespace resloco::sim {
namespace {

World flat_world() {
  return World(SimConfig{}, kin::default_geometry(), make_terrain(TerrainKind::kFlat, {}, 0));
}

// Holds the neutral stance.
class StandController : public Controller {
 public:
  void reset(const World& world, const gait::GaitParams&, const ref::VelocityCommand& cmd) override {
    for (std::size_t i = 0; i < kNumLegs; ++i) targets_[i] = world.geometry()[i].neutral_foot(-cmd.ride_height);
  }
  FootTargets compute(const ControlInput&) override { return targets_; }

 private:
  FootTargets targets_{};
};

TaskConfig still_config(double timeout) {
  TaskConfig c;
  c.timeout = timeout;
  c.fixed_command = true;
  c.command = ref::VelocityCommand{0.0, 0.0, 0.0};
  return c;
}

TEST(Pd, TorqueExamples) {
  const PdGains g{};
  JointTargets target{};
  JointVectors q{}, qd{};
  for (auto& v : q) v.setZero();
  for (auto& v : qd) v.setZero();
  JointVectors tau = pd_torques(target, q, qd, g, 33.5);
  for (const Vec3& t : tau) EXPECT_EQ(t, Vec3::Zero());

  target[0].hip = 0.1;
  tau = pd_torques(target, q, qd, g, 33.5);
  EXPECT_NEAR(tau[0].y(), 10.0, 1e-12);

  target[0].hip = 0.0;
  qd[1].z() = 1.0;
  tau = pd_torques(target, q, qd, g, 33.5);
  EXPECT_NEAR(tau[1].z(), -2.0, 1e-12);

  target[2].knee = -5.0;
  tau = pd_torques(target, q, qd, g, 33.5);
  EXPECT_EQ(tau[2].z(), -33.5);
}

TEST(Sim, RateCounters) {
  const SimConfig c{};
  EXPECT_EQ(c.physics_per_control(), 5);
  EXPECT_EQ(c.control_per_command(), 10);
  Task task(flat_world(), still_config(10.0), {Vec2(50.0, 0.0)}, 1);
  StandController ctl;
  task.start(ctl);
  const std::uint64_t p0 = task.world().physics_ticks();
  for (int k = 0; k < 100; ++k) task.advance(ctl.compute(task.control_input()));
  EXPECT_EQ(task.control_ticks(), 100u);
  EXPECT_EQ(task.command_ticks(), 10u);
  EXPECT_EQ(task.world().physics_ticks() - p0, 500u);
}

TEST(Sim, FreeFall) {
  World w = flat_world();
  w.reset(Vec2::Zero(), 0.0, 0.24);
  w.base().position.z() = 5.0;
  w.base().linear_velocity.setZero();
  const double v0 = w.base().linear_velocity.z();
  JointVectors zero{};
  for (auto& v : zero) v.setZero();
  for (int k = 0; k < 100; ++k) step_physics(w, zero, 1e-3);
  for (const auto& leg : w.legs()) EXPECT_FALSE(leg.contact);
  EXPECT_NEAR(w.base().linear_velocity.z() - v0, -0.981, 1e-6);
}

TEST(Sim, StandingIsSteady) {
  Task task(flat_world(), still_config(6.0), {Vec2(50.0, 0.0)}, 1);
  StandController ctl;
  double lo = 1e9, hi = -1e9, depth = 0.0;
  const EpisodeMetrics m = run_episode(task, ctl, [&](const Task& t, const StepOutcome&) {
    if (t.elapsed() < 1.0) return;  // settle
    const double z = t.world().base().position.z();
    lo = std::min(lo, z);
    hi = std::max(hi, z);
    for (const auto& leg : t.world().legs()) depth = std::max(depth, -leg.foot_world.z());
  });
  EXPECT_FALSE(m.fell);
  EXPECT_LE(hi - lo, 4e-3);  // within +-2 mm
  const SimConfig c{};
  EXPECT_LE(depth, 5e-3);
  EXPECT_NEAR(depth, c.base_mass * c.gravity / (4.0 * c.contact_stiffness), 1e-3);
}

TEST(Sim, EnergyDoesNotGrowAtRest) {
  Task task(flat_world(), still_config(11.0), {Vec2(50.0, 0.0)}, 1);
  StandController ctl;
  double e_ref = 0.0, worst = -1e9;
  bool have_ref = false;
  run_episode(task, ctl, [&](const Task& t, const StepOutcome&) {
    if (t.elapsed() < 1.0) return;
    const double e = t.world().mechanical_energy();
    if (!have_ref) {
      e_ref = e;
      have_ref = true;
    }
    worst = std::max(worst, e - e_ref);
  });
  EXPECT_LE(worst, 1e-3);
}

TEST(Sim, ZeroTargetsSucceedImmediately) {
  Task task(flat_world(), TaskConfig{}, {}, 1);
  StandController ctl;
  const EpisodeMetrics m = run_episode(task, ctl);
  EXPECT_TRUE(m.success);
  EXPECT_EQ(m.steps, 0u);
  EXPECT_EQ(m.reward_total, 0.0);
}

TEST(Sim, ExpertStandingDoesNotFall) {
  Task task(flat_world(), still_config(30.0), {Vec2(50.0, 0.0)}, 1);
  ExpertController ctl(kin::default_geometry());
  const EpisodeMetrics m = run_episode(task, ctl);
  EXPECT_FALSE(m.fell);
  EXPECT_TRUE(m.timeout);
  EXPECT_NEAR(m.sim_time, 30.0, 0.01);
}

EpisodeMetrics rough_episode() {
  TaskConfig cfg;
  cfg.timeout = 5.0;
  cfg.perturbation = {true, 1.0, 2.0, 50.0, 100.0, 0.2, 0};
  World w(SimConfig{}, kin::default_geometry(), make_terrain(TerrainKind::kHeightfield, {}, 9));
  Task task(std::move(w), cfg, {Vec2(3.0, 0.5)}, 9);
  ExpertController ctl(kin::default_geometry());
  return run_episode(task, ctl);
}

TEST(Sim, Deterministic) {
  const EpisodeMetrics a = rough_episode(), b = rough_episode();
  EXPECT_EQ(std::memcmp(&a.reward_mean, &b.reward_mean, sizeof(double)), 0);
  EXPECT_EQ(std::memcmp(&a.reward_total, &b.reward_total, sizeof(double)), 0);
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_EQ(a.num_targets, b.num_targets);
  EXPECT_EQ(a.sim_time, b.sim_time);
}

TEST(Sim, ExpertWalksToTarget) {
  TaskConfig cfg;
  cfg.timeout = 40.0;
  Task task(flat_world(), cfg, {Vec2(2.0, 0.0), Vec2(2.0, 2.0)}, 3);
  ExpertController ctl(kin::default_geometry());
  const EpisodeMetrics m = run_episode(task, ctl);
  EXPECT_TRUE(m.success);
  EXPECT_EQ(m.num_targets, 2u);
}

TEST(Sim, ThrowingControllerIsFault) {
  struct Bad : StandController {
    FootTargets compute(const ControlInput&) override { throw std::domain_error("nan"); }
  } ctl;
  Task task(flat_world(), still_config(5.0), {Vec2(5.0, 0.0)}, 1);
  EXPECT_TRUE(run_episode(task, ctl).fault);
}

TEST(Sim, SampleTargetDistance) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 1000; ++k) {
    const double d = (sample_target(Vec2(1.0, -1.0), 2.5, 3.5, rng) - Vec2(1.0, -1.0)).norm();
    EXPECT_GE(d, 2.5);
    EXPECT_LE(d, 3.5);
  }
}

}  // namespace
}  // namespace resloco::sim
