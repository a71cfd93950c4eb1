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

// Reduced-order quadruped simulator.
//
// The trunk is a 6-DOF rigid body carrying all of the mass. Legs are
// low-inertia joint-space chains driven by the PD torques and by the contact
// force acting at the foot; the leg transmits that contact force to the trunk
// (at the servo equilibrium it equals J^-T tau). Contacts are a spring-damper
// along the terrain normal with a tangential stiction spring capped by the
// Coulomb cone.

#ifndef RESLOCO_SIM_HPP_
#define RESLOCO_SIM_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "resloco/gait.hpp"
#include "resloco/kinematics.hpp"
#include "resloco/reference.hpp"
#include "resloco/reward.hpp"
#include "resloco/terrain.hpp"
#include "resloco/types.hpp"

namespace resloco::sim {

struct SimConfig {
  double physics_dt = 1e-3;
  double control_dt = 5e-3;
  double command_dt = 0.05;
  double gravity = 9.81;
  double base_mass = 12.0;
  Vec3 base_inertia{0.12, 0.25, 0.30};
  double joint_inertia = 0.01;  // per joint, kg m^2
  double contact_stiffness = 2.0e4;
  double contact_damping = 400.0;
  double tangential_stiffness = 2.0e4;
  double tangential_damping = 300.0;
  double friction = 0.6;
  double torque_limit = 33.5;
  double fall_height = 0.12;            // base above local terrain
  double fall_angle = kPi / 3.0;        // |roll| or |pitch|
  double sanity_velocity = 50.0;        // m/s and rad/s
  Vec3 body_half_extents{0.2, 0.08, 0.05};

  int physics_per_control() const;
  int control_per_command() const;
  void validate() const;
};

/// Per-joint gains, ordered abduction, hip, knee.
struct PdGains {
  Vec3 kp{100.0, 100.0, 100.0};
  Vec3 kd{1.0, 2.0, 2.0};
};

using JointTargets = std::array<kin::JointAngles, kNumLegs>;
using JointVectors = std::array<Vec3, kNumLegs>;

/// tau = Kp (q* - q) - Kd qdot, clamped to +-limit.
JointVectors pd_torques(const JointTargets& q_target, const JointVectors& q, const JointVectors& qd,
                        const PdGains& gains, double limit);

struct BaseState {
  Vec3 position = Vec3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Vec3 linear_velocity = Vec3::Zero();   // world frame
  Vec3 angular_velocity = Vec3::Zero();  // base frame

  Mat3 rotation() const { return orientation.toRotationMatrix(); }
  double roll() const;
  double pitch() const;
  double yaw() const;
  Vec3 body_linear_velocity() const { return rotation().transpose() * linear_velocity; }
};

struct LegSimState {
  Vec3 q = Vec3::Zero();
  Vec3 qd = Vec3::Zero();
  bool contact = false;
  Vec3 anchor = Vec3::Zero();         // stiction anchor, world
  Vec3 contact_force = Vec3::Zero();  // ground on foot, world
  Vec3 foot_world = Vec3::Zero();
};

struct PerturbationSchedule {
  bool enabled = false;
  double interval_min = 5.0;
  double interval_max = 8.0;
  double magnitude_min = 100.0;
  double magnitude_max = 350.0;
  double duration = 0.3;
  int max_pushes = 0;  // 0 = unlimited
};

struct ExternalPush {
  Vec3 force = Vec3::Zero();       // world frame, horizontal
  Vec3 point_body = Vec3::Zero();  // application point, base frame
  double remaining = 0.0;
};

class World {
 public:
  World(SimConfig config, kin::RobotGeometry geometry, Terrain terrain);

  /// Places the robot standing with feet on the terrain below the neutral
  /// stance and zero velocity.
  void reset(const Vec2& xy, double yaw, double ride_height);

  const SimConfig& config() const { return config_; }
  const kin::RobotGeometry& geometry() const { return geometry_; }
  const Terrain& terrain() const { return terrain_; }
  Terrain& terrain() { return terrain_; }
  const BaseState& base() const { return base_; }
  BaseState& base() { return base_; }
  const std::array<LegSimState, kNumLegs>& legs() const { return legs_; }
  std::array<LegSimState, kNumLegs>& legs() { return legs_; }

  JointVectors joint_positions() const;
  JointVectors joint_velocities() const;
  std::array<bool, kNumLegs> contacts() const;
  /// Foot positions in the base frame from the current joint angles.
  FootTargets feet_in_base() const;

  double time() const { return time_; }
  std::uint64_t physics_ticks() const { return physics_ticks_; }
  bool faulted() const { return fault_; }
  double terrain_height_below_base() const;
  /// Kinetic + gravitational + contact-spring energy.
  double mechanical_energy() const;

  void push(const ExternalPush& p) { push_ = p; }
  const ExternalPush& active_push() const { return push_; }

  friend void step_physics(World& world, const JointVectors& torques, double dt);

 private:
  SimConfig config_;
  kin::RobotGeometry geometry_;
  Terrain terrain_;
  BaseState base_;
  std::array<LegSimState, kNumLegs> legs_{};
  ExternalPush push_{};
  double time_ = 0.0;
  std::uint64_t physics_ticks_ = 0;
  bool fault_ = false;
};

/// Advances one physics step of length dt with the given joint torques.
/// Sets the world's fault flag instead of throwing on numeric blow-up.
void step_physics(World& world, const JointVectors& torques, double dt);

/// Base below the fall height above the local terrain, or tilted past the
/// fall angle.
bool has_fallen(const World& world);

/// Base-frame motion summary used by the expert and the observation.
ref::BaseMotion base_motion(const World& world);

/// Position of the foot-contact centroid relative to the CoM in the base
/// frame, divided by `nominal_height`; reads (0, 0, -1) in nominal stance.
Vec3 com_feature(const World& world, double nominal_height = ref::CommandLimits::kRideDefault);

// ---------------------------------------------------------------------------
// Closed-loop task: command generator, gait clock, controller, PD, physics.

struct ControlInput {
  const World* world = nullptr;
  gait::GaitParams params;
  gait::GaitState gait;
  ref::VelocityCommand cmd;
  ref::BaseMotion base;
};

/// Produces base-frame foot targets at the control rate.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset(const World& world, const gait::GaitParams& params, const ref::VelocityCommand& cmd) = 0;
  virtual FootTargets compute(const ControlInput& in) = 0;
};

struct TaskConfig {
  gait::GaitParams gait = gait::expert_trot();
  PdGains pd{};
  PerturbationSchedule perturbation{};
  rl::RewardSpec reward{};
  ref::PursuitGains pursuit{};
  double timeout = 60.0;
  double d_min = 0.5;
  /// When set, a new target is drawn each time one is reached and the
  /// episode only ends on a fall or the timeout.
  bool endless_targets = false;
  double target_distance_min = 2.5;
  double target_distance_max = 3.5;
  /// If set, the pursuit law is bypassed and the command approaches this
  /// value under the same per-update rate limit (sweeps).
  bool fixed_command = false;
  ref::VelocityCommand command{};
};

struct StepOutcome {
  double reward = 0.0;
  rl::RewardEvents events{};
  bool done = false;
  bool success = false;  // all listed targets reached
  bool timeout = false;
  bool fault = false;
};

class Task {
 public:
  /// Hook run whenever a new target becomes active (including the first).
  using TargetHook = std::function<void(ref::VelocityCommand&, std::mt19937_64&)>;

  Task(World world, TaskConfig config, std::vector<Vec2> targets, std::uint64_t seed);

  /// Resets controller bookkeeping and returns the first control input.
  void start(Controller& controller);
  /// Runs the command generator when due and returns this tick's inputs.
  ControlInput control_input();
  /// IK, PD at the physics rate, physics, reward and termination.
  StepOutcome advance(const FootTargets& targets);

  World& world() { return world_; }
  const World& world() const { return world_; }
  const TaskConfig& config() const { return config_; }
  const ref::VelocityCommand& command() const { return cmd_; }
  const std::vector<Vec2>& targets() const { return targets_; }
  std::size_t targets_reached() const { return reached_; }
  std::size_t active_target() const { return target_index_; }
  double target_distance() const;
  std::uint64_t control_ticks() const { return control_ticks_; }
  std::uint64_t command_ticks() const { return command_ticks_; }
  std::uint64_t ik_clamps() const { return ik_clamps_; }
  int pushes() const { return pushes_; }
  std::mt19937_64& rng() { return rng_; }
  void set_target_hook(TargetHook hook) { hook_ = std::move(hook); }
  /// Swaps the active target for `target` (e.g. after a per-target timeout).
  void replace_active_target(const Vec2& target);
  const JointTargets& joint_targets() const { return q_target_; }
  rl::RewardMeasurements measurements() const;
  double elapsed() const { return world_.time() - start_time_; }

 private:
  void activate_target();
  void schedule_push();

  World world_;
  TaskConfig config_;
  std::vector<Vec2> targets_;
  std::mt19937_64 rng_;
  TargetHook hook_;
  ref::VelocityCommand cmd_{};
  JointTargets q_target_{};
  std::size_t target_index_ = 0;
  std::size_t reached_ = 0;
  std::uint64_t control_ticks_ = 0;
  std::uint64_t command_ticks_ = 0;
  std::uint64_t ik_clamps_ = 0;
  int pushes_ = 0;
  double next_push_time_ = 0.0;
  double start_time_ = 0.0;
};

/// Draws a target at uniform distance in [dmin, dmax] and uniform direction.
Vec2 sample_target(const Vec2& from, double dmin, double dmax, std::mt19937_64& rng);

}  // namespace resloco::sim

#endif  // RESLOCO_SIM_HPP_
