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

// The analytic expert: target-chasing command generation, Raibert swing
// placement and a kinematic stance reference. Its foot targets are the
// labels the kernel network is distilled from.

#ifndef RESLOCO_REFERENCE_HPP_
#define RESLOCO_REFERENCE_HPP_

#include <array>
#include <cstdint>

#include "resloco/gait.hpp"
#include "resloco/kinematics.hpp"
#include "resloco/types.hpp"

namespace resloco::ref {

struct CommandLimits {
  static constexpr double kVx = 0.5;
  static constexpr double kVy = 0.2;
  static constexpr double kWz = kPi / 4.0;
  static constexpr double kMaxDelta = 0.005;
  static constexpr double kStepMin = 0.05, kStepMax = 0.18, kStepDefault = 0.1;
  static constexpr double kRideMin = 0.18, kRideMax = 0.28, kRideDefault = 0.24;
};

/// Command generator update rate.
inline constexpr double kCommandRateHz = 20.0;

struct VelocityCommand {
  double vx = 0.0;
  double vy = 0.0;
  double wz = 0.0;
  double step_height = CommandLimits::kStepDefault;
  double ride_height = CommandLimits::kRideDefault;
};

struct RobotPose {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

struct TargetSpec {
  Vec2 position = Vec2::Zero();
  double d_min = 0.5;
};

/// Gains of the pursuit law that precedes rate limiting.
struct PursuitGains {
  double k_distance = 1.0;
  double k_heading = 2.0;
};

/// Moves each velocity component of `prev` toward `want` by at most the
/// per-update delta and clamps to the ranges. Heights are taken from `want`.
VelocityCommand approach_command(const VelocityCommand& prev, const VelocityCommand& want);

VelocityCommand next_command(const VelocityCommand& prev, const RobotPose& pose,
                             const TargetSpec& target, const PursuitGains& gains = {});

/// The desired (unrate-limited) command for a pose and target.
VelocityCommand desired_command(const RobotPose& pose, const TargetSpec& target,
                                const PursuitGains& gains = {});

inline constexpr double kDefaultRaibertGain = 0.03;

/// Foothold for a swing leg: hip projection + v_cmd * tau_stance / 2 +
/// k * (v_base - v_cmd), placed at `ground_z`. Velocities are horizontal
/// components of the hip's motion.
Vec3 raibert_swing_target(const Vec3& hip, const Vec2& v_base, const Vec2& v_cmd,
                          const gait::GaitParams& params, double ground_z,
                          double k_raibert = kDefaultRaibertGain);

inline Vec3 raibert_swing_target(const Vec3& hip, const Vec3& v_base, const VelocityCommand& cmd,
                                 const gait::GaitParams& params,
                                 double k_raibert = kDefaultRaibertGain) {
  return raibert_swing_target(hip, v_base.head<2>(), Vec2(cmd.vx, cmd.vy), params, hip.z(),
                              k_raibert);
}

/// Swing foot position for normalized phase in (1, 2]: smoothstep in the
/// horizontal plane and a half-sine apex of `step_height`.
Vec3 swing_trajectory(double phi_norm, const Vec3& start, const Vec3& foothold, double step_height);

/// Stance foot in the base frame after the base moves by the commanded twist
/// for dt (translate, then yaw), so the foot stays fixed in the world.
/// z is held at -ride_height.
Vec3 stance_reference(const Vec3& p_prev, const VelocityCommand& cmd, double dt, double ride_height);

/// Measured base motion the expert reads each tick (base frame).
struct BaseMotion {
  RobotPose pose;
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
};

struct ExpertConfig {
  double k_raibert = kDefaultRaibertGain;
  double control_dt = 1.0 / gait::kGaitRateHz;
  double height_rate = 0.1;  // m/s slew of ride/step height changes
  // Stance sag compensation: stance targets are offset by the PD deflection
  // expected under an even share of the body weight. Zero disables it.
  double body_weight = 12.0 * 9.81;  // N
  Vec3 joint_kp{100.0, 100.0, 100.0};
  double load_ramp = 0.2;  // fraction of stance over which the offset ramps in
};

/// Stateful wrapper that dispatches each leg to the swing or stance rule.
/// One instance per simulated robot.
class Expert {
 public:
  Expert(gait::GaitParams params, kin::RobotGeometry geometry, ExpertConfig config = {});

  /// Nominal standing targets; also clears swing bookkeeping.
  FootTargets reset(double ride_height = CommandLimits::kRideDefault);

  FootTargets step(const gait::GaitState& gait, const VelocityCommand& cmd, const BaseMotion& base,
                   const FootTargets& prev_targets);

  const gait::GaitParams& params() const { return params_; }
  void set_params(const gait::GaitParams& p);
  const kin::RobotGeometry& geometry() const { return geometry_; }
  /// Applies the stance sag offset to nominal targets from step().
  FootTargets compensate(const gait::GaitState& gait, const FootTargets& nominal) const;
  std::uint64_t ik_clamp_count() const { return ik_clamp_count_; }

 private:
  gait::GaitParams params_;
  kin::RobotGeometry geometry_;
  ExpertConfig config_;
  std::array<gait::LegState, kNumLegs> last_state_{};
  std::array<Vec3, kNumLegs> swing_start_{};
  double ride_height_ = CommandLimits::kRideDefault;
  double step_height_ = CommandLimits::kStepDefault;
  std::uint64_t ik_clamp_count_ = 0;
};

}  // namespace resloco::ref

#endif  // RESLOCO_REFERENCE_HPP_
