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

#include "resloco/reference.hpp"

#include <algorithm>
#include <cmath>

namespace resloco::ref {

namespace {

double approach(double current, double desired, double max_delta) {
  return current + std::clamp(desired - current, -max_delta, max_delta);
}

}  // namespace

VelocityCommand desired_command(const RobotPose& pose, const TargetSpec& target,
                                const PursuitGains& gains) {
  VelocityCommand out;
  const Vec2 delta = target.position - pose.position.head<2>();
  const double distance = delta.norm();
  if (distance == 0.0) {
    out.vx = out.vy = out.wz = 0.0;
    return out;
  }
  const double bearing = wrap_angle(std::atan2(delta.y(), delta.x()) - pose.yaw);
  const double speed = gains.k_distance * distance;
  out.vx = std::clamp(std::min(speed, CommandLimits::kVx) * std::cos(bearing), -CommandLimits::kVx,
                      CommandLimits::kVx);
  out.vy = std::clamp(std::min(speed, CommandLimits::kVy) * std::sin(bearing), -CommandLimits::kVy,
                      CommandLimits::kVy);
  out.wz = std::clamp(gains.k_heading * bearing, -CommandLimits::kWz, CommandLimits::kWz);
  return out;
}

VelocityCommand approach_command(const VelocityCommand& prev, const VelocityCommand& want) {
  VelocityCommand out = want;
  out.vx = std::clamp(approach(prev.vx, want.vx, CommandLimits::kMaxDelta), -CommandLimits::kVx,
                      CommandLimits::kVx);
  out.vy = std::clamp(approach(prev.vy, want.vy, CommandLimits::kMaxDelta), -CommandLimits::kVy,
                      CommandLimits::kVy);
  out.wz = std::clamp(approach(prev.wz, want.wz, CommandLimits::kMaxDelta), -CommandLimits::kWz,
                      CommandLimits::kWz);
  return out;
}

VelocityCommand next_command(const VelocityCommand& prev, const RobotPose& pose,
                             const TargetSpec& target, const PursuitGains& gains) {
  VelocityCommand want = desired_command(pose, target, gains);
  want.step_height = prev.step_height;
  want.ride_height = prev.ride_height;
  return approach_command(prev, want);
}

Vec3 raibert_swing_target(const Vec3& hip, const Vec2& v_base, const Vec2& v_cmd,
                          const gait::GaitParams& params, double ground_z, double k_raibert) {
  const Vec2 xy = hip.head<2>() + v_cmd * (params.tau_stance / 2.0) + k_raibert * (v_base - v_cmd);
  return {xy.x(), xy.y(), ground_z};
}

Vec3 swing_trajectory(double phi_norm, const Vec3& start, const Vec3& foothold, double step_height) {
  const double s = std::clamp(phi_norm - 1.0, 0.0, 1.0);
  const double blend = s * s * (3.0 - 2.0 * s);
  Vec3 p = start + blend * (foothold - start);
  p.z() += step_height * std::sin(kPi * s);
  return p;
}

Vec3 stance_reference(const Vec3& p_prev, const VelocityCommand& cmd, double dt, double ride_height) {
  const double dyaw = cmd.wz * dt;
  const double c = std::cos(dyaw), s = std::sin(dyaw);
  const double x = p_prev.x() - cmd.vx * dt;
  const double y = p_prev.y() - cmd.vy * dt;
  return {c * x + s * y, -s * x + c * y, -ride_height};
}

Expert::Expert(gait::GaitParams params, kin::RobotGeometry geometry, ExpertConfig config)
    : params_(params), geometry_(std::move(geometry)), config_(config) {
  gait::validate(params_);
  reset();
}

void Expert::set_params(const gait::GaitParams& p) {
  gait::validate(p);
  params_ = p;
}

FootTargets Expert::reset(double ride_height) {
  ride_height_ = ride_height;
  step_height_ = CommandLimits::kStepDefault;
  FootTargets out;
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    out[i] = geometry_[i].neutral_foot(-ride_height);
    swing_start_[i] = out[i];
    last_state_[i] = gait::LegState::kStance;
  }
  return out;
}

FootTargets Expert::step(const gait::GaitState& gait, const VelocityCommand& cmd, const BaseMotion& base,
                         const FootTargets& prev_targets) {
  const double dt = config_.control_dt;
  const double max_dh = config_.height_rate * dt;
  ride_height_ = approach(ride_height_, cmd.ride_height, max_dh);
  step_height_ = approach(step_height_, cmd.step_height, max_dh);

  FootTargets out;
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    const gait::LegState state = gait::leg_state(gait.phi[i], params_.r_swing);
    if (state == gait::LegState::kSwing) {
      if (last_state_[i] != gait::LegState::kSwing) swing_start_[i] = prev_targets[i];
      const Vec3 hip = geometry_[i].neutral_foot(-ride_height_);
      // Horizontal velocity of the hip point from the base twist.
      const Vec2 v_hip_cmd(cmd.vx - cmd.wz * hip.y(), cmd.vy + cmd.wz * hip.x());
      const Vec2 v_hip(base.linear_velocity.x() - base.angular_velocity.z() * hip.y(),
                       base.linear_velocity.y() + base.angular_velocity.z() * hip.x());
      const Vec3 foothold =
          raibert_swing_target(hip, v_hip, v_hip_cmd, params_, -ride_height_, config_.k_raibert);
      out[i] = swing_trajectory(gait::normalized_phase(gait.phi[i], params_.r_swing), swing_start_[i],
                                foothold, step_height_);
    } else {
      out[i] = stance_reference(prev_targets[i], cmd, dt, ride_height_);
    }
    last_state_[i] = state;
    if (kin::inverse_kinematics(out[i], geometry_[i]).clamped) ++ik_clamp_count_;
  }
  return out;
}

FootTargets Expert::compensate(const gait::GaitState& gait, const FootTargets& nominal) const {
  FootTargets out = nominal;
  if (config_.body_weight <= 0.0) return out;
  int stance = 0;
  for (double phi : gait.phi) stance += gait::leg_state(phi, params_.r_swing) == gait::LegState::kStance;
  if (stance == 0) return out;
  const Vec3 load(0.0, 0.0, config_.body_weight / stance);
  const Mat3 kp_inv = config_.joint_kp.cwiseInverse().asDiagonal();
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    if (gait::leg_state(gait.phi[i], params_.r_swing) != gait::LegState::kStance) continue;
    const double u = gait::normalized_phase(gait.phi[i], params_.r_swing);
    const double ramp = config_.load_ramp > 0.0 ? std::min(1.0, u / config_.load_ramp) : 1.0;
    const auto ik = kin::inverse_kinematics(nominal[i], geometry_[i]);
    const Mat3 j = kin::leg_jacobian(ik.q, geometry_[i]);
    out[i] -= ramp * (j * kp_inv * j.transpose() * load);
  }
  return out;
}

}  // namespace resloco::ref
