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

#include "resloco/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace resloco::sim {

namespace {

bool is_multiple(double big, double small) {
  const double ratio = big / small;
  return ratio >= 1.0 - 1e-9 && std::abs(ratio - std::round(ratio)) < 1e-9;
}

}  // namespace

int SimConfig::physics_per_control() const { return static_cast<int>(std::lround(control_dt / physics_dt)); }
int SimConfig::control_per_command() const { return static_cast<int>(std::lround(command_dt / control_dt)); }

void SimConfig::validate() const {
  if (!(physics_dt > 0.0) || !is_multiple(control_dt, physics_dt))
    throw std::invalid_argument("sim: control_dt must be an integer multiple of physics_dt");
  if (!is_multiple(command_dt, control_dt))
    throw std::invalid_argument("sim: command_dt must be an integer multiple of control_dt");
  if (!(base_mass > 0.0) || (base_inertia.array() <= 0.0).any() || !(joint_inertia > 0.0))
    throw std::invalid_argument("sim: mass and inertia must be positive");
  if (contact_stiffness <= 0.0 || contact_damping < 0.0 || tangential_stiffness <= 0.0 || friction < 0.0)
    throw std::invalid_argument("sim: invalid contact parameters");
}

JointVectors pd_torques(const JointTargets& q_target, const JointVectors& q, const JointVectors& qd,
                        const PdGains& gains, double limit) {
  JointVectors tau;
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    const Vec3 err = q_target[i].as_vector() - q[i];
    tau[i] = (gains.kp.cwiseProduct(err) - gains.kd.cwiseProduct(qd[i])).cwiseMax(-limit).cwiseMin(limit);
  }
  return tau;
}

double BaseState::roll() const {
  const auto& q = orientation;
  return std::atan2(2.0 * (q.w() * q.x() + q.y() * q.z()), 1.0 - 2.0 * (q.x() * q.x() + q.y() * q.y()));
}

double BaseState::pitch() const {
  const auto& q = orientation;
  return std::asin(std::clamp(2.0 * (q.w() * q.y() - q.z() * q.x()), -1.0, 1.0));
}

double BaseState::yaw() const {
  const auto& q = orientation;
  return std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()), 1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
}

World::World(SimConfig config, kin::RobotGeometry geometry, Terrain terrain)
    : config_(config), geometry_(std::move(geometry)), terrain_(std::move(terrain)) {
  config_.validate();
  reset(Vec2::Zero(), 0.0, ref::CommandLimits::kRideDefault);
}

void World::reset(const Vec2& xy, double yaw, double ride_height) {
  base_ = BaseState{};
  base_.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
  // Stand on the highest ground under the four feet so no foot starts buried.
  const Mat3 r = base_.rotation();
  double ground = terrain_.height(xy.x(), xy.y());
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    const Vec3 p = r * geometry_[i].neutral_foot(0.0);
    ground = std::max(ground, terrain_.height(xy.x() + p.x(), xy.y() + p.y()));
  }
  base_.position = Vec3(xy.x(), xy.y(), ground + ride_height);
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    const auto ik = kin::inverse_kinematics(geometry_[i].neutral_foot(-ride_height), geometry_[i]);
    legs_[i] = LegSimState{};
    legs_[i].q = ik.q.as_vector();
    legs_[i].foot_world = base_.position + r * ik.foot;
  }
  push_ = ExternalPush{};
  fault_ = false;
}

JointVectors World::joint_positions() const {
  JointVectors out;
  for (std::size_t i = 0; i < kNumLegs; ++i) out[i] = legs_[i].q;
  return out;
}

JointVectors World::joint_velocities() const {
  JointVectors out;
  for (std::size_t i = 0; i < kNumLegs; ++i) out[i] = legs_[i].qd;
  return out;
}

std::array<bool, kNumLegs> World::contacts() const {
  std::array<bool, kNumLegs> out{};
  for (std::size_t i = 0; i < kNumLegs; ++i) out[i] = legs_[i].contact;
  return out;
}

FootTargets World::feet_in_base() const {
  FootTargets out;
  for (std::size_t i = 0; i < kNumLegs; ++i)
    out[i] = kin::forward_kinematics(kin::JointAngles::from_vector(legs_[i].q), geometry_[i]);
  return out;
}

double World::terrain_height_below_base() const {
  return terrain_.height(base_.position.x(), base_.position.y());
}

double World::mechanical_energy() const {
  const Vec3& w = base_.angular_velocity;
  double e = 0.5 * config_.base_mass * base_.linear_velocity.squaredNorm() +
             0.5 * w.dot(config_.base_inertia.cwiseProduct(w)) + config_.base_mass * config_.gravity * base_.position.z();
  for (const auto& leg : legs_) {
    e += 0.5 * config_.joint_inertia * leg.qd.squaredNorm();
    if (leg.contact) {
      const Vec3& p = leg.foot_world;
      const Vec3 n = terrain_.normal(p.x(), p.y());
      const double pen = std::max(0.0, (terrain_.height(p.x(), p.y()) - p.z()) * n.z());
      Vec3 e_t = p - leg.anchor;
      e_t -= e_t.dot(n) * n;
      e += 0.5 * config_.contact_stiffness * pen * pen + 0.5 * config_.tangential_stiffness * e_t.squaredNorm();
    }
  }
  return e;
}

void step_physics(World& world, const JointVectors& torques, double dt) {
  const SimConfig& cfg = world.config_;
  BaseState& base = world.base_;
  const Mat3 rot = base.rotation();
  const Mat3 eye = Mat3::Identity();

  Vec3 force(0.0, 0.0, -cfg.base_mass * cfg.gravity);
  Vec3 torque = Vec3::Zero();

  for (std::size_t i = 0; i < kNumLegs; ++i) {
    LegSimState& leg = world.legs_[i];
    const kin::LegGeometry& geom = world.geometry_[i];
    const kin::JointAngles q = kin::JointAngles::from_vector(leg.q);
    const Vec3 r = kin::forward_kinematics(q, geom);
    const Mat3 jac = kin::leg_jacobian(q, geom);
    const Vec3 p = base.position + rot * r;
    const Vec3 v = base.linear_velocity + rot * (base.angular_velocity.cross(r) + jac * leg.qd);

    const double ground = world.terrain_.height(p.x(), p.y());
    const Vec3 n = world.terrain_.normal(p.x(), p.y());
    const double pen = (ground - p.z()) * n.z();

    Vec3 f_contact = Vec3::Zero();
    Mat3 k_contact = Mat3::Zero();
    Mat3 d_contact = Mat3::Zero();
    if (pen > 0.0) {
      if (!leg.contact) {
        leg.anchor = p;
        leg.contact = true;
      }
      const Mat3 nn = n * n.transpose();
      const double vn = v.dot(n);
      const double fn = std::max(0.0, cfg.contact_stiffness * pen - cfg.contact_damping * vn);
      Vec3 e = p - leg.anchor;
      e -= e.dot(n) * n;
      const Vec3 vt = v - vn * n;
      Vec3 ft = -cfg.tangential_stiffness * e - cfg.tangential_damping * vt;
      const double cap = cfg.friction * fn;
      const double ft_norm = ft.norm();
      bool slipping = false;
      if (ft_norm > cap) {
        ft *= ft_norm > 0.0 ? cap / ft_norm : 0.0;
        leg.anchor = p + ft / cfg.tangential_stiffness;
        slipping = true;
      }
      f_contact = fn * n + ft;
      if (fn > 0.0) {
        k_contact += cfg.contact_stiffness * nn;
        d_contact += cfg.contact_damping * nn;
      }
      if (!slipping) k_contact += cfg.tangential_stiffness * (eye - nn);
      d_contact += cfg.tangential_damping * (eye - nn);
    } else {
      leg.contact = false;
    }
    leg.contact_force = f_contact;
    leg.foot_world = p;

    // Joint-space dynamics, linearly implicit in the contact terms.
    const Mat3 rj = rot * jac;
    const Mat3 kj = rj.transpose() * k_contact * rj;
    const Mat3 dj = rj.transpose() * d_contact * rj;
    const Vec3 f = torques[i] + rj.transpose() * f_contact;
    const Mat3 a = cfg.joint_inertia * eye + dt * dj + dt * dt * kj;
    const Vec3 delta = a.ldlt().solve(dt * f - dt * dt * kj * leg.qd);
    leg.qd += delta;
    leg.q += dt * leg.qd;
    for (int k = 0; k < 3; ++k) {
      if (leg.q[k] < geom.limits.lower[k]) {
        leg.q[k] = geom.limits.lower[k];
        leg.qd[k] = std::max(0.0, leg.qd[k]);
      } else if (leg.q[k] > geom.limits.upper[k]) {
        leg.q[k] = geom.limits.upper[k];
        leg.qd[k] = std::min(0.0, leg.qd[k]);
      }
    }

    force += f_contact;
    torque += (p - base.position).cross(f_contact);
    world.terrain_.apply_load(p, -f_contact);
  }

  ExternalPush& push = world.push_;
  if (push.remaining > 0.0) {
    const Vec3 point = base.position + rot * push.point_body;
    force += push.force;
    torque += (point - base.position).cross(push.force);
    push.remaining -= dt;
  }

  base.linear_velocity += dt * force / cfg.base_mass;
  base.position += dt * base.linear_velocity;
  const Vec3& inertia = cfg.base_inertia;
  Vec3& w = base.angular_velocity;
  const Vec3 tau_body = rot.transpose() * torque;
  const Vec3 w_dot = (tau_body - w.cross(inertia.cwiseProduct(w))).cwiseQuotient(inertia);
  w += dt * w_dot;
  const double angle = w.norm() * dt;
  if (angle > 0.0) {
    base.orientation = (base.orientation * Eigen::Quaterniond(Eigen::AngleAxisd(angle, w.normalized()))).normalized();
  }

  world.terrain_.step(dt);
  world.time_ += dt;
  ++world.physics_ticks_;

  const bool finite = base.position.allFinite() && base.linear_velocity.allFinite() && w.allFinite();
  if (!finite || base.linear_velocity.norm() > cfg.sanity_velocity || w.norm() > cfg.sanity_velocity)
    world.fault_ = true;
}

bool has_fallen(const World& world) {
  const BaseState& b = world.base();
  const double clearance = b.position.z() - world.terrain_height_below_base();
  return clearance < world.config().fall_height || std::abs(b.roll()) > world.config().fall_angle ||
         std::abs(b.pitch()) > world.config().fall_angle;
}

ref::BaseMotion base_motion(const World& world) {
  const BaseState& b = world.base();
  ref::BaseMotion m;
  m.pose.position = b.position;
  m.pose.yaw = b.yaw();
  m.pose.pitch = b.pitch();
  m.pose.roll = b.roll();
  m.linear_velocity = b.body_linear_velocity();
  m.angular_velocity = b.angular_velocity;
  return m;
}

Vec3 com_feature(const World& world, double nominal_height) {
  const FootTargets feet = world.feet_in_base();
  const auto contacts = world.contacts();
  Vec3 sum = Vec3::Zero();
  int n = 0;
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    if (contacts[i]) {
      sum += feet[i];
      ++n;
    }
  }
  if (n == 0) {
    for (const Vec3& f : feet) sum += f;
    n = static_cast<int>(kNumLegs);
  }
  return sum / (n * nominal_height);
}

Vec2 sample_target(const Vec2& from, double dmin, double dmax, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> dist(dmin, dmax);
  const double a = angle(rng);
  const double d = dist(rng);
  return from + d * Vec2(std::cos(a), std::sin(a));
}

// ---------------------------------------------------------------------------

Task::Task(World world, TaskConfig config, std::vector<Vec2> targets, std::uint64_t seed)
    : world_(std::move(world)), config_(std::move(config)), targets_(std::move(targets)), rng_(seed) {
  gait::validate(config_.gait);
}

void Task::start(Controller& controller) {
  start_time_ = world_.time();
  control_ticks_ = command_ticks_ = 0;
  target_index_ = reached_ = 0;
  pushes_ = 0;
  cmd_ = ref::VelocityCommand{};
  cmd_.step_height = config_.command.step_height;
  cmd_.ride_height = config_.command.ride_height;
  for (std::size_t i = 0; i < kNumLegs; ++i) q_target_[i] = kin::JointAngles::from_vector(world_.legs()[i].q);
  if (config_.endless_targets && targets_.empty())
    targets_.push_back(sample_target(world_.base().position.head<2>(), config_.target_distance_min,
                                     config_.target_distance_max, rng_));
  activate_target();
  schedule_push();
  controller.reset(world_, config_.gait, cmd_);
}

void Task::activate_target() {
  if (target_index_ < targets_.size() && hook_) hook_(cmd_, rng_);
}

void Task::schedule_push() {
  const PerturbationSchedule& p = config_.perturbation;
  if (!p.enabled) return;
  std::uniform_real_distribution<double> interval(p.interval_min, p.interval_max);
  next_push_time_ = world_.time() + interval(rng_);
}

double Task::target_distance() const {
  if (target_index_ >= targets_.size()) return 0.0;
  return (targets_[target_index_] - world_.base().position.head<2>()).norm();
}

void Task::replace_active_target(const Vec2& target) {
  if (target_index_ < targets_.size()) {
    targets_[target_index_] = target;
  } else {
    targets_.push_back(target);
  }
  activate_target();
}

ControlInput Task::control_input() {
  if (control_ticks_ % static_cast<std::uint64_t>(world_.config().control_per_command()) == 0) {
    if (config_.fixed_command) {
      cmd_ = ref::approach_command(cmd_, config_.command);
    } else if (target_index_ < targets_.size()) {
      const ref::TargetSpec target{targets_[target_index_], config_.d_min};
      cmd_ = ref::next_command(cmd_, base_motion(world_).pose, target, config_.pursuit);
    }
    ++command_ticks_;
  }
  ControlInput in;
  in.world = &world_;
  in.params = config_.gait;
  in.gait = gait::state_at(config_.gait, elapsed());
  in.cmd = cmd_;
  in.base = base_motion(world_);
  return in;
}

rl::RewardMeasurements Task::measurements() const {
  const BaseState& b = world_.base();
  rl::RewardMeasurements m;
  m.v_cmd = Vec2(cmd_.vx, cmd_.vy);
  m.v_base = b.body_linear_velocity().head<2>();
  m.a_cmd = cmd_.wz;
  m.yaw_rate = b.angular_velocity.z();
  m.com = com_feature(world_);
  m.d_target = target_distance();
  m.pitch = b.pitch();
  m.roll = b.roll();
  return m;
}

StepOutcome Task::advance(const FootTargets& targets) {
  const kin::RobotGeometry& geom = world_.geometry();
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    const kin::IkResult ik = kin::inverse_kinematics(targets[i], geom[i]);
    q_target_[i] = ik.q;
    if (ik.clamped) ++ik_clamps_;
  }

  const PerturbationSchedule& pert = config_.perturbation;
  const int substeps = world_.config().physics_per_control();
  const double dt = world_.config().physics_dt;
  for (int k = 0; k < substeps; ++k) {
    if (pert.enabled && world_.time() >= next_push_time_ && (pert.max_pushes == 0 || pushes_ < pert.max_pushes)) {
      ++pushes_;
      std::uniform_real_distribution<double> magnitude(pert.magnitude_min, pert.magnitude_max);
      std::uniform_real_distribution<double> heading(-kPi, kPi);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      const double m = magnitude(rng_);
      const double h = heading(rng_);
      const Vec3& half = world_.config().body_half_extents;
      ExternalPush push;
      push.force = Vec3(m * std::cos(h), m * std::sin(h), 0.0);
      push.point_body = Vec3(half.x() * unit(rng_), half.y() * unit(rng_), half.z() * unit(rng_));
      push.remaining = pert.duration;
      world_.push(push);
      std::uniform_real_distribution<double> interval(pert.interval_min, pert.interval_max);
      next_push_time_ = world_.time() + interval(rng_);
    }
    const JointVectors tau = pd_torques(q_target_, world_.joint_positions(), world_.joint_velocities(), config_.pd,
                                        world_.config().torque_limit);
    step_physics(world_, tau, dt);
    if (world_.faulted()) break;
  }
  ++control_ticks_;

  StepOutcome out;
  if (world_.faulted()) {
    out.fault = out.done = true;
    return out;
  }
  out.events.fell = has_fallen(world_);
  out.events.target_reached = target_index_ < targets_.size() && target_distance() <= config_.d_min;
  out.reward = rl::compute_reward(measurements(), config_.reward, out.events);

  if (out.events.target_reached) {
    ++reached_;
    ++target_index_;
    if (config_.endless_targets) {
      targets_.push_back(sample_target(world_.base().position.head<2>(), config_.target_distance_min,
                                       config_.target_distance_max, rng_));
    }
    if (target_index_ >= targets_.size()) {
      out.success = true;
      out.done = true;
    } else {
      activate_target();
    }
  }
  if (out.events.fell) out.done = true;
  if (!out.done && elapsed() >= config_.timeout - 1e-9) {
    out.timeout = true;
    out.done = true;
  }
  return out;
}

}  // namespace resloco::sim
