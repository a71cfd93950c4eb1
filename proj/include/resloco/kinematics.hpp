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

// Three-DOF leg kinematics (abduction, hip, knee).
//
// Convention: base frame x forward, y left, z up. Abduction rotates about the
// body x-axis at `hip_offset`; hip and knee rotate about the (abducted) pitch
// axis. With all joints at zero the leg hangs straight down, offset
// laterally by mirror * l_abd. The knee is always flexed backward
// (knee angle in [-pi, 0]).

#ifndef RESLOCO_KINEMATICS_HPP_
#define RESLOCO_KINEMATICS_HPP_

#include <array>

#include "resloco/types.hpp"

namespace resloco::kin {

struct JointAngles {
  double abduction = 0.0;
  double hip = 0.0;
  double knee = 0.0;

  Vec3 as_vector() const { return {abduction, hip, knee}; }
  static JointAngles from_vector(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

struct JointLimits {
  Vec3 lower{-kPi / 2.0, -kPi, -kPi};
  Vec3 upper{kPi / 2.0, kPi, 0.0};
};

struct LegGeometry {
  Vec3 hip_offset = Vec3::Zero();
  double l_abd = 0.08;
  double l_thigh = 0.2;
  double l_shank = 0.2;
  double mirror = 1.0;  // +1 left legs, -1 right legs
  JointLimits limits{};

  double max_reach() const;  // distance from hip_offset at full extension
  double min_reach() const;
  /// Ground projection of the neutral foot (hip offset plus abduction link).
  Vec3 neutral_foot(double height) const {
    return {hip_offset.x(), hip_offset.y() + mirror * l_abd, height};
  }
};

/// Per-leg geometry for the whole robot, in leg order FR, FL, RR, RL.
using RobotGeometry = std::array<LegGeometry, kNumLegs>;

/// A1-like nominal numbers. Tests parameterize over geometry instead.
RobotGeometry default_geometry();

struct IkResult {
  JointAngles q;
  Vec3 foot = Vec3::Zero();  // FK(q); differs from the request when clamped
  bool clamped = false;
};

Vec3 forward_kinematics(const JointAngles& q, const LegGeometry& g);

/// Closed-form inverse on the knee-backward branch. Targets outside the
/// workspace are projected onto its boundary along the ray from
/// `hip_offset`; the result then carries `clamped = true`.
IkResult inverse_kinematics(const Vec3& p, const LegGeometry& g);

/// d(foot)/d(q), columns ordered abduction, hip, knee.
Mat3 leg_jacobian(const JointAngles& q, const LegGeometry& g);

}  // namespace resloco::kin

#endif  // RESLOCO_KINEMATICS_HPP_
