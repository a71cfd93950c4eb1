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

#ifndef RESLOCO_TYPES_HPP_
#define RESLOCO_TYPES_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace resloco {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr std::size_t kNumLegs = 4;
inline constexpr double kPi = std::numbers::pi;

// Leg order used everywhere: front-right, front-left, rear-right, rear-left.
enum class Leg : std::size_t { kFR = 0, kFL = 1, kRR = 2, kRL = 3 };

inline constexpr std::array<const char*, kNumLegs> kLegNames = {"FR", "FL", "RR", "RL"};

/// Foot target positions in the base frame, meters. One 3-vector per leg.
using FootTargets = std::array<Vec3, kNumLegs>;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * kPi;
  a = a - kTwoPi * std::floor((a + kPi) / kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  return a;
}

inline Eigen::Matrix<double, 12, 1> flatten(const FootTargets& t) {
  Eigen::Matrix<double, 12, 1> out;
  for (std::size_t i = 0; i < kNumLegs; ++i) out.segment<3>(3 * i) = t[i];
  return out;
}

inline FootTargets unflatten(const Eigen::Ref<const Eigen::VectorXd>& v) {
  FootTargets t;
  for (std::size_t i = 0; i < kNumLegs; ++i) t[i] = v.segment<3>(3 * i);
  return t;
}

}  // namespace resloco

#endif  // RESLOCO_TYPES_HPP_
