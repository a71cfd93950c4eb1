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

// Locomotion reward: weighted radial-basis tracking features plus nominal
// event terms (fall penalty, target bonus).

#ifndef RESLOCO_REWARD_HPP_
#define RESLOCO_REWARD_HPP_

#include <cmath>

#include "resloco/types.hpp"

namespace resloco::rl {

struct RbfTerm {
  double steepness = 1.0;
  double weight = 0.0;
};

struct RewardSpec {
  RbfTerm linear_velocity{18.42, 0.0076};
  RbfTerm angular_velocity{7.47, 0.0264};
  RbfTerm com{2.35, 0.0298};
  RbfTerm distance{0.74, 0.0169};
  RbfTerm attitude{7.47, 0.0298};
  Vec3 com_target{0.0, 0.0, -1.0};
  double fall_penalty = -19.8;
  double target_bonus = 8.75;
  double d_min = 0.5;
};

/// Quantities the reward reads each control step.
struct RewardMeasurements {
  Vec2 v_cmd = Vec2::Zero();   // commanded frontal/lateral velocity
  Vec2 v_base = Vec2::Zero();  // realized frontal/lateral velocity, base frame
  double a_cmd = 0.0;          // commanded yaw rate
  double yaw_rate = 0.0;       // realized yaw rate
  Vec3 com = Vec3(0.0, 0.0, -1.0);
  double d_target = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

struct RewardEvents {
  bool fell = false;
  bool target_reached = false;
};

/// exp(-|target - measured|^2 * steepness); squared Euclidean norm over
/// paired components.
template <typename A, typename B>
double rbf(const A& target, const B& measured, double steepness) {
  return std::exp(-(target - measured).squaredNorm() * steepness);
}

inline double rbf(double target, double measured, double steepness) {
  const double d = target - measured;
  return std::exp(-d * d * steepness);
}

struct RewardBreakdown {
  double linear_velocity = 0.0;  // feature values in (0, 1]
  double angular_velocity = 0.0;
  double com = 0.0;
  double distance = 0.0;
  double attitude = 0.0;
  double nominal = 0.0;
  double total = 0.0;
};

inline RewardBreakdown reward_breakdown(const RewardMeasurements& m, const RewardSpec& s, const RewardEvents& e) {
  RewardBreakdown b;
  b.linear_velocity = rbf(m.v_cmd, m.v_base, s.linear_velocity.steepness);
  b.angular_velocity = rbf(m.a_cmd, m.yaw_rate, s.angular_velocity.steepness);
  b.com = rbf(s.com_target, m.com, s.com.steepness);
  b.distance = rbf(0.0, m.d_target, s.distance.steepness);
  b.attitude = rbf(Vec2::Zero().eval(), Vec2(m.pitch, m.roll), s.attitude.steepness);
  b.nominal = (e.fell ? s.fall_penalty : 0.0) + (e.target_reached ? s.target_bonus : 0.0);
  b.total = s.linear_velocity.weight * b.linear_velocity + s.angular_velocity.weight * b.angular_velocity +
            s.com.weight * b.com + s.distance.weight * b.distance + s.attitude.weight * b.attitude + b.nominal;
  return b;
}

inline double compute_reward(const RewardMeasurements& m, const RewardSpec& s, const RewardEvents& e) {
  return reward_breakdown(m, s, e).total;
}

}  // namespace resloco::rl

#endif  // RESLOCO_REWARD_HPP_
