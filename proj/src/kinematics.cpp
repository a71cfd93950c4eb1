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

#include "resloco/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace resloco::kin {

namespace {

double sqr(double v) { return v * v; }

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

}  // namespace

double LegGeometry::max_reach() const {
  return std::sqrt(sqr(l_abd) + sqr(l_thigh + l_shank));
}

double LegGeometry::min_reach() const {
  return std::sqrt(sqr(l_abd) + sqr(l_thigh - l_shank));
}

RobotGeometry default_geometry() {
  RobotGeometry g;
  const std::array<Vec3, kNumLegs> hips = {Vec3(0.183, -0.047, 0.0), Vec3(0.183, 0.047, 0.0),
                                           Vec3(-0.183, -0.047, 0.0), Vec3(-0.183, 0.047, 0.0)};
  const std::array<double, kNumLegs> mirror = {-1.0, 1.0, -1.0, 1.0};
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    g[i].hip_offset = hips[i];
    g[i].mirror = mirror[i];
  }
  return g;
}

Vec3 forward_kinematics(const JointAngles& q, const LegGeometry& g) {
  const double s1 = std::sin(q.hip), c1 = std::cos(q.hip);
  const double s12 = std::sin(q.hip + q.knee), c12 = std::cos(q.hip + q.knee);
  const Vec3 leg(-g.l_thigh * s1 - g.l_shank * s12, g.mirror * g.l_abd,
                 -g.l_thigh * c1 - g.l_shank * c12);
  return g.hip_offset + rot_x(q.abduction) * leg;
}

IkResult inverse_kinematics(const Vec3& p, const LegGeometry& g) {
  IkResult out;
  const double a = g.mirror * g.l_abd;
  const double l1 = g.l_thigh, l2 = g.l_shank;

  Vec3 d = p - g.hip_offset;
  double n = d.norm();
  const double n_min = g.min_reach(), n_max = g.max_reach();
  if (n < 1e-12) {
    d = Vec3(0.0, 0.0, -1.0);
    n = 1.0;
  }
  if (n > n_max || n < n_min) {
    d *= std::clamp(n, n_min, n_max) / n;
    out.clamped = true;
  }

  double l_sq = sqr(d.y()) + sqr(d.z()) - sqr(a);
  if (l_sq < 0.0) {
    l_sq = 0.0;
    out.clamped = true;
  }
  const double len = std::sqrt(l_sq);

  Vec3 q;
  q[0] = wrap_angle(std::atan2(d.z(), d.y()) - std::atan2(-len, a));
  const double cos_knee = std::clamp((sqr(d.x()) + l_sq - sqr(l1) - sqr(l2)) / (2.0 * l1 * l2), -1.0, 1.0);
  q[2] = -std::acos(cos_knee);
  q[1] = std::atan2(-d.x(), len) - std::atan2(l2 * std::sin(q[2]), l1 + l2 * std::cos(q[2]));

  const Vec3 limited = q.cwiseMax(g.limits.lower).cwiseMin(g.limits.upper);
  if (limited != q) out.clamped = true;
  out.q = JointAngles::from_vector(limited);
  out.foot = forward_kinematics(out.q, g);
  return out;
}

Mat3 leg_jacobian(const JointAngles& q, const LegGeometry& g) {
  const double s1 = std::sin(q.hip), c1 = std::cos(q.hip);
  const double s12 = std::sin(q.hip + q.knee), c12 = std::cos(q.hip + q.knee);
  const double ca = std::cos(q.abduction), sa = std::sin(q.abduction);
  const Vec3 leg(-g.l_thigh * s1 - g.l_shank * s12, g.mirror * g.l_abd,
                 -g.l_thigh * c1 - g.l_shank * c12);
  Mat3 d_rot;
  d_rot << 0, 0, 0, 0, -sa, -ca, 0, ca, -sa;
  const Mat3 r = rot_x(q.abduction);

  Mat3 j;
  j.col(0) = d_rot * leg;
  j.col(1) = r * Vec3(-g.l_thigh * c1 - g.l_shank * c12, 0.0, g.l_thigh * s1 + g.l_shank * s12);
  j.col(2) = r * Vec3(-g.l_shank * c12, 0.0, g.l_shank * s12);
  return j;
}

}  // namespace resloco::kin
