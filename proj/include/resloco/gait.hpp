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

// Gait scheduling: per-leg phase evolution, swing/stance classification and
// the normalized-phase transform fed to the kernel network.
//
// A step cycle starts with swing (phase in (0, r_swing]) and ends with stance
// (phase in (r_swing, 1]). Phases live in (0, 1]; a wrap to zero is
// represented as 1 so that the end of stance stays in the stance branch.

#ifndef RESLOCO_GAIT_HPP_
#define RESLOCO_GAIT_HPP_

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "resloco/types.hpp"

namespace resloco::gait {

/// Control-loop rate at which phases are advanced.
inline constexpr double kGaitRateHz = 200.0;

struct GaitParams {
  std::array<double, kNumLegs> theta{};  // initial phase per leg, (0, 1]
  double r_swing = 0.4;                  // swing ratio, (0, 1)
  double tau_stance = 0.3;               // stance duration, seconds
};

struct GaitState {
  std::array<double, kNumLegs> phi{1.0, 1.0, 1.0, 1.0};
  double elapsed = 0.0;
};

enum class LegState { kSwing, kStance };

inline void validate(const GaitParams& p) {
  for (double t : p.theta) {
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("gait: theta must lie in (0, 1]");
  }
  if (!(p.r_swing > 0.0 && p.r_swing < 1.0)) {
    throw std::invalid_argument("gait: r_swing must lie in (0, 1)");
  }
  if (!(p.tau_stance > 0.0) || !std::isfinite(p.tau_stance)) {
    throw std::invalid_argument("gait: tau_stance must be positive");
  }
}

inline double swing_duration(const GaitParams& p) {
  return p.tau_stance / (1.0 - p.r_swing) * p.r_swing;
}

inline double step_cycle_duration(const GaitParams& p) {
  return p.tau_stance + swing_duration(p);
}

/// (theta + elapsed / tau_step) mod 1, mapped into (0, 1].
inline double current_phase(double theta, double elapsed, double tau_step) {
  double phi = std::fmod(theta + elapsed / tau_step, 1.0);
  if (phi < 0.0) phi += 1.0;
  if (phi == 0.0) phi = 1.0;
  return phi;
}

/// Swing maps to (1, 2], stance to (0, 1]. phi == r_swing is swing.
inline double normalized_phase(double phi, double r_swing) {
  if (phi <= r_swing) return 1.0 + phi / r_swing;
  return (phi - r_swing) / (1.0 - r_swing);
}

inline LegState leg_state(double phi, double r_swing) {
  return phi <= r_swing ? LegState::kSwing : LegState::kStance;
}

inline GaitState state_at(const GaitParams& p, double elapsed) {
  const double tau_step = step_cycle_duration(p);
  GaitState s;
  s.elapsed = elapsed;
  for (std::size_t i = 0; i < kNumLegs; ++i) s.phi[i] = current_phase(p.theta[i], elapsed, tau_step);
  return s;
}

inline std::array<double, kNumLegs> normalized_phases(const GaitState& s, double r_swing) {
  std::array<double, kNumLegs> out{};
  for (std::size_t i = 0; i < kNumLegs; ++i) out[i] = normalized_phase(s.phi[i], r_swing);
  return out;
}

/// One row per sample time k * dt, true where the leg is in stance.
using ContactTimeline = std::vector<std::array<bool, kNumLegs>>;

inline ContactTimeline contact_schedule(const GaitParams& p, double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("gait: dt must be positive");
  if (!(horizon >= 0.0)) throw std::invalid_argument("gait: horizon must be non-negative");
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
  ContactTimeline out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const GaitState s = state_at(p, static_cast<double>(k) * dt);
    std::array<bool, kNumLegs> row{};
    for (std::size_t i = 0; i < kNumLegs; ++i) row[i] = leg_state(s.phi[i], p.r_swing) == LegState::kStance;
    out.push_back(row);
  }
  return out;
}

/// CSV with header `time,leg0,leg1,leg2,leg3`.
inline void write_contact_schedule_csv(std::ostream& os, const ContactTimeline& tl, double dt) {
  os << "time,leg0,leg1,leg2,leg3\n";
  char buf[64];
  for (std::size_t k = 0; k < tl.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.6f", static_cast<double>(k) * dt);
    os << buf;
    for (bool c : tl[k]) os << ',' << (c ? 1 : 0);
    os << '\n';
  }
}

// Presets. Table order is FR, FL, RR, RL; a zero offset is stored as 1.
inline GaitParams walk() { return {{1.0, 0.5, 0.75, 0.25}, 0.25, 0.3}; }
inline GaitParams trot() { return {{0.9, 0.4, 0.4, 0.9}, 0.4, 0.3}; }
inline GaitParams bound() { return {{0.4, 0.4, 0.9, 0.9}, 0.3, 0.1}; }
/// Trot with the 0.2 s stance used for expert data collection and evaluation.
inline GaitParams expert_trot() {
  GaitParams p = trot();
  p.tau_stance = 0.2;
  return p;
}

inline GaitParams preset(std::string_view name) {
  if (name == "walk") return walk();
  if (name == "trot") return trot();
  if (name == "bound") return bound();
  if (name == "expert_trot") return expert_trot();
  throw std::invalid_argument("gait: unknown preset '" + std::string(name) + "'");
}

}  // namespace resloco::gait

#endif  // RESLOCO_GAIT_HPP_
