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

#include "resloco/episode.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace resloco::sim {

ExpertController::ExpertController(kin::RobotGeometry geometry, ref::ExpertConfig config)
    : expert_(gait::trot(), std::move(geometry), config) {}

void ExpertController::reset(const World& world, const gait::GaitParams& params, const ref::VelocityCommand& cmd) {
  expert_.set_params(params);
  prev_ = expert_.reset(cmd.ride_height);
  (void)world;
}

FootTargets ExpertController::compute(const ControlInput& in) {
  prev_ = expert_.step(in.gait, in.cmd, in.base, prev_);
  return expert_.compensate(in.gait, prev_);
}

EpisodeMetrics run_episode(Task& task, Controller& controller, const StepObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  EpisodeMetrics m;
  task.start(controller);
  if (task.targets().empty() && !task.config().endless_targets) {
    m.success = true;
    return m;
  }
  double sum = 0.0, sum_sq = 0.0;
  while (true) {
    const ControlInput in = task.control_input();
    FootTargets targets;
    try {
      targets = controller.compute(in);
    } catch (const std::domain_error&) {
      m.fault = true;  // non-finite observation or action
      break;
    } catch (const std::runtime_error&) {
      m.fault = true;  // non-finite network output
      break;
    }
    const StepOutcome out = task.advance(targets);
    if (observer) observer(task, out);
    if (out.fault) {
      m.fault = true;
      break;
    }
    sum += out.reward;
    sum_sq += out.reward * out.reward;
    ++m.steps;
    if (out.done) {
      m.success = out.success;
      m.fell = out.events.fell;
      m.timeout = out.timeout;
      break;
    }
  }
  m.num_targets = task.targets_reached();
  m.sim_time = task.elapsed();
  m.reward_total = sum;
  if (m.steps > 0) {
    const double n = static_cast<double>(m.steps);
    m.reward_mean = sum / n;
    m.reward_std = std::sqrt(std::max(0.0, sum_sq / n - m.reward_mean * m.reward_mean));
  }
  m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

}  // namespace resloco::sim
