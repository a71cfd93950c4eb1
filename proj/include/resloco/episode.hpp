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

// Episode loop and the analytic expert as a closed-loop controller.

#ifndef RESLOCO_EPISODE_HPP_
#define RESLOCO_EPISODE_HPP_

#include <cstdint>
#include <functional>

#include "resloco/reference.hpp"
#include "resloco/sim.hpp"

namespace resloco::sim {

class ExpertController : public Controller {
 public:
  explicit ExpertController(kin::RobotGeometry geometry, ref::ExpertConfig config = {});

  void reset(const World& world, const gait::GaitParams& params, const ref::VelocityCommand& cmd) override;
  FootTargets compute(const ControlInput& in) override;

  const ref::Expert& expert() const { return expert_; }
  const FootTargets& nominal_targets() const { return prev_; }

 private:
  ref::Expert expert_;
  FootTargets prev_{};
};

struct EpisodeMetrics {
  double reward_mean = 0.0;  // per control step
  double reward_std = 0.0;
  double reward_total = 0.0;
  std::uint64_t steps = 0;
  std::size_t num_targets = 0;
  bool success = false;  // every listed target reached
  bool fell = false;
  bool timeout = false;
  bool fault = false;
  double sim_time = 0.0;
  double wall_time = 0.0;
};

/// Called after every control step with the task and that step's outcome.
using StepObserver = std::function<void(const Task&, const StepOutcome&)>;

/// Runs the three-rate loop until the task reports done. An empty target
/// list with finite targets is an immediate success. A controller that
/// throws std::runtime_error or std::domain_error ends the episode as a fault.
EpisodeMetrics run_episode(Task& task, Controller& controller, const StepObserver& observer = {});

}  // namespace resloco::sim

#endif  // RESLOCO_EPISODE_HPP_
