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

// Residual agent: observation, action clamp and low-pass filter, a Gaussian
// actor-critic and a clipped-surrogate PPO trainer on top of a frozen kernel.

#ifndef RESLOCO_RESIDUAL_HPP_
#define RESLOCO_RESIDUAL_HPP_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "resloco/kernel.hpp"
#include "resloco/mlp.hpp"
#include "resloco/sim.hpp"

namespace resloco::rl {

inline constexpr int kObsDim = 54;
inline constexpr int kActDim = 12;
inline constexpr double kMaxResidual = 0.05;  // m, per component
inline constexpr double kLpfAlpha = 0.1;

using Action = Eigen::Matrix<double, kActDim, 1>;
using VectorD = Eigen::VectorXd;
using MatrixD = Eigen::MatrixXd;

// Observation layout (offsets into the 54-vector).
struct ObsLayout {
  static constexpr int kVBase = 0;     // 3, base frame m/s
  static constexpr int kABase = 3;     // 3, roll/pitch/yaw rates
  static constexpr int kVCmd = 6;      // 2
  static constexpr int kACmd = 8;      // 1
  static constexpr int kQ = 9;         // 12
  static constexpr int kQd = 21;       // 12
  static constexpr int kCom = 33;      // 3
  static constexpr int kPitch = 36;    // 1
  static constexpr int kRoll = 37;     // 1
  static constexpr int kContact = 38;  // 4
  static constexpr int kDelta = 42;    // 12, previous filtered residual
};
static_assert(ObsLayout::kDelta + kActDim == kObsDim);

struct LpfState {
  Action prev = Action::Zero();
  double alpha = kLpfAlpha;
};

/// out = alpha * action + (1 - alpha) * prev; the state stores out.
Action apply_lpf(LpfState& state, const Action& action);

/// Per-component clamp to +-kMaxResidual. Throws std::domain_error on NaN.
Action clamp_action(const VectorD& raw);

/// Raw (unscaled) observation. Throws std::domain_error if non-finite.
VectorD assemble_observation(const sim::World& world, const ref::VelocityCommand& cmd, const LpfState& lpf);

/// Fixed per-field divisors applied before the network.
const VectorD& observation_scale();

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimation. `values` holds T or T+1 entries; the
/// extra entry bootstraps the step after the last one (0 when absent).
/// dones[t] marks a terminal transition (no bootstrap across it).
GaeResult gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                         const std::vector<bool>& dones, double gamma, double lambda);

/// In place to mean 0, std 1 (population); a constant vector maps to zeros.
void normalize_advantages(std::vector<double>& adv);

struct PpoHParams {
  double lr = 1e-3;
  double lr_exp_decay = 1e-7;  // lr_t = lr * exp(-decay * timesteps)
  double entropy_coef = 5e-6;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int epochs = 10;
  int rollout = 20000;
  int batch = 4000;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
};

struct PolicyConfig {
  int obs_dim = kObsDim;
  int act_dim = kActDim;
  std::vector<int> features{128, 128};
  std::vector<int> actor{128};
  std::vector<int> critic{64};
  /// The actor works in units of `action_scale`; residual = scale * action.
  double action_scale = kMaxResidual;
  double log_std_init = -1.3862943611198906;  // ln(0.25)
};

/// Shared tanh feature extractor with a Gaussian actor head (state-
/// independent log-std) and a value head.
class Policy {
 public:
  Policy() = default;
  Policy(const PolicyConfig& cfg, std::mt19937_64& rng);

  const PolicyConfig& config() const { return cfg_; }
  nn::Mlp<double>& features() { return features_; }
  nn::Mlp<double>& actor() { return actor_; }
  nn::Mlp<double>& critic() { return critic_; }
  const nn::Mlp<double>& features() const { return features_; }
  const nn::Mlp<double>& actor() const { return actor_; }
  const nn::Mlp<double>& critic() const { return critic_; }
  VectorD& log_std() { return log_std_; }
  const VectorD& log_std() const { return log_std_; }
  /// Divisors applied to observations; all ones unless set.
  VectorD& obs_scale() { return obs_scale_; }
  const VectorD& obs_scale() const { return obs_scale_; }

  /// Columns are observations. Outputs action means and values.
  void evaluate(const MatrixD& obs, MatrixD* mean, VectorD* value) const;
  /// Mean action in actor units.
  Action mean_action(const VectorD& obs) const;
  /// Clamped residual in meters for an action in actor units.
  Action residual(const VectorD& action) const { return clamp_action(cfg_.action_scale * action); }
  double value(const VectorD& obs) const;

  std::size_t num_params() const;

 private:
  PolicyConfig cfg_;
  nn::Mlp<double> features_, actor_, critic_;
  VectorD log_std_;
  VectorD obs_scale_;
};

/// Log-density of `a` under N(mean, diag(exp(log_std))^2).
double gaussian_log_prob(const VectorD& a, const VectorD& mean, const VectorD& log_std);
double gaussian_entropy(const VectorD& log_std);

struct PpoBatch {
  MatrixD obs;      // obs_dim x B
  MatrixD actions;  // act_dim x B, actor units as sampled (before clamping)
  VectorD old_log_prob;
  VectorD advantages;
  VectorD returns;
};

struct PolicyGrad {
  VectorD features, actor, critic, log_std;
  void zero_like(const Policy& p);
  double squared_norm() const;
  void scale(double s);
};

struct PpoLoss {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

/// Clipped surrogate + value_coef * MSE - entropy_coef * entropy, averaged
/// over the batch. Writes the exact gradient when `grad` is non-null.
PpoLoss ppo_loss(const Policy& policy, const PpoBatch& batch, const PpoHParams& hp, PolicyGrad* grad);

struct PpoOptimizer {
  nn::Adam<double> features, actor, critic, log_std;
};

struct UpdateStats {
  PpoLoss last{};
  double lr = 0.0;
  int minibatches = 0;
  bool aborted = false;  // non-finite loss; parameters restored
};

/// Normalizes advantages over the whole rollout, then runs hp.epochs passes
/// of shuffled mini-batches of hp.batch with global-norm gradient clipping.
UpdateStats ppo_update(Policy& policy, PpoOptimizer& opt, const PpoBatch& rollout, const PpoHParams& hp,
                       std::uint64_t timesteps, std::mt19937_64& rng);

/// Kernel output plus the filtered residual.
FootTargets add_residual(const FootTargets& kernel_targets, const Action& filtered);

/// Deterministic evaluation controller: kernel + filtered mean residual.
class AgentController : public sim::Controller {
 public:
  AgentController(const kernel::Model& kernel, const Policy& policy) : kernel_(&kernel), policy_(&policy) {}
  void reset(const sim::World& world, const gait::GaitParams& params, const ref::VelocityCommand& cmd) override;
  FootTargets compute(const sim::ControlInput& in) override;
  const LpfState& lpf() const { return lpf_; }

 private:
  const kernel::Model* kernel_;
  const Policy* policy_;
  LpfState lpf_{};
};

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  PpoHParams ppo{};
  PolicyConfig policy{};
  std::uint64_t total_timesteps = 100000;
  int n_envs = 2;
  int workers = 1;
  std::uint64_t seed = 0;
  sim::SimConfig sim{};
  sim::TerrainParams terrain{};
  gait::GaitParams gait = gait::expert_trot();
  double episode_seconds = 60.0;
  /// Terrain curriculum; with flat_only every episode is flat.
  bool flat_only = false;
  double heightfield_prob = 0.75;
  int episodes_per_terrain = 5;
  sim::PerturbationSchedule perturbation{true, 5.0, 8.0, 100.0, 350.0, 0.3, 0};
  double target_distance_min = 2.5;
  double target_distance_max = 3.5;
  /// Targets reached beyond this count with no fall mark an episode a success.
  std::size_t success_targets = 2;
};

struct EpisodeLog {
  std::size_t env = 0;
  std::size_t index = 0;  // per env
  std::uint64_t timesteps = 0;  // global count when the episode ended
  double reward = 0.0;
  std::uint64_t length = 0;
  std::size_t targets = 0;
  bool fell = false;
  bool success = false;
  bool fault = false;
  std::string terrain;
};

struct CurvePoint {
  std::uint64_t timesteps = 0;
  double reward = 0.0;        // mean episode reward of episodes ending in this rollout
  double success_rate = 0.0;
  double target_count = 0.0;
  std::size_t episodes = 0;
  UpdateStats update{};
};

struct TrainResult {
  Policy policy;
  std::vector<CurvePoint> curve;
  std::vector<EpisodeLog> episodes;
  std::uint64_t kernel_hash_before = 0;
  std::uint64_t kernel_hash_after = 0;
  std::size_t env_faults = 0;
};

/// The kernel is only read; its hash is recorded before and after.
TrainResult train_agent(const kernel::Model& kernel, const TrainConfig& cfg);

void write_curve_csv(const std::vector<CurvePoint>& curve, std::ostream& os);
void write_episodes_csv(const std::vector<EpisodeLog>& eps, std::ostream& os);

inline constexpr std::string_view kPolicyMagic = "RLPOLICY";
inline constexpr std::uint32_t kPolicyVersion = 1;

void save_policy(const Policy& p, std::uint64_t kernel_hash, const std::string& path);
/// Throws io::FormatException. Returns the stored kernel hash in `kernel_hash`.
Policy load_policy(const std::string& path, std::uint64_t* kernel_hash = nullptr);

}  // namespace resloco::rl

#endif  // RESLOCO_RESIDUAL_HPP_
