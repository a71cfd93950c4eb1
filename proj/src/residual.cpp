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

#include "resloco/residual.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "resloco/binio.hpp"
#include "resloco/eval.hpp"

namespace resloco::rl {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 ln(2 pi)

bool all_finite(const VectorD& v) { return v.allFinite(); }

}  // namespace

Action apply_lpf(LpfState& state, const Action& action) {
  state.prev = state.alpha * action + (1.0 - state.alpha) * state.prev;
  return state.prev;
}

Action clamp_action(const VectorD& raw) {
  if (raw.size() != kActDim) throw std::invalid_argument("clamp_action: expected 12 components");
  Action a;
  for (int i = 0; i < kActDim; ++i) {
    if (std::isnan(raw[i])) throw std::domain_error("clamp_action: NaN residual");
    a[i] = std::clamp(raw[i], -kMaxResidual, kMaxResidual);
  }
  return a;
}

VectorD assemble_observation(const sim::World& world, const ref::VelocityCommand& cmd, const LpfState& lpf) {
  using L = ObsLayout;
  VectorD o(kObsDim);
  const sim::BaseState& b = world.base();
  o.segment<3>(L::kVBase) = b.body_linear_velocity();
  o.segment<3>(L::kABase) = b.angular_velocity;
  o[L::kVCmd] = cmd.vx;
  o[L::kVCmd + 1] = cmd.vy;
  o[L::kACmd] = cmd.wz;
  const auto& legs = world.legs();
  for (std::size_t i = 0; i < kNumLegs; ++i) {
    o.segment<3>(L::kQ + 3 * static_cast<int>(i)) = legs[i].q;
    o.segment<3>(L::kQd + 3 * static_cast<int>(i)) = legs[i].qd;
    o[L::kContact + static_cast<int>(i)] = legs[i].contact ? 1.0 : 0.0;
  }
  o.segment<3>(L::kCom) = sim::com_feature(world);
  o[L::kPitch] = b.pitch();
  o[L::kRoll] = b.roll();
  o.segment<kActDim>(L::kDelta) = lpf.prev;
  if (!all_finite(o)) throw std::domain_error("observation: non-finite value");
  return o;
}

const VectorD& observation_scale() {
  static const VectorD scale = [] {
    using L = ObsLayout;
    VectorD s = VectorD::Ones(kObsDim);
    s.segment<12>(L::kQd).setConstant(10.0);
    s[L::kPitch] = 0.2;
    s[L::kRoll] = 0.2;
    s.segment<kActDim>(L::kDelta).setConstant(kMaxResidual);
    return s;
  }();
  return scale;
}

GaeResult gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                         const std::vector<bool>& dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (dones.size() != n) throw std::invalid_argument("gae: rewards and dones differ in length");
  if (values.size() != n && values.size() != n + 1) throw std::invalid_argument("gae: values must hold T or T+1 entries");
  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double last = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double next_v = dones[k] ? 0.0 : (k + 1 < values.size() ? values[k + 1] : 0.0);
    const double carry = dones[k] ? 0.0 : last;
    const double delta = rewards[k] + gamma * next_v - values[k];
    last = delta + gamma * lambda * carry;
    r.advantages[k] = last;
    r.returns[k] = last + values[k];
  }
  return r;
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  const double m = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(adv.size());
  double ss = 0.0;
  for (double a : adv) ss += (a - m) * (a - m);
  const double s = std::sqrt(ss / static_cast<double>(adv.size()));
  for (double& a : adv) a = (a - m) / (s + 1e-8);
}

// ---------------------------------------------------------------------------

Policy::Policy(const PolicyConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
  if (cfg.features.empty()) throw std::invalid_argument("policy: feature extractor needs a layer");
  std::vector<int> f{cfg.obs_dim};
  f.insert(f.end(), cfg.features.begin(), cfg.features.end());
  std::vector<int> a{cfg.features.back()};
  a.insert(a.end(), cfg.actor.begin(), cfg.actor.end());
  a.push_back(cfg.act_dim);
  std::vector<int> c{cfg.features.back()};
  c.insert(c.end(), cfg.critic.begin(), cfg.critic.end());
  c.push_back(1);
  features_ = nn::Mlp<double>(f, nn::Activation::kTanh, true, rng, 1.0, 1.0);
  actor_ = nn::Mlp<double>(a, nn::Activation::kTanh, false, rng, 1.0, 0.01);
  critic_ = nn::Mlp<double>(c, nn::Activation::kTanh, false, rng, 1.0, 1.0);
  log_std_ = VectorD::Constant(cfg.act_dim, cfg.log_std_init);
  obs_scale_ = cfg.obs_dim == kObsDim ? observation_scale() : VectorD::Ones(cfg.obs_dim);
}

void Policy::evaluate(const MatrixD& obs, MatrixD* mean, VectorD* value) const {
  const MatrixD x = obs.array().colwise() / obs_scale_.array();
  const MatrixD h = features_.forward(x);
  if (mean) *mean = actor_.forward(h);
  if (value) *value = critic_.forward(h).row(0).transpose();
}

Action Policy::mean_action(const VectorD& obs) const {
  MatrixD m;
  evaluate(obs, &m, nullptr);
  return m.col(0);
}

double Policy::value(const VectorD& obs) const {
  VectorD v;
  evaluate(obs, nullptr, &v);
  return v[0];
}

std::size_t Policy::num_params() const {
  return static_cast<std::size_t>(features_.params().size() + actor_.params().size() + critic_.params().size() +
                                  log_std_.size());
}

double gaussian_log_prob(const VectorD& a, const VectorD& mean, const VectorD& log_std) {
  double lp = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double z = (a[j] - mean[j]) * std::exp(-log_std[j]);
    lp += -0.5 * z * z - log_std[j] - kHalfLog2Pi;
  }
  return lp;
}

double gaussian_entropy(const VectorD& log_std) {
  return (log_std.array() + 0.5 + kHalfLog2Pi).sum();
}

void PolicyGrad::zero_like(const Policy& p) {
  features = VectorD::Zero(p.features().params().size());
  actor = VectorD::Zero(p.actor().params().size());
  critic = VectorD::Zero(p.critic().params().size());
  log_std = VectorD::Zero(p.log_std().size());
}

double PolicyGrad::squared_norm() const {
  return features.squaredNorm() + actor.squaredNorm() + critic.squaredNorm() + log_std.squaredNorm();
}

void PolicyGrad::scale(double s) {
  features *= s;
  actor *= s;
  critic *= s;
  log_std *= s;
}

PpoLoss ppo_loss(const Policy& policy, const PpoBatch& batch, const PpoHParams& hp, PolicyGrad* grad) {
  const Eigen::Index n = batch.obs.cols();
  if (n == 0) throw std::invalid_argument("ppo: empty batch");
  const double inv_n = 1.0 / static_cast<double>(n);
  const MatrixD x = batch.obs.array().colwise() / policy.obs_scale().array();

  nn::Mlp<double>::Cache fc, ac, cc;
  const MatrixD h = policy.features().forward(x, fc);
  const MatrixD mean = policy.actor().forward(h, ac);
  const MatrixD value = policy.critic().forward(h, cc);
  const VectorD& log_std = policy.log_std();
  const VectorD inv_var = (-2.0 * log_std.array()).exp().matrix();

  PpoLoss L;
  MatrixD d_mean(mean.rows(), n);
  MatrixD d_value(1, n);
  VectorD d_log_std = VectorD::Zero(log_std.size());
  double surrogate = 0.0, value_loss = 0.0;
  std::size_t clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const VectorD diff = batch.actions.col(i) - mean.col(i);
    const double lp = gaussian_log_prob(batch.actions.col(i), mean.col(i), log_std);
    const double ratio = std::exp(lp - batch.old_log_prob[i]);
    const double adv = batch.advantages[i];
    const double s1 = ratio * adv;
    const double s2 = std::clamp(ratio, 1.0 - hp.clip_eps, 1.0 + hp.clip_eps) * adv;
    surrogate += std::min(s1, s2);
    if (std::abs(ratio - 1.0) > hp.clip_eps) ++clipped;
    L.approx_kl += batch.old_log_prob[i] - lp;
    // d(-min)/d logp
    const double g = s1 <= s2 ? -s1 * inv_n : 0.0;
    d_mean.col(i) = g * diff.cwiseProduct(inv_var);
    d_log_std.array() += g * (diff.array().square() * inv_var.array() - 1.0);
    const double dv = value(0, i) - batch.returns[i];
    value_loss += dv * dv;
    d_value(0, i) = hp.value_coef * 2.0 * dv * inv_n;
  }
  L.policy = -surrogate * inv_n;
  L.value = value_loss * inv_n;
  L.entropy = gaussian_entropy(log_std);
  L.approx_kl *= inv_n;
  L.clip_fraction = static_cast<double>(clipped) * inv_n;
  L.total = L.policy + hp.value_coef * L.value - hp.entropy_coef * L.entropy;

  if (grad) {
    grad->zero_like(policy);
    const MatrixD dh_a = policy.actor().backward(ac, d_mean, grad->actor, true);
    const MatrixD dh_c = policy.critic().backward(cc, d_value, grad->critic, true);
    policy.features().backward(fc, dh_a + dh_c, grad->features, false);
    grad->log_std = d_log_std.array() - hp.entropy_coef;
  }
  return L;
}

namespace {

PpoBatch take_columns(const PpoBatch& b, const std::vector<Eigen::Index>& idx, std::size_t from, std::size_t to) {
  PpoBatch out;
  const auto m = static_cast<Eigen::Index>(to - from);
  out.obs.resize(b.obs.rows(), m);
  out.actions.resize(b.actions.rows(), m);
  out.old_log_prob.resize(m);
  out.advantages.resize(m);
  out.returns.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index i = idx[from + static_cast<std::size_t>(k)];
    out.obs.col(k) = b.obs.col(i);
    out.actions.col(k) = b.actions.col(i);
    out.old_log_prob[k] = b.old_log_prob[i];
    out.advantages[k] = b.advantages[i];
    out.returns[k] = b.returns[i];
  }
  return out;
}

}  // namespace

UpdateStats ppo_update(Policy& policy, PpoOptimizer& opt, const PpoBatch& rollout, const PpoHParams& hp,
                       std::uint64_t timesteps, std::mt19937_64& rng) {
  UpdateStats st;
  st.lr = hp.lr * std::exp(-hp.lr_exp_decay * static_cast<double>(timesteps));
  const auto n = static_cast<std::size_t>(rollout.obs.cols());
  if (n == 0) return st;
  PpoBatch data = rollout;
  std::vector<double> adv(data.advantages.data(), data.advantages.data() + data.advantages.size());
  normalize_advantages(adv);
  data.advantages = Eigen::Map<const VectorD>(adv.data(), static_cast<Eigen::Index>(adv.size()));

  const Policy backup = policy;
  const PpoOptimizer opt_backup = opt;
  const std::size_t bs = std::max<std::size_t>(1, static_cast<std::size_t>(hp.batch));
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  PolicyGrad g;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t from = 0; from < n; from += bs) {
      const PpoBatch mb = take_columns(data, idx, from, std::min(n, from + bs));
      st.last = ppo_loss(policy, mb, hp, &g);
      const double norm = std::sqrt(g.squared_norm());
      if (!std::isfinite(st.last.total) || !std::isfinite(norm)) {
        policy = backup;
        opt = opt_backup;
        st.aborted = true;
        return st;
      }
      if (norm > hp.max_grad_norm) g.scale(hp.max_grad_norm / norm);
      opt.features.step(policy.features().params(), g.features, st.lr);
      opt.actor.step(policy.actor().params(), g.actor, st.lr);
      opt.critic.step(policy.critic().params(), g.critic, st.lr);
      opt.log_std.step(policy.log_std(), g.log_std, st.lr);
      ++st.minibatches;
    }
  }
  return st;
}

FootTargets add_residual(const FootTargets& kernel_targets, const Action& filtered) {
  FootTargets out = kernel_targets;
  for (std::size_t i = 0; i < kNumLegs; ++i) out[i] += filtered.segment<3>(3 * static_cast<int>(i));
  return out;
}

void AgentController::reset(const sim::World&, const gait::GaitParams&, const ref::VelocityCommand&) { lpf_ = {}; }

FootTargets AgentController::compute(const sim::ControlInput& in) {
  const VectorD obs = assemble_observation(*in.world, in.cmd, lpf_);
  const Action filtered = apply_lpf(lpf_, policy_->residual(policy_->mean_action(obs)));
  return add_residual(kernel::predict(*kernel_, in.gait, in.params, in.cmd), filtered);
}

// ---------------------------------------------------------------------------
// Training

namespace {

class NullController : public sim::Controller {
 public:
  void reset(const sim::World&, const gait::GaitParams&, const ref::VelocityCommand&) override {}
  FootTargets compute(const sim::ControlInput&) override { return {}; }
};

struct Segment {
  MatrixD obs, actions;
  std::vector<double> log_prob, rewards, values;
  std::vector<bool> dones;
  std::vector<EpisodeLog> episodes;  // timesteps holds the local step index
  std::size_t faults = 0;
};

class TrainEnv {
 public:
  TrainEnv(std::size_t id, const TrainConfig& cfg, const kernel::Model& kernel, std::uint64_t seed)
      : id_(id), cfg_(&cfg), kernel_(&kernel), rng_(seed) {
    new_episode();
  }

  void collect(const Policy& policy, std::size_t steps, Segment& seg) {
    const VectorD std_dev = policy.log_std().array().exp().matrix();
    std::normal_distribution<double> normal(0.0, 1.0);
    seg.obs.resize(kObsDim, static_cast<Eigen::Index>(steps));
    seg.actions.resize(kActDim, static_cast<Eigen::Index>(steps));
    for (std::size_t k = 0; k < steps; ++k) {
      MatrixD mean;
      VectorD value;
      policy.evaluate(obs_, &mean, &value);
      VectorD a = mean.col(0);
      for (int j = 0; j < kActDim; ++j) a[j] += std_dev[j] * normal(rng_);
      seg.obs.col(static_cast<Eigen::Index>(k)) = obs_;
      seg.actions.col(static_cast<Eigen::Index>(k)) = a;
      seg.log_prob.push_back(gaussian_log_prob(a, mean.col(0), policy.log_std()));
      seg.values.push_back(value[0]);

      double reward = 0.0;
      bool done = false, fault = false, timeout = false, fell = false;
      try {
        const Action filtered = apply_lpf(lpf_, policy.residual(a));
        const FootTargets kt = kernel::predict(*kernel_, in_.gait, in_.params, in_.cmd);
        const sim::StepOutcome out = task_->advance(add_residual(kt, filtered));
        reward = out.reward;
        done = out.done;
        fault = out.fault;
        timeout = out.timeout;
        fell = out.events.fell;
        if (!done) refresh();
      } catch (const std::exception&) {
        done = fault = true;
      }
      if (timeout && !fault && !fell) {
        // Truncation: bootstrap from the state the episode stopped in.
        try {
          refresh();
          reward += cfg_->ppo.gamma * policy.value(obs_);
        } catch (const std::exception&) {
        }
      }
      ep_reward_ += reward;
      ++ep_len_;
      seg.rewards.push_back(reward);
      seg.dones.push_back(done);
      if (done) {
        EpisodeLog log;
        log.env = id_;
        log.index = ep_index_++;
        log.timesteps = k;
        log.reward = ep_reward_;
        log.length = ep_len_;
        log.targets = task_->targets_reached();
        log.fell = fell;
        log.fault = fault;
        log.success = !fell && !fault && log.targets > cfg_->success_targets;
        log.terrain = sim::to_string(terrain_.kind());
        seg.episodes.push_back(log);
        if (fault) ++seg.faults;
        new_episode();
      }
    }
    seg.values.push_back(policy.value(obs_));
  }

 private:
  void refresh() {
    in_ = task_->control_input();
    obs_ = assemble_observation(task_->world(), in_.cmd, lpf_);
  }

  void new_episode() {
    const int per = std::max(1, cfg_->episodes_per_terrain);
    if (episodes_on_terrain_ % static_cast<std::size_t>(per) == 0) {
      sim::TerrainKind kind = sim::TerrainKind::kFlat;
      if (!cfg_->flat_only) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        kind = u(rng_) < cfg_->heightfield_prob ? sim::TerrainKind::kHeightfield : sim::TerrainKind::kPerlin;
      }
      terrain_ = sim::make_terrain(kind, cfg_->terrain, rng_());
    }
    ++episodes_on_terrain_;
    sim::TaskConfig tc;
    tc.gait = cfg_->gait;
    tc.perturbation = cfg_->perturbation;
    tc.endless_targets = true;
    tc.timeout = cfg_->episode_seconds;
    tc.target_distance_min = cfg_->target_distance_min;
    tc.target_distance_max = cfg_->target_distance_max;
    std::uniform_real_distribution<double> yaw(-kPi, kPi);
    sim::World world(cfg_->sim, kin::default_geometry(), terrain_);
    world.reset(Vec2::Zero(), yaw(rng_), ref::CommandLimits::kRideDefault);
    const Vec2 first = sim::sample_target(Vec2::Zero(), tc.target_distance_min, tc.target_distance_max, rng_);
    task_.emplace(std::move(world), tc, std::vector<Vec2>{first}, rng_());
    NullController null;
    task_->start(null);
    lpf_ = {};
    ep_reward_ = 0.0;
    ep_len_ = 0;
    refresh();
  }

  std::size_t id_;
  const TrainConfig* cfg_;
  const kernel::Model* kernel_;
  std::mt19937_64 rng_;
  sim::Terrain terrain_;
  std::size_t episodes_on_terrain_ = 0;
  std::optional<sim::Task> task_;
  sim::ControlInput in_;
  VectorD obs_;
  LpfState lpf_{};
  std::size_t ep_index_ = 0;
  double ep_reward_ = 0.0;
  std::uint64_t ep_len_ = 0;
};

}  // namespace

TrainResult train_agent(const kernel::Model& kernel, const TrainConfig& cfg) {
  if (cfg.n_envs < 1) throw std::invalid_argument("train_agent: n_envs must be >= 1");
  if (cfg.ppo.rollout < cfg.n_envs) throw std::invalid_argument("train_agent: rollout smaller than n_envs");
  cfg.sim.validate();
  TrainResult res;
  res.kernel_hash_before = kernel::weight_hash(kernel);
  std::mt19937_64 rng(cfg.seed);
  res.policy = Policy(cfg.policy, rng);
  PpoOptimizer opt;

  std::vector<TrainEnv> envs;
  envs.reserve(static_cast<std::size_t>(cfg.n_envs));
  for (int e = 0; e < cfg.n_envs; ++e)
    envs.emplace_back(static_cast<std::size_t>(e), cfg, kernel, eval::derive_seed(cfg.seed, static_cast<std::uint64_t>(e) + 1));

  const std::size_t per_env = static_cast<std::size_t>(cfg.ppo.rollout) / static_cast<std::size_t>(cfg.n_envs);
  std::uint64_t timesteps = 0;
  CurvePoint prev{};
  while (timesteps < cfg.total_timesteps) {
    const std::size_t steps =
        std::min<std::uint64_t>(per_env, (cfg.total_timesteps - timesteps + static_cast<std::uint64_t>(cfg.n_envs) - 1) /
                                             static_cast<std::uint64_t>(cfg.n_envs));
    std::vector<Segment> segs(envs.size());
    eval::parallel_for(envs.size(), cfg.workers, [&](std::size_t e) { envs[e].collect(res.policy, steps, segs[e]); });

    const auto total = static_cast<Eigen::Index>(steps * envs.size());
    PpoBatch batch;
    batch.obs.resize(kObsDim, total);
    batch.actions.resize(kActDim, total);
    batch.old_log_prob.resize(total);
    batch.advantages.resize(total);
    batch.returns.resize(total);
    CurvePoint cp;
    double succ = 0.0, tgt = 0.0, rew = 0.0;
    for (std::size_t e = 0; e < segs.size(); ++e) {
      const Segment& s = segs[e];
      const GaeResult g = gae_advantages(s.rewards, s.values, s.dones, cfg.ppo.gamma, cfg.ppo.gae_lambda);
      const auto off = static_cast<Eigen::Index>(e * steps);
      const auto m = static_cast<Eigen::Index>(steps);
      batch.obs.middleCols(off, m) = s.obs;
      batch.actions.middleCols(off, m) = s.actions;
      for (Eigen::Index k = 0; k < m; ++k) {
        batch.old_log_prob[off + k] = s.log_prob[static_cast<std::size_t>(k)];
        batch.advantages[off + k] = g.advantages[static_cast<std::size_t>(k)];
        batch.returns[off + k] = g.returns[static_cast<std::size_t>(k)];
      }
      for (EpisodeLog log : s.episodes) {
        log.timesteps = timesteps + (log.timesteps + 1) * envs.size();
        rew += log.reward;
        succ += log.success ? 1.0 : 0.0;
        tgt += static_cast<double>(log.targets);
        res.episodes.push_back(log);
        ++cp.episodes;
      }
      res.env_faults += s.faults;
    }
    timesteps += static_cast<std::uint64_t>(total);
    cp.timesteps = timesteps;
    if (cp.episodes > 0) {
      const double k = static_cast<double>(cp.episodes);
      cp.reward = rew / k;
      cp.success_rate = succ / k;
      cp.target_count = tgt / k;
    } else {
      cp.reward = prev.reward;
      cp.success_rate = prev.success_rate;
      cp.target_count = prev.target_count;
    }
    cp.update = ppo_update(res.policy, opt, batch, cfg.ppo, timesteps, rng);
    res.curve.push_back(cp);
    prev = cp;
  }
  res.kernel_hash_after = kernel::weight_hash(kernel);
  if (res.kernel_hash_after != res.kernel_hash_before)
    throw std::logic_error("train_agent: kernel weights changed during training");
  return res;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, std::ostream& os) {
  os << "timesteps,reward,success_rate,target_count,episodes,policy_loss,value_loss,approx_kl,lr\n";
  for (const CurvePoint& c : curve) {
    fmt::print(os, "{},{},{},{},{},{},{},{},{}\n", c.timesteps, c.reward, c.success_rate, c.target_count, c.episodes,
               c.update.last.policy, c.update.last.value, c.update.last.approx_kl, c.update.lr);
  }
}

void write_episodes_csv(const std::vector<EpisodeLog>& eps, std::ostream& os) {
  os << "env,episode,timesteps,reward,length,targets,fell,success,fault,terrain\n";
  for (const EpisodeLog& e : eps) {
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{}\n", e.env, e.index, e.timesteps, e.reward, e.length, e.targets,
               int(e.fell), int(e.success), int(e.fault), e.terrain);
  }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

void write_sizes(io::ByteWriter& w, const std::vector<int>& s) {
  w.u32(static_cast<std::uint32_t>(s.size()));
  for (int v : s) w.u32(static_cast<std::uint32_t>(v));
}

std::vector<int> read_sizes(io::ByteReader& r) {
  const std::uint32_t n = r.u32();
  if (n > 64) throw io::FormatException(io::FormatError::kCorrupt, "policy: bad layer count");
  std::vector<int> s;
  for (std::uint32_t i = 0; i < n; ++i) s.push_back(static_cast<int>(r.u32()));
  return s;
}

void write_vec(io::ByteWriter& w, const VectorD& v) {
  w.u64(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v[i]);
}

VectorD read_vec(io::ByteReader& r) {
  const std::uint64_t n = r.u64();
  if (n * 8 > r.remaining()) throw io::FormatException(io::FormatError::kCorrupt, "policy: vector overruns payload");
  VectorD v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = r.f64();
  return v;
}

}  // namespace

void save_policy(const Policy& p, std::uint64_t kernel_hash, const std::string& path) {
  io::ByteWriter w;
  const PolicyConfig& c = p.config();
  w.u32(static_cast<std::uint32_t>(c.obs_dim));
  w.u32(static_cast<std::uint32_t>(c.act_dim));
  write_sizes(w, c.features);
  write_sizes(w, c.actor);
  write_sizes(w, c.critic);
  w.f64(c.action_scale);
  w.f64(c.log_std_init);
  w.u64(kernel_hash);
  write_vec(w, p.obs_scale());
  write_vec(w, p.log_std());
  write_vec(w, p.features().params());
  write_vec(w, p.actor().params());
  write_vec(w, p.critic().params());
  io::write_container(path, kPolicyMagic, kPolicyVersion, w.data());
}

Policy load_policy(const std::string& path, std::uint64_t* kernel_hash) {
  const std::vector<std::uint8_t> payload = io::read_container(path, kPolicyMagic, kPolicyVersion);
  io::ByteReader r(payload.data(), payload.size());
  PolicyConfig c;
  c.obs_dim = static_cast<int>(r.u32());
  c.act_dim = static_cast<int>(r.u32());
  c.features = read_sizes(r);
  c.actor = read_sizes(r);
  c.critic = read_sizes(r);
  c.action_scale = r.f64();
  c.log_std_init = r.f64();
  const std::uint64_t kh = r.u64();
  if (kernel_hash) *kernel_hash = kh;
  if (c.features.empty()) throw io::FormatException(io::FormatError::kCorrupt, "policy: empty feature extractor");
  std::mt19937_64 rng(0);
  Policy p(c, rng);
  try {
    p.obs_scale() = read_vec(r);
    p.log_std() = read_vec(r);
    VectorD f = read_vec(r), a = read_vec(r), cr = read_vec(r);
    p.features() = nn::Mlp<double>(p.features().sizes(), nn::Activation::kTanh, true, std::move(f));
    p.actor() = nn::Mlp<double>(p.actor().sizes(), nn::Activation::kTanh, false, std::move(a));
    p.critic() = nn::Mlp<double>(p.critic().sizes(), nn::Activation::kTanh, false, std::move(cr));
  } catch (const std::invalid_argument& e) {
    throw io::FormatException(io::FormatError::kCorrupt, std::string("policy: ") + e.what());
  }
  if (p.obs_scale().size() != c.obs_dim || p.log_std().size() != c.act_dim)
    throw io::FormatException(io::FormatError::kCorrupt, "policy: dimension mismatch");
  if (r.remaining() != 0) throw io::FormatException(io::FormatError::kCorrupt, "policy: trailing bytes");
  return p;
}

}  // namespace resloco::rl
