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

#include "resloco/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "resloco/binio.hpp"
#include "resloco/episode.hpp"

namespace resloco::kernel {

Variant variant_from_string(std::string_view name) {
  if (name == "base") return Variant::kBase;
  if (name == "ind") return Variant::kInd;
  if (name == "ext") return Variant::kExt;
  throw std::invalid_argument(fmt::format("kernel: unknown variant '{}'", name));
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kBase: return "base";
    case Variant::kInd: return "ind";
    case Variant::kExt: return "ext";
  }
  return "unknown";
}

int input_dim(Variant v) {
  switch (v) {
    case Variant::kBase: return 7;
    case Variant::kInd: return 8;
    case Variant::kExt: return 9;
  }
  return 0;
}

int label_dim(Variant v) { return v == Variant::kInd ? 3 : 12; }

MatrixF make_inputs(Variant v, const gait::GaitState& gait, const gait::GaitParams& params,
                    const ref::VelocityCommand& cmd) {
  const auto phases = gait::normalized_phases(gait, params.r_swing);
  if (v == Variant::kInd) {
    MatrixF x = MatrixF::Zero(8, kNumLegs);
    for (std::size_t i = 0; i < kNumLegs; ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      x(0, c) = static_cast<float>(phases[i]);
      x(1, c) = static_cast<float>(cmd.vx);
      x(2, c) = static_cast<float>(cmd.vy);
      x(3, c) = static_cast<float>(cmd.wz);
      x(4 + c, c) = 1.0f;
    }
    return x;
  }
  MatrixF x(input_dim(v), 1);
  for (std::size_t i = 0; i < kNumLegs; ++i) x(static_cast<Eigen::Index>(i), 0) = static_cast<float>(phases[i]);
  x(4, 0) = static_cast<float>(cmd.vx);
  x(5, 0) = static_cast<float>(cmd.vy);
  x(6, 0) = static_cast<float>(cmd.wz);
  if (v == Variant::kExt) {
    x(7, 0) = static_cast<float>(cmd.step_height);
    x(8, 0) = static_cast<float>(cmd.ride_height);
  }
  return x;
}

MatrixF make_labels(Variant v, const FootTargets& targets) {
  if (v == Variant::kInd) {
    MatrixF y(3, kNumLegs);
    for (std::size_t i = 0; i < kNumLegs; ++i) y.col(static_cast<Eigen::Index>(i)) = targets[i].cast<float>();
    return y;
  }
  return flatten(targets).cast<float>();
}

FootTargets targets_from_outputs(Variant v, const MatrixF& out) {
  FootTargets t;
  if (v == Variant::kInd) {
    for (std::size_t i = 0; i < kNumLegs; ++i) t[i] = out.col(static_cast<Eigen::Index>(i)).cast<double>();
    return t;
  }
  return unflatten(out.col(0).cast<double>());
}

std::size_t Dataset::num_episodes() const { return std::set<std::int32_t>(episode.begin(), episode.end()).size(); }

void Dataset::append(const Dataset& other) {
  if (size() == 0) {
    *this = other;
    return;
  }
  if (other.variant != variant) throw std::invalid_argument("dataset: variant mismatch in append");
  const Eigen::Index n = static_cast<Eigen::Index>(size()), m = static_cast<Eigen::Index>(other.size());
  auto grow = [&](MatrixF& a, const MatrixF& b) {
    MatrixF c(a.rows(), n + m);
    c << a, b;
    a = std::move(c);
  };
  grow(inputs, other.inputs);
  grow(labels, other.labels);
  grow(joints, other.joints);
  episode.insert(episode.end(), other.episode.begin(), other.episode.end());
  time.insert(time.end(), other.time.begin(), other.time.end());
}

void write_dataset_csv(const Dataset& d, std::ostream& os) {
  std::string line = "episode_id,t";
  for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) line += fmt::format(",in{}", i);
  for (Eigen::Index i = 0; i < d.labels.rows(); ++i) line += fmt::format(",label{}", i);
  for (Eigen::Index i = 0; i < d.joints.rows(); ++i) line += fmt::format(",q{}", i);
  os << line << '\n';
  fmt::memory_buffer buf;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{},{}", d.episode[k], d.time[k]);
    for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) fmt::format_to(std::back_inserter(buf), ",{}", d.inputs(i, c));
    for (Eigen::Index i = 0; i < d.labels.rows(); ++i) fmt::format_to(std::back_inserter(buf), ",{}", d.labels(i, c));
    for (Eigen::Index i = 0; i < d.joints.rows(); ++i) fmt::format_to(std::back_inserter(buf), ",{}", d.joints(i, c));
    buf.push_back('\n');
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("dataset: empty file");
  int n_in = 0, n_label = 0, n_q = 0;
  {
    std::stringstream ss(line);
    std::string col;
    int idx = 0;
    while (std::getline(ss, col, ',')) {
      if (idx == 0 && col != "episode_id") throw std::runtime_error("dataset: bad header");
      if (col.rfind("in", 0) == 0) ++n_in;
      if (col.rfind("label", 0) == 0) ++n_label;
      if (col.rfind("q", 0) == 0) ++n_q;
      ++idx;
    }
  }
  Dataset d;
  if (n_in == 7) d.variant = Variant::kBase;
  else if (n_in == 8) d.variant = Variant::kInd;
  else if (n_in == 9) d.variant = Variant::kExt;
  else throw std::runtime_error(fmt::format("dataset: unexpected input width {}", n_in));
  if (n_label != label_dim(d.variant)) throw std::runtime_error("dataset: label width does not match variant");

  std::vector<float> in, lab, q;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    d.episode.push_back(static_cast<std::int32_t>(std::strtol(p, &end, 10)));
    auto next = [&]() {
      if (*end != ',') throw std::runtime_error("dataset: short row");
      p = end + 1;
      const float v = std::strtof(p, &end);
      if (end == p) throw std::runtime_error("dataset: bad number");
      return v;
    };
    d.time.push_back(next());
    for (int i = 0; i < n_in; ++i) in.push_back(next());
    for (int i = 0; i < n_label; ++i) lab.push_back(next());
    for (int i = 0; i < n_q; ++i) q.push_back(next());
  }
  const auto n = static_cast<Eigen::Index>(d.episode.size());
  d.inputs = Eigen::Map<MatrixF>(in.data(), n_in, n);
  d.labels = Eigen::Map<MatrixF>(lab.data(), n_label, n);
  d.joints = Eigen::Map<MatrixF>(q.data(), n_q, n);
  return d;
}

// ---------------------------------------------------------------------------

Dataset collect_dataset(const CollectConfig& cfg, CollectDiagnostics* diag) {
  CollectDiagnostics local;
  CollectDiagnostics& dg = diag ? *diag : local;
  dg = CollectDiagnostics{};
  const Variant v = cfg.variant;
  const int n_in = input_dim(v), n_lab = label_dim(v);
  const std::size_t max_discards = cfg.max_discards ? cfg.max_discards : 10 * cfg.n_targets + 10;

  std::vector<float> in, lab, q, times;
  std::vector<std::int32_t> episodes;
  std::vector<float> ep_in, ep_lab, ep_q, ep_t;

  const kin::RobotGeometry geometry = kin::default_geometry();
  std::mt19937_64 rng(cfg.seed);
  sim::TaskConfig tc;
  tc.gait = cfg.gait;
  tc.endless_targets = true;
  tc.timeout = 1e12;
  tc.target_distance_min = cfg.target_distance_min;
  tc.target_distance_max = cfg.target_distance_max;

  auto height_hook = [v](ref::VelocityCommand& cmd, std::mt19937_64& r) {
    if (v != Variant::kExt) return;
    cmd.step_height = ref::CommandLimits::kStepDefault;
    cmd.ride_height = ref::CommandLimits::kRideDefault;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(r) < 0.5) {
      cmd.step_height = ref::CommandLimits::kStepMin + u(r) * (ref::CommandLimits::kStepMax - ref::CommandLimits::kStepMin);
    } else {
      cmd.ride_height = ref::CommandLimits::kRideMin + u(r) * (ref::CommandLimits::kRideMax - ref::CommandLimits::kRideMin);
    }
  };

  Vec2 start = Vec2::Zero();
  std::size_t discards = 0;
  std::int32_t episode_id = 0;
  while (static_cast<std::size_t>(episode_id) < cfg.n_targets) {
    sim::World world(cfg.sim, geometry, sim::make_terrain(sim::TerrainKind::kFlat, {}, 0));
    world.reset(start, 0.0, ref::CommandLimits::kRideDefault);
    const Vec2 first = sim::sample_target(start, cfg.target_distance_min, cfg.target_distance_max, rng);
    sim::Task task(std::move(world), tc, {first}, rng());
    task.set_target_hook(height_hook);
    sim::ExpertController expert(geometry);
    task.start(expert);

    double episode_start = task.elapsed();
    bool restart = false;
    while (!restart && static_cast<std::size_t>(episode_id) < cfg.n_targets) {
      const sim::ControlInput ctl = task.control_input();
      const MatrixF x = make_inputs(v, ctl.gait, ctl.params, ctl.cmd);
      const FootTargets targets = expert.compute(ctl);
      const MatrixF y = make_labels(v, targets);
      const auto joints = task.world().joint_positions();
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        ep_in.insert(ep_in.end(), x.col(c).data(), x.col(c).data() + n_in);
        ep_lab.insert(ep_lab.end(), y.col(c).data(), y.col(c).data() + n_lab);
        for (const Vec3& jq : joints)
          for (int k = 0; k < 3; ++k) ep_q.push_back(static_cast<float>(jq[k]));
        ep_t.push_back(static_cast<float>(task.elapsed() - episode_start));
      }
      const sim::StepOutcome out = task.advance(targets);

      bool discard = false;
      if (out.fault) {
        ++dg.discarded_faults;
        discard = restart = true;
      } else if (out.events.fell) {
        ++dg.discarded_falls;
        discard = restart = true;
      } else if (out.events.target_reached) {
        in.insert(in.end(), ep_in.begin(), ep_in.end());
        lab.insert(lab.end(), ep_lab.begin(), ep_lab.end());
        q.insert(q.end(), ep_q.begin(), ep_q.end());
        times.insert(times.end(), ep_t.begin(), ep_t.end());
        episodes.insert(episodes.end(), ep_t.size(), episode_id);
        ++episode_id;
        ep_in.clear(), ep_lab.clear(), ep_q.clear(), ep_t.clear();
        episode_start = task.elapsed();
      } else if (task.elapsed() - episode_start > cfg.target_timeout) {
        ++dg.discarded_timeouts;
        discard = true;
        task.replace_active_target(sim::sample_target(task.world().base().position.head<2>(),
                                                      cfg.target_distance_min, cfg.target_distance_max, rng));
        episode_start = task.elapsed();
      }
      if (discard) {
        ep_in.clear(), ep_lab.clear(), ep_q.clear(), ep_t.clear();
        if (++discards > max_discards) throw std::runtime_error("collect: too many discarded episodes");
      }
    }
    dg.sim_time += task.elapsed();
    dg.expert_ik_clamps += expert.expert().ik_clamp_count();
    start = task.world().base().position.head<2>();
  }

  Dataset d;
  d.variant = v;
  d.episode = std::move(episodes);
  d.time = std::move(times);
  const auto n = static_cast<Eigen::Index>(d.episode.size());
  d.inputs = Eigen::Map<MatrixF>(in.data(), n_in, n);
  d.labels = Eigen::Map<MatrixF>(lab.data(), n_lab, n);
  d.joints = Eigen::Map<MatrixF>(q.data(), 12, n);
  dg.episodes = static_cast<std::size_t>(episode_id);
  return d;
}

// ---------------------------------------------------------------------------

void split_by_episode(const Dataset& d, double val_fraction, std::uint64_t seed, Dataset& train, Dataset& val) {
  std::vector<std::int32_t> ids(d.episode.begin(), d.episode.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) throw std::invalid_argument("kernel: need at least two episodes to split");
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(std::ceil(val_fraction * static_cast<double>(ids.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, ids.size() - 1);
  const std::set<std::int32_t> val_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
  train = d.filter([&](std::int32_t e) { return !val_ids.count(e); });
  val = d.filter([&](std::int32_t e) { return val_ids.count(e) > 0; });
}

double lr_factor(int epoch, int budget, double final_fraction) {
  if (budget <= 1) return 1.0;
  const double t = std::min(1.0, static_cast<double>(epoch) / static_cast<double>(budget - 1));
  return 1.0 - (1.0 - final_fraction) * t;
}

namespace {

MatrixF normalize(const Model& m, const MatrixF& x) {
  return ((x.colwise() - m.in_mean).array().colwise() / m.in_std.array()).matrix();
}

double l1_on_normalized(const Model& m, const MatrixF& xn, const MatrixF& y) {
  constexpr Eigen::Index kChunk = 4096;
  double sum = 0.0;
  for (Eigen::Index s = 0; s < xn.cols(); s += kChunk) {
    const Eigen::Index n = std::min(kChunk, xn.cols() - s);
    const MatrixF out = m.net.forward(xn.middleCols(s, n));
    sum += static_cast<double>((out - y.middleCols(s, n)).cwiseAbs().template cast<double>().sum());
  }
  return sum / static_cast<double>(xn.cols() * y.rows());
}

}  // namespace

MatrixF forward(const Model& m, const MatrixF& inputs) { return m.net.forward(normalize(m, inputs)); }

double evaluate_l1(const Model& m, const Dataset& d) {
  if (d.size() == 0) throw std::invalid_argument("kernel: empty evaluation set");
  return l1_on_normalized(m, normalize(m, d.inputs), d.labels);
}

TrainResult train_kernel(const Dataset& data, const HParams& hp, const TrainOptions& opt) {
  Dataset train, val;
  if (opt.validation) {
    train = data;
    val = *opt.validation;
  } else {
    split_by_episode(data, hp.val_fraction, opt.seed, train, val);
  }
  if (train.size() == 0 || val.size() == 0) throw std::invalid_argument("kernel: empty train or validation split");
  if (train.variant != val.variant) throw std::invalid_argument("kernel: split variants differ");
  if (hp.batch_size <= 0 || opt.epochs <= 0) throw std::invalid_argument("kernel: batch size and epochs must be positive");

  std::mt19937_64 rng(opt.seed);
  Model model;
  int start_epoch = 0, budget = opt.budget > 0 ? opt.budget : opt.epochs;
  if (opt.resume) {
    model = *opt.resume;
    if (model.variant != train.variant) throw std::invalid_argument("kernel: resume variant differs from data");
    start_epoch = static_cast<int>(model.epochs_done);
    budget = static_cast<int>(std::max(model.epoch_budget, 1u));
  } else {
    model.variant = train.variant;
    model.hparams = hp;
    model.seed = opt.seed;
    model.in_mean = train.inputs.rowwise().mean();
    const MatrixF centered = train.inputs.colwise() - model.in_mean;
    model.in_std = (centered.array().square().rowwise().sum() / static_cast<float>(train.size())).sqrt().matrix();
    for (Eigen::Index i = 0; i < model.in_std.size(); ++i)
      if (!(model.in_std[i] > 1e-6f)) model.in_std[i] = 1.0f;
    std::vector<int> sizes{input_dim(train.variant)};
    sizes.insert(sizes.end(), hp.hidden.begin(), hp.hidden.end());
    sizes.push_back(label_dim(train.variant));
    model.net = nn::Mlp<float>(sizes, nn::Activation::kReLU, false, rng, std::sqrt(2.0), 0.0);
    model.net.bias(model.net.num_layers() - 1) = train.labels.rowwise().mean();
  }

  const MatrixF xtr = normalize(model, train.inputs);
  const MatrixF xval = normalize(model, val.inputs);
  const Eigen::Index n = xtr.cols();
  const Eigen::Index out_dim = train.labels.rows();

  nn::SgdMomentum<float> opt_sgd;
  opt_sgd.momentum = hp.momentum;
  opt_sgd.weight_decay = hp.weight_decay;

  TrainResult result;
  result.best_val = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  nn::Mlp<float>::Cache cache;
  nn::Mlp<float>::Vector grad;

  for (int e = 0; e < opt.epochs; ++e) {
    const int global_epoch = start_epoch + e;
    const double lr = hp.lr * lr_factor(global_epoch, budget, hp.lr_final_fraction);
    std::shuffle(perm.begin(), perm.end(), rng);
    double train_sum = 0.0;
    for (Eigen::Index s = 0; s < n; s += hp.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(hp.batch_size, n - s);
      MatrixF xb(xtr.rows(), b), yb(out_dim, b);
      for (Eigen::Index k = 0; k < b; ++k) {
        xb.col(k) = xtr.col(perm[static_cast<std::size_t>(s + k)]);
        yb.col(k) = train.labels.col(perm[static_cast<std::size_t>(s + k)]);
      }
      const MatrixF out = model.net.forward(xb, cache, hp.dropout, &rng);
      const MatrixF diff = out - yb;
      train_sum += static_cast<double>(diff.cwiseAbs().template cast<double>().sum());
      const MatrixF d_out = diff.array().sign().matrix() / static_cast<float>(b * out_dim);
      grad.setZero(model.net.params().size());
      model.net.backward(cache, d_out, grad);
      opt_sgd.step(model.net.params(), grad, lr);
    }
    const double train_l1 = train_sum / static_cast<double>(n * out_dim);
    const double val_l1 = l1_on_normalized(model, xval, val.labels);
    if (!std::isfinite(train_l1) || !std::isfinite(val_l1) || !model.net.params().allFinite()) {
      throw std::runtime_error(fmt::format("kernel: training diverged at epoch {}", global_epoch));
    }
    result.history.push_back({global_epoch, train_l1, val_l1, lr});
    if (val_l1 < result.best_val) {
      result.best_val = val_l1;
      result.best_epoch = global_epoch;
      result.model = model;
    }
  }
  result.model.epochs_done = static_cast<std::uint32_t>(start_epoch + opt.epochs);
  result.model.epoch_budget = static_cast<std::uint32_t>(budget);
  result.model.best_val = result.best_val;
  return result;
}

FootTargets predict(const Model& m, const gait::GaitState& gait, const gait::GaitParams& params,
                    const ref::VelocityCommand& cmd) {
  const MatrixF out = forward(m, make_inputs(m.variant, gait, params, cmd));
  if (!out.allFinite()) throw std::runtime_error("kernel: non-finite output (corrupt model?)");
  return targets_from_outputs(m.variant, out);
}

void write_history_csv(const std::vector<EpochRecord>& h, std::ostream& os) {
  os << "epoch,train_l1,val_l1,lr\n";
  for (const auto& r : h) fmt::print(os, "{},{},{},{}\n", r.epoch, r.train_l1, r.val_l1, r.lr);
}

// ---------------------------------------------------------------------------

void save_model(const Model& m, const std::string& path) {
  io::ByteWriter w;
  w.u8(static_cast<std::uint8_t>(m.variant));
  w.u8(static_cast<std::uint8_t>(m.net.activation()));
  w.u8(m.net.activate_output() ? 1 : 0);
  w.u8(0);
  const auto& sizes = m.net.sizes();
  w.u32(static_cast<std::uint32_t>(sizes.size()));
  for (int s : sizes) w.u32(static_cast<std::uint32_t>(s));
  w.u32(m.epochs_done);
  w.u32(m.epoch_budget);
  w.f64(m.best_val);
  w.u64(m.seed);
  const HParams& hp = m.hparams;
  w.f64(hp.lr);
  w.f64(hp.lr_final_fraction);
  w.f64(hp.dropout);
  w.f64(hp.weight_decay);
  w.f64(hp.momentum);
  w.u32(static_cast<std::uint32_t>(hp.batch_size));
  w.f64(hp.val_fraction);
  w.f32s(m.in_mean.data(), static_cast<std::size_t>(m.in_mean.size()));
  w.f32s(m.in_std.data(), static_cast<std::size_t>(m.in_std.size()));
  w.u64(static_cast<std::uint64_t>(m.net.params().size()));
  w.f32s(m.net.params().data(), static_cast<std::size_t>(m.net.params().size()));
  io::write_container(path, kModelMagic, kModelVersion, w.data());
}

Model load_model(const std::string& path) {
  const std::vector<std::uint8_t> payload = io::read_container(path, kModelMagic, kModelVersion);
  io::ByteReader r(payload.data(), payload.size());
  Model m;
  const std::uint8_t variant = r.u8();
  if (variant > 2) throw io::FormatException(io::FormatError::kCorrupt, "kernel: unknown variant tag");
  m.variant = static_cast<Variant>(variant);
  const auto act = static_cast<nn::Activation>(r.u8());
  const bool act_out = r.u8() != 0;
  r.u8();
  const std::uint32_t n_sizes = r.u32();
  if (n_sizes < 2 || n_sizes > 64) throw io::FormatException(io::FormatError::kCorrupt, "kernel: bad layer count");
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < n_sizes; ++i) sizes.push_back(static_cast<int>(r.u32()));
  if (sizes.front() != input_dim(m.variant) || sizes.back() != label_dim(m.variant))
    throw io::FormatException(io::FormatError::kCorrupt, "kernel: layer sizes do not match variant");
  m.epochs_done = r.u32();
  m.epoch_budget = r.u32();
  m.best_val = r.f64();
  m.seed = r.u64();
  HParams& hp = m.hparams;
  hp.lr = r.f64();
  hp.lr_final_fraction = r.f64();
  hp.dropout = r.f64();
  hp.weight_decay = r.f64();
  hp.momentum = r.f64();
  hp.batch_size = static_cast<int>(r.u32());
  hp.val_fraction = r.f64();
  hp.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
  m.in_mean.resize(sizes.front());
  m.in_std.resize(sizes.front());
  r.f32s(m.in_mean.data(), static_cast<std::size_t>(sizes.front()));
  r.f32s(m.in_std.data(), static_cast<std::size_t>(sizes.front()));
  const std::uint64_t n_params = r.u64();
  if (static_cast<Eigen::Index>(n_params) != nn::Mlp<float>::count_params(sizes))
    throw io::FormatException(io::FormatError::kCorrupt, "kernel: parameter count mismatch");
  nn::Mlp<float>::Vector params(static_cast<Eigen::Index>(n_params));
  r.f32s(params.data(), n_params);
  if (r.remaining() != 0) throw io::FormatException(io::FormatError::kCorrupt, "kernel: trailing bytes");
  m.net = nn::Mlp<float>(sizes, act, act_out, std::move(params));
  return m;
}

Model load_model(const std::string& path, Variant expected) {
  Model m = load_model(path);
  if (m.variant != expected) {
    throw io::FormatException(io::FormatError::kVariantMismatch,
                              fmt::format("{}: kernel-{} requested, file holds kernel-{}", path, to_string(expected),
                                          to_string(m.variant)));
  }
  return m;
}

std::uint64_t weight_hash(const Model& m) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const float* p, Eigen::Index n) {
    const auto* b = reinterpret_cast<const std::uint8_t*>(p);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * sizeof(float); ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  mix(m.net.params().data(), m.net.params().size());
  mix(m.in_mean.data(), m.in_mean.size());
  mix(m.in_std.data(), m.in_std.size());
  return h;
}

// ---------------------------------------------------------------------------

std::vector<StudyRow> data_dependence_study(const StudyConfig& cfg) {
  if (cfg.targets.empty() || cfg.seeds.empty()) throw std::invalid_argument("study: empty target or seed list");
  const std::size_t pool_size = *std::max_element(cfg.targets.begin(), cfg.targets.end());
  std::vector<StudyRow> rows(cfg.targets.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].n_targets = cfg.targets[i];

  for (std::uint64_t seed : cfg.seeds) {
    CollectConfig c = cfg.collect;
    c.seed = seed;
    c.n_targets = pool_size;
    const Dataset pool = collect_dataset(c);
    c.seed = seed + 1000003;
    c.n_targets = cfg.validation_targets;
    const Dataset val = collect_dataset(c);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto n = static_cast<std::int32_t>(cfg.targets[i]);
      const Dataset train = pool.filter([n](std::int32_t e) { return e < n; });
      const std::size_t batches =
          (train.size() + static_cast<std::size_t>(cfg.hparams.batch_size) - 1) / static_cast<std::size_t>(cfg.hparams.batch_size);
      TrainOptions opt;
      opt.seed = seed;
      opt.validation = &val;
      opt.epochs = static_cast<int>(std::max<std::size_t>(1, (cfg.updates + batches - 1) / batches));
      rows[i].per_seed.push_back(train_kernel(train, cfg.hparams, opt).best_val);
    }
  }
  for (StudyRow& r : rows) {
    const double k = static_cast<double>(r.per_seed.size());
    r.mean = std::accumulate(r.per_seed.begin(), r.per_seed.end(), 0.0) / k;
    double ss = 0.0;
    for (double x : r.per_seed) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / k);
  }
  return rows;
}

void write_study_csv(const std::vector<StudyRow>& rows, std::ostream& os) {
  os << "n_targets,mean_val_l1,std_val_l1,runs\n";
  for (const auto& r : rows) fmt::print(os, "{},{},{},{}\n", r.n_targets, r.mean, r.std, r.per_seed.size());
}

}  // namespace resloco::kernel
