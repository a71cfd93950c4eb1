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

// The kernel: an MLP distilled from the expert that maps gait phases and
// commands to base-frame foot targets.
//
//   base  inputs |phi_1..4|, vx, vy, wz                       -> 12 targets
//   ind   inputs |phi_i|, vx, vy, wz, one-hot(leg)            -> 3 (one leg)
//   ext   inputs base + step_height, ride_height              -> 12 targets

#ifndef RESLOCO_KERNEL_HPP_
#define RESLOCO_KERNEL_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "resloco/gait.hpp"
#include "resloco/kinematics.hpp"
#include "resloco/mlp.hpp"
#include "resloco/reference.hpp"
#include "resloco/sim.hpp"

namespace resloco::kernel {

enum class Variant : std::uint8_t { kBase = 0, kInd = 1, kExt = 2 };

Variant variant_from_string(std::string_view name);
std::string to_string(Variant v);
int input_dim(Variant v);
int label_dim(Variant v);

using MatrixF = Eigen::MatrixXf;
using VectorF = Eigen::VectorXf;

/// Network inputs for one control tick, one column per sample (four for
/// kernel-ind, one otherwise). Used for both data collection and prediction.
MatrixF make_inputs(Variant v, const gait::GaitState& gait, const gait::GaitParams& params,
                    const ref::VelocityCommand& cmd);
/// Labels matching make_inputs' columns.
MatrixF make_labels(Variant v, const FootTargets& targets);
/// Inverse of make_labels on network outputs.
FootTargets targets_from_outputs(Variant v, const MatrixF& out);

/// Samples stored row-wise; `episode` groups samples by target.
struct Dataset {
  Variant variant = Variant::kBase;
  std::vector<std::int32_t> episode;
  std::vector<float> time;
  MatrixF inputs;  // input_dim x n
  MatrixF labels;  // label_dim x n
  MatrixF joints;  // 12 x n, measured joint angles (stored, not a network input)

  std::size_t size() const { return episode.size(); }
  std::size_t num_episodes() const;
  /// Appends the columns of `other` (same variant).
  void append(const Dataset& other);
  /// Samples whose episode id satisfies `keep`.
  template <typename Pred>
  Dataset filter(Pred keep) const;
};

/// CSV with header episode_id,t,in0..,label0..,q0..q11.
void write_dataset_csv(const Dataset& d, std::ostream& os);
Dataset read_dataset_csv(std::istream& is);

struct CollectConfig {
  std::size_t n_targets = 10;
  Variant variant = Variant::kBase;
  std::uint64_t seed = 0;
  sim::SimConfig sim{};
  gait::GaitParams gait = gait::expert_trot();
  double target_distance_min = 2.5;
  double target_distance_max = 3.5;
  double target_timeout = 60.0;  // per target; the episode is discarded past it
  std::size_t max_discards = 0;  // 0 = 10 * n_targets + 10
};

struct CollectDiagnostics {
  std::size_t episodes = 0;
  std::size_t discarded_falls = 0;
  std::size_t discarded_timeouts = 0;
  std::size_t discarded_faults = 0;
  std::uint64_t expert_ik_clamps = 0;
  double sim_time = 0.0;
};

/// Drives the expert through `n_targets` consecutive targets on flat ground,
/// one episode per target. Inputs are taken before each control step and
/// labels are the expert's targets for that step. For kernel-ext, each episode
/// randomizes either the step height or the ride height.
Dataset collect_dataset(const CollectConfig& cfg, CollectDiagnostics* diag = nullptr);

struct HParams {
  double lr = 0.0024;
  double lr_final_fraction = 0.7;  // linear decay to this fraction over the epoch budget
  double dropout = 5e-6;
  double weight_decay = 0.0;
  double momentum = 0.9;
  int batch_size = 200;
  std::vector<int> hidden{256, 256, 256, 256};
  double val_fraction = 0.1;
};

struct Model {
  Variant variant = Variant::kBase;
  nn::Mlp<float> net;
  VectorF in_mean;
  VectorF in_std;
  // training metadata
  std::uint32_t epochs_done = 0;
  std::uint32_t epoch_budget = 0;
  double best_val = 0.0;
  std::uint64_t seed = 0;
  HParams hparams{};
};

struct EpochRecord {
  int epoch = 0;
  double train_l1 = 0.0;
  double val_l1 = 0.0;
  double lr = 0.0;
};

struct TrainOptions {
  int epochs = 50;
  /// Epochs the LR schedule spans; 0 means `epochs`.
  int budget = 0;
  std::uint64_t seed = 0;
  /// Continue from this model; the LR schedule resumes at its epoch.
  const Model* resume = nullptr;
  /// If set, the whole dataset trains and this set validates.
  const Dataset* validation = nullptr;
};

struct TrainResult {
  Model model;  // minimum-validation checkpoint
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val = 0.0;
};

/// 90/10 (hp.val_fraction) split by episode with a seeded shuffle.
void split_by_episode(const Dataset& d, double val_fraction, std::uint64_t seed, Dataset& train, Dataset& val);

/// Mini-batch SGD with momentum on mean L1. Throws std::invalid_argument on
/// empty splits and std::runtime_error on a non-finite loss.
TrainResult train_kernel(const Dataset& data, const HParams& hp, const TrainOptions& opt);

/// lr multiplier at `epoch` of `budget`: 1 at the start, lr_final_fraction
/// at the last epoch.
double lr_factor(int epoch, int budget, double final_fraction);

/// Mean L1 over all outputs.
double evaluate_l1(const Model& m, const Dataset& d);

/// Raw network outputs for input columns.
MatrixF forward(const Model& m, const MatrixF& inputs);

/// Foot targets for one tick. Throws std::runtime_error on non-finite output.
FootTargets predict(const Model& m, const gait::GaitState& gait, const gait::GaitParams& params,
                    const ref::VelocityCommand& cmd);

void write_history_csv(const std::vector<EpochRecord>& h, std::ostream& os);

inline constexpr std::string_view kModelMagic = "RLKERNEL";
inline constexpr std::uint32_t kModelVersion = 1;

void save_model(const Model& m, const std::string& path);
/// Throws io::FormatException. With `expected` set, a different stored
/// variant is a variant mismatch.
Model load_model(const std::string& path);
Model load_model(const std::string& path, Variant expected);

/// FNV-1a over the parameter bytes and normalization stats.
std::uint64_t weight_hash(const Model& m);

class KernelController : public sim::Controller {
 public:
  explicit KernelController(const Model& model) : model_(&model) {}
  void reset(const sim::World&, const gait::GaitParams&, const ref::VelocityCommand&) override {}
  FootTargets compute(const sim::ControlInput& in) override {
    return predict(*model_, in.gait, in.params, in.cmd);
  }

 private:
  const Model* model_;
};

struct StudyConfig {
  std::vector<std::size_t> targets{10, 50, 200};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  HParams hparams{};
  /// Optimizer updates per run, equal across dataset sizes.
  std::size_t updates = 5000;
  /// Targets in the held-out validation pool shared by every size.
  std::size_t validation_targets = 20;
  CollectConfig collect{};
};

struct StudyRow {
  std::size_t n_targets = 0;
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> per_seed;
};

/// Per seed: one pool of max(targets) episodes plus a held-out pool; each
/// size trains on the first n episodes of the pool.
std::vector<StudyRow> data_dependence_study(const StudyConfig& cfg);

void write_study_csv(const std::vector<StudyRow>& rows, std::ostream& os);

template <typename Pred>
Dataset Dataset::filter(Pred keep) const {
  Dataset out;
  out.variant = variant;
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < size(); ++i)
    if (keep(episode[i])) idx.push_back(static_cast<Eigen::Index>(i));
  out.inputs.resize(inputs.rows(), static_cast<Eigen::Index>(idx.size()));
  out.labels.resize(labels.rows(), static_cast<Eigen::Index>(idx.size()));
  out.joints.resize(joints.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto i = idx[k];
    out.episode.push_back(episode[i]);
    out.time.push_back(time[i]);
    out.inputs.col(k) = inputs.col(i);
    out.labels.col(k) = labels.col(i);
    if (joints.cols() > 0) out.joints.col(k) = joints.col(i);
  }
  return out;
}

}  // namespace resloco::kernel

#endif  // RESLOCO_KERNEL_HPP_
