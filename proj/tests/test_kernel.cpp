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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <optional>
#include <set>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "resloco/binio.hpp"
#include "resloco/kernel.hpp"

namespace resloco::kernel {
namespace {

namespace fs = std::filesystem;

Dataset synthetic(int n, bool constant, std::uint64_t seed) {
  Dataset d;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  d.inputs.resize(7, n);
  d.labels.resize(12, n);
  d.joints = MatrixF::Zero(12, n);
  for (int i = 0; i < n; ++i) {
    d.episode.push_back(i % 10);
    d.time.push_back(0.005f * static_cast<float>(i));
    for (int k = 0; k < 7; ++k) d.inputs(k, i) = u(rng);
    for (int k = 0; k < 12; ++k) d.labels(k, i) = constant ? 0.1f * static_cast<float>(k - 6) : 0.1f * u(rng);
  }
  return d;
}

HParams small_hparams() {
  HParams hp;
  hp.hidden = {32, 32};
  return hp;
}

const Dataset& expert_data() {
  static const Dataset d = [] {
    CollectConfig c;
    c.n_targets = 3;
    c.seed = 5;
    return collect_dataset(c);
  }();
  return d;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("resloco_test_" + std::to_string(::getpid()) + "_" + name);
}

TEST(KernelInputs, PhaseTransformIsShared) {
  const gait::GaitParams p = gait::expert_trot();
  for (double t = 0.0; t < 1.0; t += 0.013) {
    const gait::GaitState s = gait::state_at(p, t);
    const MatrixF x = make_inputs(Variant::kBase, s, p, {0.3, -0.1, 0.2});
    const MatrixF xi = make_inputs(Variant::kInd, s, p, {0.3, -0.1, 0.2});
    ASSERT_EQ(xi.cols(), 4);
    for (int i = 0; i < 4; ++i) {
      const float want = static_cast<float>(gait::normalized_phase(s.phi[i], p.r_swing));
      EXPECT_EQ(x(i, 0), want);
      EXPECT_EQ(xi(0, i), want);
      EXPECT_EQ(xi(4 + i, i), 1.0f);
    }
  }
  EXPECT_EQ(make_inputs(Variant::kExt, {}, gait::trot(), {}).rows(), 9);
}

TEST(KernelData, ZeroTargetsRefuseToTrain) {
  CollectConfig c;
  c.n_targets = 0;
  const Dataset d = collect_dataset(c);
  EXPECT_EQ(d.size(), 0u);
  EXPECT_THROW(train_kernel(d, HParams{}, TrainOptions{}), std::invalid_argument);
}

TEST(KernelData, CollectAndCsvRoundTrip) {
  const Dataset& d = expert_data();
  EXPECT_EQ(d.num_episodes(), 3u);
  EXPECT_GT(d.size(), 500u);
  std::stringstream ss;
  write_dataset_csv(d, ss);
  const Dataset r = read_dataset_csv(ss);
  EXPECT_EQ(r.size(), d.size());
  EXPECT_EQ(r.episode, d.episode);
  EXPECT_LE((r.inputs - d.inputs).cwiseAbs().maxCoeff(), 1e-6f);
  EXPECT_LE((r.labels - d.labels).cwiseAbs().maxCoeff(), 1e-6f);
}

TEST(KernelData, SplitIsByEpisode) {
  const Dataset d = synthetic(1000, false, 1);
  Dataset tr, va;
  split_by_episode(d, 0.1, 3, tr, va);
  EXPECT_EQ(tr.size() + va.size(), d.size());
  EXPECT_EQ(va.num_episodes(), 1u);
  const std::set<int> a(tr.episode.begin(), tr.episode.end()), b(va.episode.begin(), va.episode.end());
  for (int e : b) EXPECT_EQ(a.count(e), 0u);
}

TEST(KernelTrain, LrSchedule) {
  EXPECT_DOUBLE_EQ(lr_factor(0, 50, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(lr_factor(49, 50, 0.7), 0.7);
  EXPECT_NEAR(lr_factor(49, 99, 0.7), 0.85, 1e-15);
}

TEST(KernelTrain, ConstantLabel) {
  // Mean L1 under SGD with a fixed step size oscillates around the optimum;
  // the step decays to zero here so the residual error can vanish.
  const Dataset d = synthetic(1000, true, 1);
  HParams hp;
  hp.lr = 0.01;
  hp.lr_final_fraction = 0.0;
  TrainOptions opt;
  opt.epochs = 1000;
  opt.seed = 1;
  const TrainResult r = train_kernel(d, hp, opt);
  EXPECT_LE(r.best_val, 1e-5);
}

TEST(KernelTrain, MemorizesSmallSet) {
  const Dataset d = synthetic(100, false, 2);
  HParams hp;
  hp.batch_size = 10;
  hp.lr_final_fraction = 0.0;
  TrainOptions opt;
  opt.epochs = 500;
  opt.seed = 1;
  opt.validation = &d;
  EXPECT_LE(train_kernel(d, hp, opt).best_val, 1e-3);
}

TEST(KernelTrain, ReturnsMinimumCheckpointDeterministically) {
  TrainOptions opt;
  opt.epochs = 6;
  opt.seed = 4;
  const TrainResult a = train_kernel(expert_data(), small_hparams(), opt);
  const TrainResult b = train_kernel(expert_data(), small_hparams(), opt);
  ASSERT_EQ(a.history.size(), 6u);
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    EXPECT_LE(a.best_val, a.history[e].val_l1);
    EXPECT_EQ(a.history[e].train_l1, b.history[e].train_l1);
    EXPECT_EQ(a.history[e].val_l1, b.history[e].val_l1);
  }
  EXPECT_EQ(a.best_val, a.history[static_cast<std::size_t>(a.best_epoch)].val_l1);
  EXPECT_EQ(weight_hash(a.model), weight_hash(b.model));
  Dataset tr, va;
  split_by_episode(expert_data(), small_hparams().val_fraction, opt.seed, tr, va);
  EXPECT_NEAR(evaluate_l1(a.model, va), a.best_val, 1e-9);
}

TEST(KernelTrain, ResumeContinuesSchedule) {
  TrainOptions full;
  full.epochs = 6;
  full.seed = 2;
  const TrainResult whole = train_kernel(expert_data(), small_hparams(), full);

  TrainOptions first = full;
  first.epochs = 3;
  first.budget = 6;
  const TrainResult head = train_kernel(expert_data(), small_hparams(), first);
  TrainOptions second = full;
  second.epochs = 3;
  second.resume = &head.model;
  const TrainResult tail = train_kernel(expert_data(), small_hparams(), second);
  ASSERT_EQ(tail.history.size(), 3u);
  for (std::size_t e = 0; e < 3; ++e) {
    EXPECT_EQ(head.history[e].lr, whole.history[e].lr);
    EXPECT_EQ(tail.history[e].epoch, static_cast<int>(e + 3));
    EXPECT_EQ(tail.history[e].lr, whole.history[e + 3].lr);
  }
  EXPECT_EQ(tail.model.epochs_done, 6u);
}

TEST(KernelModel, SaveLoadIsBitExact) {
  TrainOptions opt;
  opt.epochs = 2;
  const TrainResult r = train_kernel(expert_data(), small_hparams(), opt);
  const fs::path path = temp_file("model.bin");
  save_model(r.model, path.string());
  const Model m = load_model(path.string(), Variant::kBase);
  EXPECT_EQ(weight_hash(m), weight_hash(r.model));
  EXPECT_EQ(m.net.params(), r.model.net.params());
  EXPECT_EQ(m.epochs_done, r.model.epochs_done);
  EXPECT_EQ(m.best_val, r.model.best_val);
  const gait::GaitParams p = gait::expert_trot();
  for (double t = 0.0; t < 0.5; t += 0.05) {
    const FootTargets a = predict(r.model, gait::state_at(p, t), p, {0.2, 0.0, 0.1});
    const FootTargets b = predict(m, gait::state_at(p, t), p, {0.2, 0.0, 0.1});
    for (std::size_t i = 0; i < kNumLegs; ++i) EXPECT_EQ(a[i], b[i]);
  }
  fs::remove(path);
}

io::FormatError load_error(const fs::path& path, std::optional<Variant> v = std::nullopt) {
  try {
    if (v) {
      load_model(path.string(), *v);
    } else {
      load_model(path.string());
    }
  } catch (const io::FormatException& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return io::FormatError::kIo;
}

TEST(KernelModel, FormatErrors) {
  TrainOptions opt;
  opt.epochs = 1;
  const TrainResult r = train_kernel(expert_data(), small_hparams(), opt);
  const fs::path path = temp_file("bad.bin");
  save_model(r.model, path.string());
  EXPECT_EQ(load_error(path, Variant::kExt), io::FormatError::kVariantMismatch);

  std::string bytes;
  {
    std::ifstream is(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(is), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << b;
  };
  write(bytes.substr(0, bytes.size() / 2));
  EXPECT_EQ(load_error(path), io::FormatError::kChecksumMismatch);

  std::string b = bytes;
  b[0] = 'X';
  write(b);
  EXPECT_EQ(load_error(path), io::FormatError::kBadMagic);

  b = bytes;
  b[8] = static_cast<char>(b[8] + 1);
  write(b);
  EXPECT_EQ(load_error(path), io::FormatError::kVersionMismatch);

  b = bytes;
  b[40] = static_cast<char>(b[40] ^ 0x5a);
  write(b);
  EXPECT_EQ(load_error(path), io::FormatError::kChecksumMismatch);

  EXPECT_EQ(load_error(temp_file("missing.bin")), io::FormatError::kIo);
  fs::remove(path);
}

TEST(KernelModel, IndHandlesUnseenGait) {
  CollectConfig c;
  c.n_targets = 2;
  c.variant = Variant::kInd;
  const Dataset d = collect_dataset(c);
  TrainOptions opt;
  opt.epochs = 2;
  const TrainResult r = train_kernel(d, small_hparams(), opt);
  const gait::GaitParams walk = gait::walk();
  for (double t = 0.0; t < 1.0; t += 0.05) {
    const FootTargets f = predict(r.model, gait::state_at(walk, t), walk, {0.2, 0.0, 0.0});
    for (const Vec3& v : f) EXPECT_TRUE(v.allFinite());
  }
}

TEST(KernelModel, NonFiniteOutputThrows) {
  TrainOptions opt;
  opt.epochs = 1;
  TrainResult r = train_kernel(expert_data(), small_hparams(), opt);
  r.model.net.bias(r.model.net.num_layers() - 1)[0] = std::numeric_limits<float>::quiet_NaN();
  const gait::GaitParams p = gait::expert_trot();
  EXPECT_THROW(predict(r.model, gait::state_at(p, 0.1), p, {}), std::runtime_error);
}

}  // namespace
}  // namespace resloco::kernel
