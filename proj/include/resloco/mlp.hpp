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

// Dense feed-forward network with hand-written backprop.
//
// All parameters live in one contiguous vector (per layer: weights in
// column-major order, then biases), so optimizers, finite-difference checks
// and serialization work on flat vectors. Batches are column-major: one
// sample per column.

#ifndef RESLOCO_MLP_HPP_
#define RESLOCO_MLP_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace resloco::nn {

enum class Activation : std::uint8_t { kReLU = 0, kTanh = 1 };

template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  struct Cache {
    std::vector<Matrix> inputs;  // input to each layer
    std::vector<Matrix> pre;     // pre-activation of each layer
    std::vector<Matrix> masks;   // dropout masks (hidden layers), may be empty
  };

  Mlp() = default;

  /// `sizes` = {in, hidden..., out}. Weights ~ N(0, gain^2 / fan_in); the
  /// output layer uses `out_gain`. Biases start at zero.
  Mlp(std::vector<int> sizes, Activation act, bool activate_output, std::mt19937_64& rng,
      double hidden_gain, double out_gain)
      : sizes_(std::move(sizes)), act_(act), activate_output_(activate_output) {
    if (sizes_.size() < 2) throw std::invalid_argument("mlp: need at least input and output sizes");
    params_ = Vector::Zero(count_params(sizes_));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int l = 0; l < num_layers(); ++l) {
      const double gain = (l + 1 == num_layers()) ? out_gain : hidden_gain;
      const double std = gain / std::sqrt(static_cast<double>(sizes_[l]));
      auto w = weights(l);
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(std * normal(rng));
    }
  }

  /// Rebuilds from a flat parameter vector (deserialization).
  Mlp(std::vector<int> sizes, Activation act, bool activate_output, Vector params)
      : sizes_(std::move(sizes)), act_(act), activate_output_(activate_output), params_(std::move(params)) {
    if (params_.size() != count_params(sizes_)) throw std::invalid_argument("mlp: parameter count mismatch");
  }

  static Eigen::Index count_params(const std::vector<int>& sizes) {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += static_cast<Eigen::Index>(sizes[l + 1]) * (sizes[l] + 1);
    return n;
  }

  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return act_; }
  bool activate_output() const { return activate_output_; }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  MatrixMap weights(int l) { return MatrixMap(params_.data() + offset(l), sizes_[l + 1], sizes_[l]); }
  ConstMatrixMap weights(int l) const {
    return ConstMatrixMap(params_.data() + offset(l), sizes_[l + 1], sizes_[l]);
  }
  VectorMap bias(int l) { return VectorMap(params_.data() + offset(l) + sizes_[l + 1] * sizes_[l], sizes_[l + 1]); }
  ConstVectorMap bias(int l) const {
    return ConstVectorMap(params_.data() + offset(l) + sizes_[l + 1] * sizes_[l], sizes_[l + 1]);
  }

  /// Inference pass; no dropout.
  Matrix forward(const Matrix& x) const {
    Matrix a = x;
    for (int l = 0; l < num_layers(); ++l) {
      Matrix z = weights(l) * a;
      z.colwise() += bias(l);
      if (activated(l)) apply_activation(z);
      a = std::move(z);
    }
    return a;
  }

  /// Training pass that records what `backward` needs. With `dropout > 0`
  /// and an rng, hidden activations are dropped (inverted scaling).
  Matrix forward(const Matrix& x, Cache& cache, double dropout = 0.0, std::mt19937_64* rng = nullptr) const {
    const int n = num_layers();
    cache.inputs.resize(n);
    cache.pre.resize(n);
    cache.masks.clear();
    const bool use_dropout = dropout > 0.0 && rng != nullptr;
    if (use_dropout) cache.masks.resize(n);
    Matrix a = x;
    for (int l = 0; l < n; ++l) {
      cache.inputs[l] = a;
      Matrix z = weights(l) * a;
      z.colwise() += bias(l);
      cache.pre[l] = z;
      if (activated(l)) apply_activation(z);
      if (use_dropout && l + 1 < n) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Matrix mask(z.rows(), z.cols());
        const Scalar keep = static_cast<Scalar>(1.0 / (1.0 - dropout));
        for (Eigen::Index k = 0; k < mask.size(); ++k) mask.data()[k] = u(*rng) < dropout ? Scalar(0) : keep;
        z.array() *= mask.array();
        cache.masks[l] = std::move(mask);
      }
      a = std::move(z);
    }
    return a;
  }

  /// Accumulates dL/dparams into `grad` (same layout as params()). Returns
  /// dL/dinput when `want_input_grad` is set, an empty matrix otherwise.
  Matrix backward(const Cache& cache, const Matrix& d_out, Vector& grad, bool want_input_grad = false) const {
    if (grad.size() != params_.size()) grad = Vector::Zero(params_.size());
    Matrix d = d_out;
    for (int l = num_layers() - 1; l >= 0; --l) {
      if (!cache.masks.empty() && l + 1 < num_layers() && cache.masks[l].size() > 0) d.array() *= cache.masks[l].array();
      if (activated(l)) apply_activation_grad(cache.pre[l], d);
      MatrixMap gw(grad.data() + offset(l), sizes_[l + 1], sizes_[l]);
      VectorMap gb(grad.data() + offset(l) + sizes_[l + 1] * sizes_[l], sizes_[l + 1]);
      gw.noalias() += d * cache.inputs[l].transpose();
      gb += d.rowwise().sum();
      if (l > 0 || want_input_grad) d = weights(l).transpose() * d;
    }
    return want_input_grad ? d : Matrix();
  }

 private:
  Eigen::Index offset(int l) const {
    Eigen::Index o = 0;
    for (int k = 0; k < l; ++k) o += static_cast<Eigen::Index>(sizes_[k + 1]) * (sizes_[k] + 1);
    return o;
  }

  bool activated(int l) const { return l + 1 < num_layers() || activate_output_; }

  void apply_activation(Matrix& z) const {
    if (act_ == Activation::kReLU) {
      z = z.cwiseMax(Scalar(0));
    } else {
      z = z.array().tanh().matrix();
    }
  }

  // d <- d * act'(pre)
  void apply_activation_grad(const Matrix& pre, Matrix& d) const {
    if (act_ == Activation::kReLU) {
      d = (pre.array() > Scalar(0)).select(d, Scalar(0));
    } else {
      d.array() *= Scalar(1) - pre.array().tanh().square();
    }
  }

  std::vector<int> sizes_;
  Activation act_ = Activation::kReLU;
  bool activate_output_ = false;
  Vector params_;
};

/// SGD with classical momentum on a flat parameter vector.
template <typename Scalar>
struct SgdMomentum {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  double momentum = 0.9;
  double weight_decay = 0.0;
  Vector velocity;

  void step(Vector& params, const Vector& grad, double lr) {
    if (velocity.size() != params.size()) velocity = Vector::Zero(params.size());
    if (weight_decay > 0.0) {
      velocity = static_cast<Scalar>(momentum) * velocity + grad + static_cast<Scalar>(weight_decay) * params;
    } else {
      velocity = static_cast<Scalar>(momentum) * velocity + grad;
    }
    params -= static_cast<Scalar>(lr) * velocity;
  }
};

/// Adam on a flat parameter vector.
template <typename Scalar>
struct Adam {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Vector m, v;
  std::int64_t t = 0;

  void step(Vector& params, const Vector& grad, double lr) {
    if (m.size() != params.size()) {
      m = Vector::Zero(params.size());
      v = Vector::Zero(params.size());
    }
    ++t;
    m = static_cast<Scalar>(beta1) * m + static_cast<Scalar>(1.0 - beta1) * grad;
    v = static_cast<Scalar>(beta2) * v + static_cast<Scalar>(1.0 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    const Scalar step = static_cast<Scalar>(lr / c1);
    params.array() -= step * m.array() / ((v.array() / static_cast<Scalar>(c2)).sqrt() + static_cast<Scalar>(eps));
  }
};

}  // namespace resloco::nn

#endif  // RESLOCO_MLP_HPP_
