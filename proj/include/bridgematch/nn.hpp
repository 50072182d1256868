// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Three-hidden-layer SiLU perceptron mapping [x, t] in R^3 to R^2, with a
// hand-written backward pass and an AdamW optimizer.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "bridgematch/numerics.hpp"

namespace bm {

inline constexpr std::size_t kMlpInputDim = 3;
inline constexpr std::size_t kMlpOutputDim = 2;
inline constexpr std::size_t kMlpLayers = 4;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
/// d/dx silu(x) = s(x) * (1 + x * (1 - s(x))).
inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

/// y = x * weight + bias with weight stored fan_in x fan_out.
struct Dense {
  Eigen::MatrixXd weight;
  Eigen::RowVectorXd bias;

  friend bool operator==(const Dense& a, const Dense& b) {
    return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() &&
           a.weight == b.weight && a.bias.size() == b.bias.size() && a.bias == b.bias;
  }
};

struct MlpParams {
  std::array<Dense, kMlpLayers> layers;

  /// Weights U[-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  static MlpParams init(std::size_t hidden, Rng& rng);
  static MlpParams zeros(std::size_t hidden);
  /// Zero tensors shaped like `like`.
  static MlpParams zeros_like(const MlpParams& like);

  [[nodiscard]] std::size_t hidden() const {
    return static_cast<std::size_t>(layers[0].weight.cols());
  }
  [[nodiscard]] std::size_t parameter_count() const;
  [[nodiscard]] bool all_finite() const;
  /// Throws std::invalid_argument unless shapes are 3 -> h -> h -> h -> 2.
  void validate() const;

  friend bool operator==(const MlpParams& a, const MlpParams& b) { return a.layers == b.layers; }
};

/// Gradients share the parameter layout.
using GradBundle = MlpParams;

/// Activations kept from a forward pass for the matching backward pass.
struct MlpTape {
  Eigen::MatrixXd input;                  // B x 3
  std::array<Eigen::MatrixXd, 3> pre;     // B x h, before SiLU
  std::array<Eigen::MatrixXd, 3> gate;    // sigmoid(pre), reused by the backward pass
  std::array<Eigen::MatrixXd, 3> post;    // B x h, after SiLU
  Eigen::MatrixXd output;                 // B x 2
  // Backward-pass buffers, kept so repeated passes reuse their storage.
  Eigen::MatrixXd delta;
  Eigen::MatrixXd back;
};

/// Packs x (B x 2) and t (B) into the B x 3 network input.
Eigen::MatrixXd mlp_input(const Batch& x, const TimeBatch& t);
Batch to_batch(const Eigen::MatrixXd& m);
Eigen::MatrixXd to_matrix(const Batch& b);

MlpTape mlp_forward_tape(const MlpParams& p, const Batch& x, const TimeBatch& t);
/// Overwrites `tape` in place; equal shapes reuse the existing buffers.
void mlp_forward_tape(const MlpParams& p, const Batch& x, const TimeBatch& t, MlpTape& tape);
Batch mlp_forward(const MlpParams& p, const Batch& x, const TimeBatch& t);
/// Same network evaluated with every row at time t.
Batch mlp_forward(const MlpParams& p, const Batch& x, double t);

/// Gradient of sum(out_grad .* forward(x, t)) with respect to every parameter.
GradBundle mlp_backward(const MlpParams& p, const MlpTape& tape, const Eigen::MatrixXd& out_grad);
/// In-place variant; `grad` must already have the parameter shapes.
void mlp_backward(const MlpParams& p, MlpTape& tape, const Eigen::MatrixXd& out_grad,
                  GradBundle& grad);
GradBundle mlp_backward(const MlpParams& p, const Batch& x, const TimeBatch& t,
                        const Batch& out_grad);

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  friend bool operator==(const AdamWConfig&, const AdamWConfig&) = default;
};

/// Adam with bias correction and decoupled weight decay. The decay
/// p <- p * (1 - lr * wd) is applied before the moment update.
class AdamW {
 public:
  AdamW(const MlpParams& like, AdamWConfig config);

  void step(MlpParams& params, const GradBundle& grad);

  [[nodiscard]] std::uint64_t steps() const { return steps_; }
  [[nodiscard]] const AdamWConfig& config() const { return config_; }
  [[nodiscard]] const MlpParams& first_moment() const { return m_; }
  [[nodiscard]] const MlpParams& second_moment() const { return v_; }

 private:
  AdamWConfig config_;
  MlpParams m_;
  MlpParams v_;
  std::uint64_t steps_ = 0;
};

}  // namespace bm
