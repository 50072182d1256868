// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/nn.hpp"

#include <stdexcept>
#include <string>

namespace bm {

namespace {

std::array<std::size_t, kMlpLayers + 1> layer_dims(std::size_t hidden) {
  return {kMlpInputDim, hidden, hidden, hidden, kMlpOutputDim};
}


template <typename Fn>
void for_each_tensor(MlpParams& a, const MlpParams& b, Fn&& fn) {
  for (std::size_t l = 0; l < kMlpLayers; ++l) {
    fn(a.layers[l].weight.array(), b.layers[l].weight.array());
    fn(a.layers[l].bias.array(), b.layers[l].bias.array());
  }
}

}  // namespace

MlpParams MlpParams::zeros(std::size_t hidden) {
  if (hidden == 0) throw std::invalid_argument("MlpParams: hidden width must be positive");
  const auto dims = layer_dims(hidden);
  MlpParams p;
  for (std::size_t l = 0; l < kMlpLayers; ++l) {
    p.layers[l].weight = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dims[l]),
                                               static_cast<Eigen::Index>(dims[l + 1]));
    p.layers[l].bias = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(dims[l + 1]));
  }
  return p;
}

MlpParams MlpParams::zeros_like(const MlpParams& like) {
  MlpParams p;
  for (std::size_t l = 0; l < kMlpLayers; ++l) {
    p.layers[l].weight = Eigen::MatrixXd::Zero(like.layers[l].weight.rows(),
                                               like.layers[l].weight.cols());
    p.layers[l].bias = Eigen::RowVectorXd::Zero(like.layers[l].bias.size());
  }
  return p;
}

MlpParams MlpParams::init(std::size_t hidden, Rng& rng) {
  MlpParams p = zeros(hidden);
  for (auto& layer : p.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.rows()));
    // Fill row-major so the draw order does not depend on Eigen storage.
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        layer.weight(i, j) = rng.uniform(-bound, bound);
      }
    }
  }
  return p;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  }
  return n;
}

bool MlpParams::all_finite() const {
  for (const auto& layer : layers) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

void MlpParams::validate() const {
  const auto dims = layer_dims(hidden());
  for (std::size_t l = 0; l < kMlpLayers; ++l) {
    const auto& layer = layers[l];
    if (static_cast<std::size_t>(layer.weight.rows()) != dims[l] ||
        static_cast<std::size_t>(layer.weight.cols()) != dims[l + 1] ||
        static_cast<std::size_t>(layer.bias.size()) != dims[l + 1]) {
      throw std::invalid_argument("MlpParams: inconsistent shape in layer " + std::to_string(l));
    }
  }
}

Eigen::MatrixXd mlp_input(const Batch& x, const TimeBatch& t) {
  if (x.cols() != 2) throw std::invalid_argument("mlp_input: x must have 2 columns");
  if (t.size() != x.rows()) throw std::invalid_argument("mlp_input: t length != batch rows");
  Eigen::MatrixXd in(static_cast<Eigen::Index>(x.rows()), 3);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    in(i, 0) = x(r, 0);
    in(i, 1) = x(r, 1);
    in(i, 2) = t[r];
  }
  return in;
}

Batch to_batch(const Eigen::MatrixXd& m) {
  Batch out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
    }
  }
  return out;
}

Eigen::MatrixXd to_matrix(const Batch& b) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(b.rows()), static_cast<Eigen::Index>(b.cols()));
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b(i, j);
    }
  }
  return m;
}

void mlp_forward_tape(const MlpParams& p, const Batch& x, const TimeBatch& t, MlpTape& tape) {
  tape.input = mlp_input(x, t);
  const Eigen::MatrixXd* h = &tape.input;
  for (std::size_t l = 0; l < 3; ++l) {
    tape.pre[l].noalias() = *h * p.layers[l].weight;
    tape.pre[l].rowwise() += p.layers[l].bias;
    tape.gate[l] = (1.0 / (1.0 + (-tape.pre[l].array()).exp())).matrix();
    tape.post[l] = tape.pre[l].cwiseProduct(tape.gate[l]);
    h = &tape.post[l];
  }
  tape.output.noalias() = *h * p.layers[3].weight;
  tape.output.rowwise() += p.layers[3].bias;
}

MlpTape mlp_forward_tape(const MlpParams& p, const Batch& x, const TimeBatch& t) {
  MlpTape tape;
  mlp_forward_tape(p, x, t, tape);
  return tape;
}

Batch mlp_forward(const MlpParams& p, const Batch& x, const TimeBatch& t) {
  return to_batch(mlp_forward_tape(p, x, t).output);
}

Batch mlp_forward(const MlpParams& p, const Batch& x, double t) {
  return mlp_forward(p, x, TimeBatch(x.rows(), t));
}

void mlp_backward(const MlpParams& p, MlpTape& tape, const Eigen::MatrixXd& out_grad,
                  GradBundle& g) {
  if (out_grad.rows() != tape.output.rows() || out_grad.cols() != tape.output.cols()) {
    throw std::invalid_argument("mlp_backward: cotangent shape mismatch");
  }
  tape.delta = out_grad;
  for (std::size_t l = kMlpLayers; l-- > 0;) {
    const Eigen::MatrixXd& below = l == 0 ? tape.input : tape.post[l - 1];
    g.layers[l].weight.noalias() = below.transpose() * tape.delta;
    g.layers[l].bias.noalias() = tape.delta.colwise().sum();
    if (l == 0) break;
    tape.back.noalias() = tape.delta * p.layers[l].weight.transpose();
    const auto& s = tape.gate[l - 1].array();
    tape.delta = (tape.back.array() * s * (1.0 + tape.pre[l - 1].array() * (1.0 - s))).matrix();
  }
}

GradBundle mlp_backward(const MlpParams& p, const MlpTape& tape,
                        const Eigen::MatrixXd& out_grad) {
  MlpTape scratch = tape;
  GradBundle g = MlpParams::zeros_like(p);
  mlp_backward(p, scratch, out_grad, g);
  return g;
}

GradBundle mlp_backward(const MlpParams& p, const Batch& x, const TimeBatch& t,
                        const Batch& out_grad) {
  if (out_grad.rows() != x.rows() || out_grad.cols() != kMlpOutputDim) {
    throw std::invalid_argument("mlp_backward: out_grad must be B x 2");
  }
  const MlpTape tape = mlp_forward_tape(p, x, t);
  return mlp_backward(p, tape, to_matrix(out_grad));
}

AdamW::AdamW(const MlpParams& like, AdamWConfig config)
    : config_(config), m_(MlpParams::zeros_like(like)), v_(MlpParams::zeros_like(like)) {
  if (!(config_.lr > 0.0) || config_.beta1 < 0.0 || config_.beta1 >= 1.0 ||
      config_.beta2 < 0.0 || config_.beta2 >= 1.0 || !(config_.eps > 0.0) ||
      config_.weight_decay < 0.0) {
    throw std::invalid_argument("AdamW: invalid hyperparameters");
  }
}

void AdamW::step(MlpParams& params, const GradBundle& grad) {
  ++steps_;
  const double lr = config_.lr;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double decay = 1.0 - lr * config_.weight_decay;
  const double eps = config_.eps;

  for_each_tensor(m_, grad, [&](auto m, auto g) { m = b1 * m + (1.0 - b1) * g; });
  for_each_tensor(v_, grad, [&](auto v, auto g) { v = b2 * v + (1.0 - b2) * g.square(); });
  for (std::size_t l = 0; l < kMlpLayers; ++l) {
    auto update = [&](auto p, auto m, auto v) {
      p *= decay;
      p -= lr * (m / bc1) / ((v / bc2).sqrt() + eps);
    };
    update(params.layers[l].weight.array(), m_.layers[l].weight.array(),
           v_.layers[l].weight.array());
    update(params.layers[l].bias.array(), m_.layers[l].bias.array(), v_.layers[l].bias.array());
  }
}

}  // namespace bm
