// Copyright 2026 The gammadict Authors. All Rights Reserved.
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

// VAE-NMF: a variational autoencoder whose latent code is Gamma distributed
// and whose decoder is a single linear map x_hat = W z. Nonnegativity of W is
// encouraged by a quadratic penalty on negative entries and enforced at
// export time by clamping.
//
// Conventions used throughout:
//   * encoder: x -> ReLU(W1 x + b1) -> ReLU(W2 h1 + b2) -> a = Wa h2 + ba,
//     posterior shape alpha = 1 + softplus(a), rate fixed at 1;
//   * likelihood: isotropic unit-variance Gaussian, so the reconstruction
//     term is 0.5 ||x - W z||^2;
//   * prior: Gamma(prior_alpha, 1) on every latent dimension;
//   * one reparameterized draw z = h(eps, alpha) per datum per evaluation.
// Batch losses are means over the batch columns; the penalty is added once.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gammadict/errors.hpp"
#include "gammadict/gamma.hpp"
#include "gammadict/matrix.hpp"
#include "gammadict/random.hpp"
#include "gammadict/special.hpp"

namespace gammadict {

struct DenseLayer {
  Matrix weights;  // out x in
  std::vector<double> bias;

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct EncoderParams {
  DenseLayer layer1;
  DenseLayer layer2;
  DenseLayer alpha_head;
  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

struct DecoderDict {
  Matrix W;  // m x r
  friend bool operator==(const DecoderDict&, const DecoderDict&) = default;
};

struct GammaPosterior {
  std::vector<double> alpha;
  static constexpr double beta = 1.0;
};

struct VaeNmfModel {
  EncoderParams encoder;
  DecoderDict decoder;
  double prior_alpha = 2.0;

  std::size_t input_dim() const { return encoder.layer1.in_dim(); }
  std::size_t rank() const { return encoder.alpha_head.out_dim(); }
  std::size_t hidden1() const { return encoder.layer1.out_dim(); }
  std::size_t hidden2() const { return encoder.layer2.out_dim(); }

  friend bool operator==(const VaeNmfModel&, const VaeNmfModel&) = default;
};

struct LossBreakdown {
  double recon = 0.0;
  double kl = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

// Gradient of the batch loss, laid out exactly like the model parameters.
struct ModelGradients {
  EncoderParams encoder;
  Matrix W;
};

struct GradientResult {
  LossBreakdown loss;
  ModelGradients grads;
  Matrix noise;  // r x B, the eps values used
};

struct ExportedDictionary {
  Matrix W;
  double clamped_mass = 0.0;  // sum of w^2 over the negative entries removed
};

enum class ActivationMode { mean, sample };

// ---------------------------------------------------------------------------
// Construction and validation

inline void validate_model(const VaeNmfModel& model) {
  const auto& e = model.encoder;
  auto check_layer = [](const DenseLayer& l, const char* name) {
    if (l.bias.size() != l.out_dim()) {
      throw std::invalid_argument(std::string("model: ") + name + " bias length " +
                                  std::to_string(l.bias.size()) + " does not match weights " +
                                  l.weights.shape_string());
    }
    if (!all_finite(l.weights.data()) || !all_finite(l.bias)) {
      throw numeric_error(std::string("model: non-finite parameter in ") + name);
    }
  };
  check_layer(e.layer1, "layer1");
  check_layer(e.layer2, "layer2");
  check_layer(e.alpha_head, "alpha_head");
  if (e.layer2.in_dim() != e.layer1.out_dim() || e.alpha_head.in_dim() != e.layer2.out_dim()) {
    throw std::invalid_argument("model: encoder layer shapes are not chained");
  }
  const Matrix& W = model.decoder.W;
  if (W.rows() != model.input_dim() || W.cols() != model.rank()) {
    throw std::invalid_argument("model: decoder W is " + W.shape_string() + ", expected " +
                                std::to_string(model.input_dim()) + "x" +
                                std::to_string(model.rank()));
  }
  if (!all_finite(W.data())) throw numeric_error("model: non-finite decoder weight");
  if (!(model.prior_alpha > 0.0) || !std::isfinite(model.prior_alpha)) {
    throw std::invalid_argument("model: prior_alpha must be positive");
  }
}

// Glorot-uniform encoder weights, zero biases, decoder W = |N(0, 0.1^2)|.
inline VaeNmfModel make_model(std::size_t input_dim, std::size_t rank, std::size_t hidden1,
                              std::size_t hidden2, double prior_alpha, Rng& rng) {
  if (input_dim == 0 || rank == 0 || hidden1 == 0 || hidden2 == 0) {
    throw std::invalid_argument("make_model: all dimensions must be >= 1");
  }
  if (!(prior_alpha > 0.0)) throw std::invalid_argument("make_model: prior_alpha must be > 0");
  auto glorot = [&rng](std::size_t out, std::size_t in) {
    DenseLayer l{Matrix(out, in), std::vector<double>(out, 0.0)};
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& w : l.weights.data()) w = rng.uniform(-limit, limit);
    return l;
  };
  VaeNmfModel model;
  model.encoder.layer1 = glorot(hidden1, input_dim);
  model.encoder.layer2 = glorot(hidden2, hidden1);
  model.encoder.alpha_head = glorot(rank, hidden2);
  model.decoder.W = Matrix(input_dim, rank);
  for (double& w : model.decoder.W.data()) w = std::abs(rng.normal(0.0, 0.1));
  model.prior_alpha = prior_alpha;
  return model;
}

// Mutable views over every parameter block, in a fixed order shared with
// gradient_blocks(): layer1 W, b, layer2 W, b, alpha_head W, b, decoder W.
inline std::vector<std::span<double>> parameter_blocks(EncoderParams& e, Matrix& W) {
  return {e.layer1.weights.data(), e.layer1.bias,       e.layer2.weights.data(), e.layer2.bias,
          e.alpha_head.weights.data(), e.alpha_head.bias, W.data()};
}

inline std::vector<std::span<double>> parameter_blocks(VaeNmfModel& model) {
  return parameter_blocks(model.encoder, model.decoder.W);
}

inline std::vector<std::span<double>> gradient_blocks(ModelGradients& g) {
  return parameter_blocks(g.encoder, g.W);
}

inline ModelGradients zero_gradients_like(const VaeNmfModel& model) {
  auto zero_layer = [](const DenseLayer& l) {
    return DenseLayer{Matrix(l.out_dim(), l.in_dim()), std::vector<double>(l.out_dim(), 0.0)};
  };
  return ModelGradients{{zero_layer(model.encoder.layer1), zero_layer(model.encoder.layer2),
                         zero_layer(model.encoder.alpha_head)},
                        Matrix(model.decoder.W.rows(), model.decoder.W.cols())};
}

// ---------------------------------------------------------------------------
// Forward pieces

inline double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }

inline double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

namespace detail {

struct EncoderTrace {
  std::vector<double> pre1, h1, pre2, h2, head, alpha;
};

inline std::vector<double> affine(const DenseLayer& l, std::span<const double> x) {
  std::vector<double> y = matvec(l.weights, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += l.bias[i];
  return y;
}

inline std::vector<double> relu(std::vector<double> v) {
  for (double& x : v) x = std::max(x, 0.0);
  return v;
}

inline EncoderTrace encode_trace(const VaeNmfModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim()) {
    throw std::invalid_argument("encode: input length " + std::to_string(x.size()) +
                                " does not match model input_dim " +
                                std::to_string(model.input_dim()));
  }
  if (!all_finite(x)) throw numeric_error("encode: non-finite input");
  EncoderTrace t;
  t.pre1 = affine(model.encoder.layer1, x);
  t.h1 = relu(t.pre1);
  t.pre2 = affine(model.encoder.layer2, t.h1);
  t.h2 = relu(t.pre2);
  t.head = affine(model.encoder.alpha_head, t.h2);
  t.alpha.resize(t.head.size());
  for (std::size_t i = 0; i < t.head.size(); ++i) t.alpha[i] = 1.0 + softplus(t.head[i]);
  return t;
}

}  // namespace detail

inline GammaPosterior encode(const VaeNmfModel& model, std::span<const double> x) {
  return GammaPosterior{detail::encode_trace(model, x).alpha};
}

inline std::vector<double> decode(const VaeNmfModel& model, std::span<const double> z) {
  if (z.size() != model.rank()) {
    throw std::invalid_argument("decode: latent length " + std::to_string(z.size()) +
                                " does not match rank " + std::to_string(model.rank()));
  }
  if (!all_finite(z)) throw numeric_error("decode: non-finite latent vector");
  return matvec(model.decoder.W, z);
}

// KL( Gamma(alpha1, rate beta1) || Gamma(alpha2, rate beta2) ).
inline double kl_gamma(double alpha1, double beta1, double alpha2, double beta2) {
  if (!(alpha1 > 0.0) || !(beta1 > 0.0) || !(alpha2 > 0.0) || !(beta2 > 0.0)) {
    throw std::domain_error("kl_gamma: all parameters must be positive");
  }
  return (alpha1 - alpha2) * digamma(alpha1) - lgamma(alpha1) + lgamma(alpha2) +
         alpha2 * (std::log(beta1) - std::log(beta2)) + alpha1 * (beta2 - beta1) / beta1;
}

// d/d alpha1 of kl_gamma(alpha1, 1, alpha2, 1).
inline double kl_gamma_unit_rate_dalpha(double alpha1, double alpha2) {
  return (alpha1 - alpha2) * trigamma(alpha1);
}

// Sum of w^2 over negative entries.
inline double negative_mass(const Matrix& W) {
  double s = 0.0;
  for (double w : W.data())
    if (w < 0.0) s += w * w;
  return s;
}

inline double negweight_penalty(const Matrix& W, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("negweight_penalty: gamma must be > 0");
  if (!all_finite(W.data())) throw numeric_error("negweight_penalty: non-finite weight");
  return 0.5 * gamma * negative_mass(W);
}

// ---------------------------------------------------------------------------
// Loss and gradients

namespace detail {

inline void check_batch(const VaeNmfModel& model, const Matrix& batch) {
  if (batch.cols() == 0) throw std::invalid_argument("loss: empty batch");
  if (batch.rows() != model.input_dim()) {
    throw std::invalid_argument("loss: batch has " + std::to_string(batch.rows()) +
                                " rows, model expects " + std::to_string(model.input_dim()));
  }
  if (!all_finite(batch.data())) throw numeric_error("loss: non-finite batch entry");
}

inline void check_noise(const VaeNmfModel& model, const Matrix& batch, const Matrix& noise) {
  if (noise.rows() != model.rank() || noise.cols() != batch.cols()) {
    throw std::invalid_argument("loss: noise matrix is " + noise.shape_string() + ", expected " +
                                std::to_string(model.rank()) + "x" +
                                std::to_string(batch.cols()));
  }
}

}  // namespace detail

// One eps per latent dimension per batch column, redrawn only when the
// transform base would be non-positive for the current posterior shape.
inline Matrix draw_noise(const VaeNmfModel& model, const Matrix& batch, Rng& rng) {
  detail::check_batch(model, batch);
  Matrix noise(model.rank(), batch.cols());
  for (std::size_t j = 0; j < batch.cols(); ++j) {
    const auto alpha = encode(model, batch.col(j)).alpha;
    for (std::size_t i = 0; i < alpha.size(); ++i) noise(i, j) = draw_reparam_noise(rng, alpha[i]);
  }
  return noise;
}

// Loss with the reparameterization noise supplied by the caller. Holding the
// noise fixed makes the loss a deterministic function of the parameters,
// which is what param_gradients differentiates.
inline LossBreakdown loss_with_noise(const VaeNmfModel& model, const Matrix& batch,
                                     const Matrix& noise, double gamma) {
  detail::check_batch(model, batch);
  detail::check_noise(model, batch, noise);
  const std::size_t B = batch.cols();
  LossBreakdown out;
  std::vector<double> z(model.rank());
  for (std::size_t j = 0; j < B; ++j) {
    const auto x = batch.col(j);
    const auto alpha = encode(model, x).alpha;
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = reparam_gamma(noise(i, j), alpha[i]);
      out.kl += kl_gamma(alpha[i], 1.0, model.prior_alpha, 1.0);
    }
    const auto xhat = matvec(model.decoder.W, z);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - xhat[k];
      out.recon += 0.5 * d * d;
    }
  }
  out.recon /= static_cast<double>(B);
  out.kl /= static_cast<double>(B);
  out.penalty = negweight_penalty(model.decoder.W, gamma);
  out.total = out.recon + out.kl + out.penalty;
  return out;
}

inline LossBreakdown loss(const VaeNmfModel& model, const Matrix& batch, Rng& rng, double gamma) {
  return loss_with_noise(model, batch, draw_noise(model, batch, rng), gamma);
}

// Pathwise gradient of loss_with_noise with respect to every parameter.
inline GradientResult param_gradients_with_noise(const VaeNmfModel& model, const Matrix& batch,
                                                 const Matrix& noise, double gamma) {
  detail::check_batch(model, batch);
  detail::check_noise(model, batch, noise);
  if (!(gamma > 0.0)) throw std::invalid_argument("param_gradients: gamma must be > 0");

  const std::size_t B = batch.cols();
  const std::size_t m = model.input_dim();
  const std::size_t r = model.rank();
  const double inv_b = 1.0 / static_cast<double>(B);
  const Matrix& W = model.decoder.W;
  const auto& enc = model.encoder;

  GradientResult res{{}, zero_gradients_like(model), noise};
  auto& g = res.grads;

  std::vector<double> z(r), dz_dalpha(r), d_xhat(m), d_head(r);
  std::vector<double> d_h2(model.hidden2()), d_h1(model.hidden1());

  auto accumulate_layer = [](DenseLayer& gl, std::span<const double> delta,
                             std::span<const double> input) {
    for (std::size_t o = 0; o < delta.size(); ++o) {
      if (delta[o] == 0.0) continue;
      auto grow = gl.weights.row(o);
      for (std::size_t i = 0; i < input.size(); ++i) grow[i] += delta[o] * input[i];
      gl.bias[o] += delta[o];
    }
  };
  // out[i] = sum_o L.weights(o, i) * delta[o]
  auto backprop_input = [](const DenseLayer& l, std::span<const double> delta,
                           std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t o = 0; o < delta.size(); ++o) {
      if (delta[o] == 0.0) continue;
      auto wrow = l.weights.row(o);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += wrow[i] * delta[o];
    }
  };

  for (std::size_t j = 0; j < B; ++j) {
    const auto x = batch.col(j);
    const auto t = detail::encode_trace(model, x);
    for (std::size_t i = 0; i < r; ++i) {
      z[i] = reparam_gamma(noise(i, j), t.alpha[i]);
      dz_dalpha[i] = reparam_gamma_dalpha(noise(i, j), t.alpha[i]);
      res.loss.kl += kl_gamma(t.alpha[i], 1.0, model.prior_alpha, 1.0);
    }
    const auto xhat = matvec(W, z);
    for (std::size_t k = 0; k < m; ++k) {
      const double d = xhat[k] - x[k];
      res.loss.recon += 0.5 * d * d;
      d_xhat[k] = d * inv_b;
    }
    // Decoder: dL/dW = d_xhat z^T, dL/dz = W^T d_xhat.
    for (std::size_t k = 0; k < m; ++k) {
      auto grow = g.W.row(k);
      for (std::size_t i = 0; i < r; ++i) grow[i] += d_xhat[k] * z[i];
    }
    for (std::size_t i = 0; i < r; ++i) {
      double dz = 0.0;
      for (std::size_t k = 0; k < m; ++k) dz += W(k, i) * d_xhat[k];
      const double d_alpha =
          dz * dz_dalpha[i] + inv_b * kl_gamma_unit_rate_dalpha(t.alpha[i], model.prior_alpha);
      d_head[i] = d_alpha * sigmoid(t.head[i]);
    }
    accumulate_layer(g.encoder.alpha_head, d_head, t.h2);
    backprop_input(enc.alpha_head, d_head, d_h2);
    for (std::size_t i = 0; i < d_h2.size(); ++i)
      if (t.pre2[i] <= 0.0) d_h2[i] = 0.0;
    accumulate_layer(g.encoder.layer2, d_h2, t.h1);
    backprop_input(enc.layer2, d_h2, d_h1);
    for (std::size_t i = 0; i < d_h1.size(); ++i)
      if (t.pre1[i] <= 0.0) d_h1[i] = 0.0;
    accumulate_layer(g.encoder.layer1, d_h1, x);
  }

  // Penalty: d/dw (gamma/2) w^2 = gamma w on negative entries.
  auto gw = g.W.data();
  auto wd = W.data();
  for (std::size_t k = 0; k < wd.size(); ++k)
    if (wd[k] < 0.0) gw[k] += gamma * wd[k];

  res.loss.recon *= inv_b;
  res.loss.kl *= inv_b;
  res.loss.penalty = negweight_penalty(W, gamma);
  res.loss.total = res.loss.recon + res.loss.kl + res.loss.penalty;
  return res;
}

inline GradientResult param_gradients(const VaeNmfModel& model, const Matrix& batch, Rng& rng,
                                      double gamma) {
  return param_gradients_with_noise(model, batch, draw_noise(model, batch, rng), gamma);
}

// ---------------------------------------------------------------------------
// Readout

inline ExportedDictionary export_dictionary(const VaeNmfModel& model) {
  ExportedDictionary out{model.decoder.W, 0.0};
  for (double& w : out.W.data()) {
    if (w < 0.0) {
      out.clamped_mass += w * w;
      w = 0.0;
    }
  }
  return out;
}

// Column-wise posterior readout. Mean mode returns alpha (the mean of
// Gamma(alpha, 1)); sample mode draws from the posterior with `rng`.
inline Matrix infer_activations(const VaeNmfModel& model, const Matrix& X, ActivationMode mode,
                                Rng* rng = nullptr) {
  if (X.rows() != model.input_dim()) {
    throw std::invalid_argument("infer_activations: X has " + std::to_string(X.rows()) +
                                " rows, model expects " + std::to_string(model.input_dim()));
  }
  if (mode == ActivationMode::sample && rng == nullptr) {
    throw std::invalid_argument("infer_activations: sample mode needs an Rng");
  }
  Matrix Z(model.rank(), X.cols());
  for (std::size_t j = 0; j < X.cols(); ++j) {
    const auto alpha = encode(model, X.col(j)).alpha;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      Z(i, j) = mode == ActivationMode::mean ? alpha[i] / GammaPosterior::beta
                                             : sample_gamma(*rng, alpha[i], GammaPosterior::beta);
    }
  }
  return Z;
}

}  // namespace gammadict
