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

// Adam, mini-batching and the VAE-NMF training loop.

#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gammadict/errors.hpp"
#include "gammadict/gamma_vae.hpp"
#include "gammadict/matrix.hpp"
#include "gammadict/random.hpp"

namespace gammadict {

struct TrainConfig {
  std::size_t rank = 4;
  std::size_t hidden1 = 400;
  std::size_t hidden2 = 400;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  double weight_decay = 5e-4;
  double gamma = 10.0;
  double prior_alpha = 2.0;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;

  void validate() const {
    if (rank < 1) throw std::invalid_argument("TrainConfig: rank must be >= 1");
    if (hidden1 < 1 || hidden2 < 1) throw std::invalid_argument("TrainConfig: hidden sizes must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("TrainConfig: gamma must be > 0");
    if (!(prior_alpha > 0.0)) throw std::invalid_argument("TrainConfig: prior_alpha must be > 0");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  }
};

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;
};

struct TrainHistory {
  std::vector<LossBreakdown> epochs;  // batch means per epoch
  double wall_seconds = 0.0;
  double final_negative_mass = 0.0;
};

// One Adam update over parallel lists of parameter and gradient blocks.
// Weight decay is coupled: g <- g + weight_decay * p before the moment update.
// Moment buffers are created on first use.
inline void adam_step(std::span<const std::span<double>> params,
                      std::span<const std::span<double>> grads, AdamState& state,
                      double learning_rate, double weight_decay) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam_step: " + std::to_string(params.size()) +
                                " parameter blocks but " + std::to_string(grads.size()) +
                                " gradient blocks");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads[b].size()) {
      throw std::invalid_argument("adam_step: block " + std::to_string(b) + " has " +
                                  std::to_string(params[b].size()) + " parameters but " +
                                  std::to_string(grads[b].size()) + " gradients");
    }
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  } else if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: state does not match parameter layout");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (state.first_moment[b].size() != params[b].size()) {
      throw std::invalid_argument("adam_step: state block " + std::to_string(b) +
                                  " has the wrong size");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double bc2 = 1.0 - std::pow(AdamState::kBeta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b];
    auto g = grads[b];
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k] + weight_decay * p[k];
      m[k] = AdamState::kBeta1 * m[k] + (1.0 - AdamState::kBeta1) * gk;
      v[k] = AdamState::kBeta2 * v[k] + (1.0 - AdamState::kBeta2) * gk * gk;
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] -= learning_rate * mhat / (std::sqrt(vhat) + AdamState::kEpsilon);
    }
  }
}

// Seeded permutation of [0, n) cut into consecutive chunks; the last chunk
// may be short.
inline std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                          Rng& rng) {
  if (n < 1) throw std::invalid_argument("make_batches: n must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("make_batches: batch_size must be >= 1");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  // Fisher-Yates with our own index draw; std::shuffle is not portable.
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                         perm.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

inline Matrix gather_columns(const Matrix& X, std::span<const std::size_t> idx) {
  Matrix out(X.rows(), idx.size());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    auto src = X.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < idx.size(); ++j) dst[j] = src[idx[j]];
  }
  return out;
}

struct TrainResult {
  VaeNmfModel model;
  TrainHistory history;
};

// Optional per-epoch hook (epoch index from 0, that epoch's mean losses).
using EpochCallback = std::function<void(std::size_t, const LossBreakdown&)>;

inline TrainResult train(const Matrix& X, const TrainConfig& config,
                         const EpochCallback& on_epoch = {}) {
  config.validate();
  if (X.rows() == 0 || X.cols() == 0) throw std::invalid_argument("train: empty data matrix");
  if (!all_finite(X.data())) throw numeric_error("train: non-finite entry in X");
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j)
      if (X(i, j) < 0.0) {
        throw std::invalid_argument("train: X must be nonnegative, found " +
                                    std::to_string(X(i, j)) + " at (" + std::to_string(i) +
                                    ", " + std::to_string(j) + ")");
      }
  if (config.rank >= std::min(X.rows(), X.cols())) {
    throw std::invalid_argument("train: rank " + std::to_string(config.rank) +
                                " must be < min(m, n) = " +
                                std::to_string(std::min(X.rows(), X.cols())));
  }

  const auto started = std::chrono::steady_clock::now();
  Rng rng(config.seed);
  TrainResult out{make_model(X.rows(), config.rank, config.hidden1, config.hidden2,
                             config.prior_alpha, rng),
                  {}};
  AdamState adam;
  auto params = parameter_blocks(out.model);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches = make_batches(X.cols(), config.batch_size, rng);
    LossBreakdown mean;
    for (const auto& idx : batches) {
      const Matrix batch = gather_columns(X, idx);
      auto res = param_gradients(out.model, batch, rng, config.gamma);
      if (!std::isfinite(res.loss.total)) {
        throw numeric_error("train: non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      auto grads = gradient_blocks(res.grads);
      adam_step(params, grads, adam, config.learning_rate, config.weight_decay);
      mean.recon += res.loss.recon;
      mean.kl += res.loss.kl;
      mean.penalty += res.loss.penalty;
      mean.total += res.loss.total;
    }
    const double nb = static_cast<double>(batches.size());
    mean.recon /= nb;
    mean.kl /= nb;
    mean.penalty /= nb;
    mean.total /= nb;
    for (const auto& p : params)
      if (!all_finite(p)) throw numeric_error("train: non-finite parameter after epoch " +
                                              std::to_string(epoch + 1));
    out.history.epochs.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  out.history.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out.history.final_negative_mass = negative_mass(out.model.decoder.W);
  return out;
}

}  // namespace gammadict
