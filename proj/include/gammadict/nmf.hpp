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

// Lee-Seung multiplicative-update NMF for the Frobenius and generalized KL
// objectives. Every denominator is floored at kDenominatorFloor; that is the
// only departure from the textbook updates.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gammadict/errors.hpp"
#include "gammadict/matrix.hpp"
#include "gammadict/random.hpp"

namespace gammadict {

enum class NmfObjective { frobenius, kl };

inline constexpr double kDenominatorFloor = 1e-12;

struct NmfResult {
  Matrix W;  // m x r
  Matrix H;  // r x n
  // trace[0] is the objective at initialization, trace[k] after iteration k.
  std::vector<double> objective_trace;
};

struct ActivationSolve {
  Matrix H;
  std::vector<double> objective_trace;  // same layout as NmfResult
};

namespace detail {

inline void require_nonnegative(const Matrix& A, const char* fn, const char* name) {
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) {
      const double v = A(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument(std::string(fn) + ": " + name +
                                    " must be finite and nonnegative, found " +
                                    std::to_string(v) + " at (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
      }
    }
}

inline Matrix random_positive(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix A(rows, cols);
  for (double& v : A.data()) v = rng.uniform(0.1, 1.1);
  return A;
}

inline double floor_denominator(double d) { return std::max(d, kDenominatorFloor); }

// H <- H .* (W^T X) ./ (W^T W H)
inline void frobenius_update_h(const Matrix& X, const Matrix& W, Matrix& H) {
  const Matrix num = matmul_tn(W, X);
  const Matrix den = matmul(matmul_tn(W, W), H);
  auto h = H.data();
  auto n = num.data();
  auto d = den.data();
  for (std::size_t k = 0; k < h.size(); ++k) h[k] *= n[k] / floor_denominator(d[k]);
}

// W <- W .* (X H^T) ./ (W H H^T)
inline void frobenius_update_w(const Matrix& X, Matrix& W, const Matrix& H) {
  const Matrix num = matmul_nt(X, H);
  const Matrix den = matmul(W, matmul_nt(H, H));
  auto w = W.data();
  auto n = num.data();
  auto d = den.data();
  for (std::size_t k = 0; k < w.size(); ++k) w[k] *= n[k] / floor_denominator(d[k]);
}

// X ./ (W H), elementwise with floored denominator.
inline Matrix kl_ratio(const Matrix& X, const Matrix& W, const Matrix& H) {
  Matrix R = matmul(W, H);
  auto r = R.data();
  auto x = X.data();
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = x[k] / floor_denominator(r[k]);
  return R;
}

inline void kl_update_h(const Matrix& X, const Matrix& W, Matrix& H) {
  const Matrix num = matmul_tn(W, kl_ratio(X, W, H));
  std::vector<double> col_sum(W.cols(), 0.0);
  for (std::size_t i = 0; i < W.rows(); ++i)
    for (std::size_t a = 0; a < W.cols(); ++a) col_sum[a] += W(i, a);
  for (std::size_t a = 0; a < H.rows(); ++a)
    for (std::size_t j = 0; j < H.cols(); ++j)
      H(a, j) *= num(a, j) / floor_denominator(col_sum[a]);
}

inline void kl_update_w(const Matrix& X, Matrix& W, const Matrix& H) {
  const Matrix num = matmul_nt(kl_ratio(X, W, H), H);
  std::vector<double> row_sum(H.rows(), 0.0);
  for (std::size_t a = 0; a < H.rows(); ++a)
    for (std::size_t j = 0; j < H.cols(); ++j) row_sum[a] += H(a, j);
  for (std::size_t i = 0; i < W.rows(); ++i)
    for (std::size_t a = 0; a < W.cols(); ++a)
      W(i, a) *= num(i, a) / floor_denominator(row_sum[a]);
}

}  // namespace detail

// 0.5 ||X - W H||_F^2
inline double frobenius_objective(const Matrix& X, const Matrix& W, const Matrix& H) {
  return 0.5 * frobenius_sq(X - matmul(W, H));
}

// sum x log(x / y) - x + y with y = (W H), using 0 log 0 = 0.
inline double kl_objective(const Matrix& X, const Matrix& W, const Matrix& H) {
  const Matrix Y = matmul(W, H);
  double s = 0.0;
  auto x = X.data();
  auto y = Y.data();
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] > 0.0) {
      s += x[k] * std::log(x[k] / y[k]) - x[k] + y[k];
    } else {
      s += y[k];
    }
  }
  return s;
}

inline double nmf_objective(NmfObjective objective, const Matrix& X, const Matrix& W,
                            const Matrix& H) {
  return objective == NmfObjective::frobenius ? frobenius_objective(X, W, H)
                                              : kl_objective(X, W, H);
}

// Alternating H then W updates, `iters` times, from a seeded init with
// entries uniform in (0.1, 1.1).
inline NmfResult nmf(const Matrix& X, std::size_t rank, std::size_t iters, std::uint64_t seed,
                     NmfObjective objective = NmfObjective::frobenius) {
  detail::require_nonnegative(X, "nmf", "X");
  if (rank < 1) throw std::invalid_argument("nmf: rank must be >= 1");
  if (iters < 1) throw std::invalid_argument("nmf: iters must be >= 1");
  Rng rng(seed);
  NmfResult res{detail::random_positive(X.rows(), rank, rng),
                detail::random_positive(rank, X.cols(), rng),
                {}};
  res.objective_trace.reserve(iters + 1);
  res.objective_trace.push_back(nmf_objective(objective, X, res.W, res.H));
  for (std::size_t it = 0; it < iters; ++it) {
    if (objective == NmfObjective::frobenius) {
      detail::frobenius_update_h(X, res.W, res.H);
      detail::frobenius_update_w(X, res.W, res.H);
    } else {
      detail::kl_update_h(X, res.W, res.H);
      detail::kl_update_w(X, res.W, res.H);
    }
    res.objective_trace.push_back(nmf_objective(objective, X, res.W, res.H));
  }
  return res;
}

// Frobenius H-updates with W frozen.
inline ActivationSolve solve_activations(const Matrix& X, const Matrix& W, std::size_t iters,
                                         std::uint64_t seed) {
  if (X.rows() != W.rows()) {
    throw std::invalid_argument("solve_activations: X is " + X.shape_string() + " but W is " +
                                W.shape_string());
  }
  detail::require_nonnegative(X, "solve_activations", "X");
  detail::require_nonnegative(W, "solve_activations", "W");
  if (iters < 1) throw std::invalid_argument("solve_activations: iters must be >= 1");
  Rng rng(seed);
  ActivationSolve res{detail::random_positive(W.cols(), X.cols(), rng), {}};
  res.objective_trace.reserve(iters + 1);
  res.objective_trace.push_back(frobenius_objective(X, W, res.H));
  for (std::size_t it = 0; it < iters; ++it) {
    detail::frobenius_update_h(X, W, res.H);
    res.objective_trace.push_back(frobenius_objective(X, W, res.H));
  }
  return res;
}

}  // namespace gammadict
