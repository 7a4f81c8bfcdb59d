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

// Evaluation indices and the numerical KL oracle.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gammadict/matrix.hpp"

namespace gammadict {

// ---------------------------------------------------------------------------
// VAF

struct VafReport {
  std::vector<double> per_channel;  // percent; NaN for all-zero channels
  double global = 0.0;              // percent
  std::vector<std::string> warnings;
};

// Uncentered variance accounted for, 100 (1 - sum (x - xhat)^2 / sum x^2),
// per row (channel) and over the whole matrix.
inline VafReport vaf(const Matrix& X, const Matrix& Xhat) {
  detail::require_same_shape(X, Xhat, "vaf");
  VafReport rep;
  double total_res = 0.0;
  double total_energy = 0.0;
  rep.per_channel.resize(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double res = 0.0;
    double energy = 0.0;
    for (std::size_t j = 0; j < X.cols(); ++j) {
      const double d = X(i, j) - Xhat(i, j);
      res += d * d;
      energy += X(i, j) * X(i, j);
    }
    total_res += res;
    total_energy += energy;
    if (energy == 0.0) {
      rep.per_channel[i] = std::numeric_limits<double>::quiet_NaN();
      rep.warnings.push_back("vaf: channel " + std::to_string(i) + " is all zero; VAF undefined");
    } else {
      rep.per_channel[i] = 100.0 * (1.0 - res / energy);
    }
  }
  if (total_energy == 0.0) throw std::invalid_argument("vaf: reference matrix is all zero");
  rep.global = 100.0 * (1.0 - total_res / total_energy);
  return rep;
}

// ---------------------------------------------------------------------------
// SI-SDR

// Results are clamped to +-kSiSdrCapDb. An estimate with no component along
// the reference reports -kSiSdrCapDb; a zero residual reports +kSiSdrCapDb.
inline constexpr double kSiSdrCapDb = 200.0;

inline double si_sdr(std::span<const double> reference, std::span<const double> estimate) {
  if (reference.size() != estimate.size()) {
    throw std::invalid_argument("si_sdr: length mismatch " + std::to_string(reference.size()) +
                                " vs " + std::to_string(estimate.size()));
  }
  double ref_energy = 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    ref_energy += reference[i] * reference[i];
    dot += reference[i] * estimate[i];
  }
  if (ref_energy == 0.0) throw std::invalid_argument("si_sdr: reference is all zero");
  const double scale = dot / ref_energy;
  double target = 0.0;
  double residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double t = scale * reference[i];
    const double e = estimate[i] - t;
    target += t * t;
    residual += e * e;
  }
  if (target == 0.0) return -kSiSdrCapDb;
  if (residual == 0.0) return kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(target / residual), -kSiSdrCapDb, kSiSdrCapDb);
}

// ---------------------------------------------------------------------------
// Dictionary matching

struct DictionaryMatch {
  double score = 0.0;                   // mean matched cosine
  std::vector<std::size_t> assignment;  // learned column i -> true column assignment[i]
  std::vector<double> cosines;          // matched cosine per learned column
  std::vector<std::string> warnings;
};

namespace detail {

// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
// O(n^3)). Returns row -> column.
inline std::vector<std::size_t> hungarian(const Matrix& cost) {
  const std::size_t n = cost.rows();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

// Column cosines between two m x r dictionaries, matched one-to-one so the
// summed cosine is maximal. Zero columns score 0 against everything.
inline DictionaryMatch match_dictionaries(const Matrix& learned, const Matrix& truth) {
  detail::require_same_shape(learned, truth, "dictionary_match");
  const std::size_t r = learned.cols();
  DictionaryMatch out;
  if (r == 0) return out;
  auto norms = [&out](const Matrix& A, const char* name) {
    std::vector<double> n(A.cols(), 0.0);
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < A.cols(); ++j) n[j] += A(i, j) * A(i, j);
    for (std::size_t j = 0; j < n.size(); ++j) {
      n[j] = std::sqrt(n[j]);
      if (n[j] == 0.0) {
        out.warnings.push_back(std::string("dictionary_match: ") + name + " column " +
                               std::to_string(j) + " is zero; cosine taken as 0");
      }
    }
    return n;
  };
  const auto nl = norms(learned, "learned");
  const auto nt = norms(truth, "true");
  const Matrix dots = matmul_tn(learned, truth);
  Matrix cos(r, r);
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b)
      cos(a, b) = (nl[a] == 0.0 || nt[b] == 0.0) ? 0.0 : dots(a, b) / (nl[a] * nt[b]);
  out.assignment = detail::hungarian(-1.0 * cos);
  out.cosines.resize(r);
  double s = 0.0;
  for (std::size_t a = 0; a < r; ++a) {
    out.cosines[a] = cos(a, out.assignment[a]);
    s += out.cosines[a];
  }
  out.score = s / static_cast<double>(r);
  return out;
}

inline double dictionary_match(const Matrix& learned, const Matrix& truth) {
  return match_dictionaries(learned, truth).score;
}

// ---------------------------------------------------------------------------
// KL quadrature oracle

namespace detail {

struct KronrodEstimate {
  double value;
  double error;
};

// 15-point Gauss-Kronrod with embedded 7-point Gauss on [a, b].
template <class F>
KronrodEstimate gauss_kronrod15(const F& f, double a, double b) {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = wgk[7] * fc;
  double gauss = wg[3] * fc;
  for (std::size_t k = 0; k < 7; ++k) {
    const double f1 = f(c - h * xgk[k]);
    const double f2 = f(c + h * xgk[k]);
    kronrod += wgk[k] * (f1 + f2);
    if (k % 2 == 1) gauss += wg[k / 2] * (f1 + f2);
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

template <class F>
double adaptive_integrate(const F& f, double a, double b, double tol, int depth,
                          int& evaluations) {
  const auto est = gauss_kronrod15(f, a, b);
  ++evaluations;
  if (est.error <= tol) return est.value;
  if (depth <= 0) {
    throw std::runtime_error("kl_quadrature_oracle: no convergence on [" + std::to_string(a) +
                             ", " + std::to_string(b) + "], error estimate " +
                             std::to_string(est.error) + " > " + std::to_string(tol) +
                             " after " + std::to_string(evaluations) + " panels");
  }
  const double mid = 0.5 * (a + b);
  return adaptive_integrate(f, a, mid, 0.5 * tol, depth - 1, evaluations) +
         adaptive_integrate(f, mid, b, 0.5 * tol, depth - 1, evaluations);
}

}  // namespace detail

// KL(Gamma(alpha1, rate beta1) || Gamma(alpha2, rate beta2)) by direct
// integration of f1 log(f1 / f2). The integral is taken in t = log x, which
// removes the x^(alpha1 - 1) singularity at 0 for alpha1 < 1 and turns the
// tail into a double-exponential decay. The t range spans the bulk of
// Gamma(alpha1, beta1): log-weight at least 45 nats below the peak on both
// sides. Log densities use std::lgamma so this stays independent of the
// library's own special functions.
inline double kl_quadrature_oracle(double alpha1, double beta1, double alpha2, double beta2,
                                   double tolerance = 1e-10) {
  if (!(alpha1 > 0.0) || !(beta1 > 0.0) || !(alpha2 > 0.0) || !(beta2 > 0.0)) {
    throw std::domain_error("kl_quadrature_oracle: all parameters must be positive");
  }
  const double c1 = alpha1 * std::log(beta1) - std::lgamma(alpha1);
  const double c2 = alpha2 * std::log(beta2) - std::lgamma(alpha2);
  auto integrand = [&](double t) {
    const double x = std::exp(t);
    const double log_f1 = (alpha1 - 1.0) * t - beta1 * x + c1;
    const double log_f2 = (alpha2 - 1.0) * t - beta2 * x + c2;
    // f1(x) dx = exp(log_f1 + t) dt
    return std::exp(log_f1 + t) * (log_f1 - log_f2);
  };
  const double center = std::log(alpha1 / beta1);
  const double lo = center - 45.0 / alpha1;
  const double hi = std::log((alpha1 + 60.0 + 10.0 * std::sqrt(alpha1)) / beta1);
  // Split at the mode so each half is unimodal-ish.
  int evaluations = 0;
  const double tol = 0.5 * tolerance;
  return detail::adaptive_integrate(integrand, lo, center, tol, 40, evaluations) +
         detail::adaptive_integrate(integrand, center, hi, tol, 40, evaluations);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

inline double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: no samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double F = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace gammadict
