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

// Gamma density, the Marsaglia-Tsang shape transform used as a
// reparameterization, and an exact Gamma sampler built on it.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "gammadict/random.hpp"
#include "gammadict/special.hpp"

namespace gammadict {

// Log density of Gamma(shape alpha, rate beta) at z.
inline double gamma_log_pdf(double z, double alpha, double beta) {
  if (!(z > 0.0) || !(alpha > 0.0) || !(beta > 0.0)) {
    throw std::domain_error("gamma_log_pdf: arguments must be positive");
  }
  return (alpha - 1.0) * std::log(z) - beta * z + alpha * std::log(beta) - lgamma(alpha);
}

namespace detail {

// 1 + eps / sqrt(9 alpha - 3), the base that gets cubed.
inline double reparam_base(double epsilon, double alpha, const char* fn) {
  if (!(alpha >= 1.0)) {
    throw std::domain_error(std::string(fn) + ": alpha must be >= 1, got " +
                            std::to_string(alpha));
  }
  const double base = 1.0 + epsilon / std::sqrt(9.0 * alpha - 3.0);
  if (!(base > 0.0)) {
    throw std::domain_error(std::string(fn) + ": transform base is non-positive");
  }
  return base;
}

}  // namespace detail

// z = (alpha - 1/3) (1 + eps / sqrt(9 alpha - 3))^3, a Gamma(alpha, 1) proposal
// driven by standard normal eps.
inline double reparam_gamma(double epsilon, double alpha) {
  const double u = detail::reparam_base(epsilon, alpha, "reparam_gamma");
  return (alpha - 1.0 / 3.0) * u * u * u;
}

// dz/dalpha at fixed eps. With c = (9 alpha - 3)^(-1/2) and u = 1 + eps c the
// chain rule collapses to u^3 - 1.5 eps c u^2.
inline double reparam_gamma_dalpha(double epsilon, double alpha) {
  const double u = detail::reparam_base(epsilon, alpha, "reparam_gamma_dalpha");
  const double c = 1.0 / std::sqrt(9.0 * alpha - 3.0);
  return u * u * u - 1.5 * epsilon * c * u * u;
}

// Standard normal eps such that reparam_gamma(eps, alpha) is defined.
inline double draw_reparam_noise(Rng& rng, double alpha) {
  const double c = 1.0 / std::sqrt(9.0 * alpha - 3.0);
  for (;;) {
    const double eps = rng.normal();
    if (1.0 + eps * c > 0.0) return eps;
  }
}

// Exact Gamma(alpha, rate beta) draw. Marsaglia-Tsang accept/reject for
// alpha >= 1; for alpha < 1 draws Gamma(alpha + 1) and scales by u^(1/alpha).
inline double sample_gamma(Rng& rng, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw std::domain_error("sample_gamma: alpha and beta must be positive");
  }
  if (alpha < 1.0) {
    const double g = sample_gamma(rng, alpha + 1.0, 1.0);
    return g * std::pow(rng.uniform_open(), 1.0 / alpha) / beta;
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / beta;
  }
}

}  // namespace gammadict
