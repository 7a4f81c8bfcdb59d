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

// STFT analysis/synthesis and NMF Wiener-mask enhancement.
//
// Framing: the signal is zero-padded with frame/2 samples on the left and
// enough on the right that 1 + ceil(N / hop) frames fit. Synthesis is
// weighted overlap-add with the analysis window, normalized per sample by
// the summed squared window. Because the padding puts every original sample
// under at least two frames, istft(stft(x)) reproduces all N samples and the
// output length always equals the input length; there are no trimmed edges.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gammadict/matrix.hpp"
#include "gammadict/nmf.hpp"

namespace gammadict {

// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft(std::vector<std::complex<double>>& a, bool inverse = false) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    std::vector<std::complex<double>> tw(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(len);
      tw[k] = {std::cos(ang), std::sin(ang)};
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + half] * tw[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double s = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= s;
  }
}

struct StftConfig {
  std::size_t frame_length = 512;
  std::size_t hop = 256;
  double sample_rate = 16000.0;

  std::size_t bins() const { return frame_length / 2 + 1; }

  // Periodic Hann is constant-overlap-add at hop = frame / k for integer k >= 2.
  void validate() const {
    if (frame_length < 2 || (frame_length & (frame_length - 1)) != 0) {
      throw std::invalid_argument("StftConfig: frame length must be a power of two >= 2, got " +
                                  std::to_string(frame_length));
    }
    if (hop == 0 || hop > frame_length / 2 || frame_length % hop != 0) {
      throw std::invalid_argument("StftConfig: hop " + std::to_string(hop) +
                                  " must divide the frame length and be at most half of it");
    }
    if (!(sample_rate > 0.0)) throw std::invalid_argument("StftConfig: sample rate must be > 0");
  }

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

struct Spectrogram {
  Matrix magnitudes;  // bins x frames
  Matrix phases;      // bins x frames, radians
  StftConfig config;
  std::size_t signal_length = 0;
};

inline std::vector<double> hann_periodic(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

inline std::size_t stft_frame_count(std::size_t signal_length, std::size_t hop) {
  return (signal_length + hop - 1) / hop + 1;
}

inline Spectrogram stft(std::span<const double> samples, const StftConfig& config) {
  config.validate();
  const std::size_t N = samples.size();
  const std::size_t F = config.frame_length;
  if (N < F) {
    throw std::invalid_argument("stft: signal has " + std::to_string(N) +
                                " samples, need at least one frame (" + std::to_string(F) + ")");
  }
  if (!all_finite(samples)) throw std::invalid_argument("stft: non-finite sample");
  const std::size_t pad = F / 2;
  const std::size_t frames = stft_frame_count(N, config.hop);
  const auto window = hann_periodic(F);

  Spectrogram spec{Matrix(config.bins(), frames), Matrix(config.bins(), frames), config, N};
  std::vector<std::complex<double>> buf(F);
  for (std::size_t k = 0; k < frames; ++k) {
    const std::size_t start = k * config.hop;
    for (std::size_t i = 0; i < F; ++i) {
      const std::size_t t = start + i;  // padded coordinate
      const double x = (t >= pad && t - pad < N) ? samples[t - pad] : 0.0;
      buf[i] = {x * window[i], 0.0};
    }
    fft(buf);
    for (std::size_t b = 0; b < config.bins(); ++b) {
      spec.magnitudes(b, k) = std::abs(buf[b]);
      spec.phases(b, k) = std::arg(buf[b]);
    }
  }
  return spec;
}

inline std::vector<double> istft(const Spectrogram& spec) {
  const auto& config = spec.config;
  config.validate();
  const std::size_t F = config.frame_length;
  const std::size_t N = spec.signal_length;
  const std::size_t frames = spec.magnitudes.cols();
  if (spec.magnitudes.rows() != config.bins() || spec.phases.rows() != config.bins() ||
      spec.phases.cols() != frames) {
    throw std::invalid_argument("istft: magnitudes " + spec.magnitudes.shape_string() +
                                " and phases " + spec.phases.shape_string() +
                                " do not match " + std::to_string(config.bins()) + " bins");
  }
  if (N < F || frames != stft_frame_count(N, config.hop)) {
    throw std::invalid_argument("istft: " + std::to_string(frames) +
                                " frames inconsistent with signal length " + std::to_string(N));
  }
  const std::size_t pad = F / 2;
  const std::size_t padded = (frames - 1) * config.hop + F;
  const auto window = hann_periodic(F);
  std::vector<double> acc(padded, 0.0), norm(padded, 0.0);
  std::vector<std::complex<double>> buf(F);
  for (std::size_t k = 0; k < frames; ++k) {
    for (std::size_t b = 0; b < config.bins(); ++b)
      buf[b] = std::polar(spec.magnitudes(b, k), spec.phases(b, k));
    // Hermitian completion; DC and Nyquist bins are real for real signals.
    buf[0] = {buf[0].real(), 0.0};
    buf[F / 2] = {buf[F / 2].real(), 0.0};
    for (std::size_t b = 1; b < F / 2; ++b) buf[F - b] = std::conj(buf[b]);
    fft(buf, /*inverse=*/true);
    const std::size_t start = k * config.hop;
    for (std::size_t i = 0; i < F; ++i) {
      acc[start + i] += buf[i].real() * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  std::vector<double> out(N);
  for (std::size_t n = 0; n < N; ++n) out[n] = acc[n + pad] / norm[n + pad];
  return out;
}

struct EnhanceConfig {
  StftConfig stft;
  std::size_t iterations = 200;  // activation solver iterations
  std::uint64_t seed = 0;        // activation solver init seed
};

inline constexpr double kMaskFloor = 1e-12;

// Wiener-style mask (Ws Hs) / (Ws Hs + Wn Hn + floor) with [Hs; Hn] solved
// against the stacked dictionary. Wn may have zero columns.
inline Matrix wiener_mask(const Matrix& V, const Matrix& Ws, const Matrix& Wn,
                          std::size_t iterations, std::uint64_t seed) {
  if (Ws.rows() != V.rows() || Wn.rows() != V.rows()) {
    throw std::invalid_argument("wiener_mask: dictionaries " + Ws.shape_string() + " and " +
                                Wn.shape_string() + " do not match " +
                                std::to_string(V.rows()) + " bins");
  }
  const Matrix W = hconcat(Ws, Wn);
  const Matrix H = solve_activations(V, W, iterations, seed).H;
  const Matrix speech = matmul(Ws, row_block(H, 0, Ws.cols()));
  const Matrix noise = matmul(Wn, row_block(H, Ws.cols(), Wn.cols()));
  Matrix mask(V.rows(), V.cols());
  auto s = speech.data();
  auto nz = noise.data();
  auto mk = mask.data();
  for (std::size_t k = 0; k < mk.size(); ++k) mk[k] = s[k] / (s[k] + nz[k] + kMaskFloor);
  return mask;
}

inline std::vector<double> enhance(std::span<const double> noisy, const Matrix& Ws,
                                   const Matrix& Wn, const EnhanceConfig& config) {
  Spectrogram spec = stft(noisy, config.stft);
  if (Ws.rows() != config.stft.bins() || Wn.rows() != config.stft.bins()) {
    throw std::invalid_argument("enhance: dictionaries have " + std::to_string(Ws.rows()) +
                                " and " + std::to_string(Wn.rows()) + " rows, STFT has " +
                                std::to_string(config.stft.bins()) + " bins");
  }
  const Matrix mask = wiener_mask(spec.magnitudes, Ws, Wn, config.iterations, config.seed);
  auto mag = spec.magnitudes.data();
  auto mk = mask.data();
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] *= mk[k];
  return istft(spec);
}

}  // namespace gammadict
