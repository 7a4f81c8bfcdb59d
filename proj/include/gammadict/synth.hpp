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

// Synthetic data for the two benchmark experiments: EMG-like nonnegative
// mixtures with a known synergy dictionary, and two-source audio whose
// sources occupy disjoint frequency bands.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "gammadict/matrix.hpp"
#include "gammadict/nmf.hpp"
#include "gammadict/random.hpp"
#include "gammadict/signal.hpp"

namespace gammadict {

struct SyntheticSpec {
  std::size_t channels = 10;   // m
  std::size_t rank = 4;        // r
  std::size_t samples = 2000;  // n
  std::size_t smoothing = 20;  // moving-average span of the activations
  double noise = 0.05;         // sigma of the rectified additive noise
  double amplitude = 5.0;      // mean of every activation row
  std::uint64_t seed = 0;

  void validate() const {
    if (channels < 1 || rank < 1 || samples < 1 || smoothing < 1) {
      throw std::invalid_argument("SyntheticSpec: all counts must be >= 1");
    }
    if (rank > channels) {
      throw std::invalid_argument("SyntheticSpec: rank " + std::to_string(rank) +
                                  " exceeds channel count " + std::to_string(channels));
    }
    if (!(noise >= 0.0)) throw std::invalid_argument("SyntheticSpec: noise must be >= 0");
    if (!(amplitude > 0.0)) throw std::invalid_argument("SyntheticSpec: amplitude must be > 0");
  }
};

struct SyntheticEmg {
  Matrix X;       // m x n
  Matrix W_true;  // m x r
  Matrix H_true;  // r x n
};

// W_true: each channel has one primary synergy (weight in [0.5, 1]) taken
// round-robin over a random channel order, plus occasional weak cross-talk
// (weight in [0.05, 0.25], probability 0.15). H_true: thresholded Gaussian
// noise max(0, xi - 1.5) smoothed by a centered moving average, each row
// rescaled to mean `amplitude`. X = W H + sigma |N(0, 1)|.
inline SyntheticEmg synth_emg(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t m = spec.channels, r = spec.rank, n = spec.samples;

  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  for (std::size_t i = m - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  Matrix W(m, r);
  for (std::size_t k = 0; k < m; ++k) W(order[k], k % r) = rng.uniform(0.5, 1.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < r; ++j)
      if (W(i, j) == 0.0 && rng.uniform() < 0.15) W(i, j) = rng.uniform(0.05, 0.25);

  Matrix H(r, n);
  const std::size_t span = spec.smoothing;
  std::vector<double> raw(n);
  for (std::size_t a = 0; a < r; ++a) {
    for (double& v : raw) v = std::max(0.0, rng.normal() - 1.5);
    double mean = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t lo = t >= span / 2 ? t - span / 2 : 0;
      const std::size_t hi = std::min(n, lo + span);
      double s = 0.0;
      for (std::size_t k = lo; k < hi; ++k) s += raw[k];
      H(a, t) = s / static_cast<double>(hi - lo);
      mean += H(a, t);
    }
    mean /= static_cast<double>(n);
    if (mean == 0.0) {
      // Vanishingly unlikely; keep the row active rather than dividing by 0.
      for (std::size_t t = 0; t < n; ++t) H(a, t) = spec.amplitude;
    } else {
      for (std::size_t t = 0; t < n; ++t) H(a, t) *= spec.amplitude / mean;
    }
  }

  Matrix X = matmul(W, H);
  for (double& v : X.data()) v = std::max(0.0, v + spec.noise * std::abs(rng.normal()));
  return {std::move(X), std::move(W), std::move(H)};
}

struct FrequencyBand {
  double low_hz;
  double high_hz;
};

struct SpectraSpec {
  double sample_rate = 8000.0;
  double duration_s = 4.0;
  std::size_t tones_per_source = 6;
  FrequencyBand speech_band{200.0, 1400.0};
  FrequencyBand noise_band{2000.0, 3400.0};
  std::size_t rank = 40;  // per-source oracle dictionary rank
  std::size_t nmf_iterations = 300;
  StftConfig stft{512, 256, 8000.0};
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sample_rate > 0.0) || !(duration_s > 0.0)) {
      throw std::invalid_argument("SpectraSpec: sample rate and duration must be > 0");
    }
    if (tones_per_source < 1 || rank < 1 || nmf_iterations < 1) {
      throw std::invalid_argument("SpectraSpec: counts must be >= 1");
    }
    for (const auto& b : {speech_band, noise_band}) {
      if (!(b.low_hz > 0.0) || !(b.high_hz > b.low_hz) || b.high_hz >= sample_rate / 2.0) {
        throw std::invalid_argument("SpectraSpec: bands must satisfy 0 < low < high < Nyquist");
      }
    }
    if (!(speech_band.high_hz < noise_band.low_hz || noise_band.high_hz < speech_band.low_hz)) {
      throw std::invalid_argument("SpectraSpec: source bands must be disjoint");
    }
    stft.validate();
    if (stft.sample_rate != sample_rate) {
      throw std::invalid_argument("SpectraSpec: STFT sample rate differs from signal rate");
    }
    if (static_cast<std::size_t>(duration_s * sample_rate) < stft.frame_length) {
      throw std::invalid_argument("SpectraSpec: signal shorter than one STFT frame");
    }
  }
};

struct SyntheticSpectra {
  std::vector<double> mix;
  std::vector<double> speech;  // target source
  std::vector<double> noise;   // interfering source
  Matrix dict_speech;          // bins x rank, NMF of |STFT(speech)|
  Matrix dict_noise;           // bins x rank, NMF of |STFT(noise)|
  Matrix spec_speech;          // |STFT(speech)|
  Matrix spec_noise;           // |STFT(noise)|
};

namespace detail {

// Sum of tones at random frequencies in `band`, each amplitude-modulated by
// 0.2 + 0.8 (0.5 + 0.5 sin(2 pi f_m t + phi)) with f_m in [0.5, 3] Hz.
inline std::vector<double> banded_source(std::size_t n, double rate, std::size_t tones,
                                         FrequencyBand band, Rng& rng) {
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < tones; ++k) {
    const double f = rng.uniform(band.low_hz, band.high_hz);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double fm = rng.uniform(0.5, 3.0);
    const double phase_m = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double gain = rng.uniform(0.5, 1.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double time = static_cast<double>(t) / rate;
      const double env = 0.2 + 0.8 * (0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * fm * time + phase_m));
      out[t] += gain * env * std::sin(2.0 * std::numbers::pi * f * time + phase);
    }
  }
  return out;
}

inline double energy(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace detail

// Two sources mixed at 0 dB and peak-normalized to 0.9 (all three signals
// share one scale factor, so the 0 dB relation is preserved).
inline SyntheticSpectra synth_spectra(const SpectraSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto n = static_cast<std::size_t>(spec.duration_s * spec.sample_rate);
  SyntheticSpectra out;
  out.speech = detail::banded_source(n, spec.sample_rate, spec.tones_per_source, spec.speech_band, rng);
  out.noise = detail::banded_source(n, spec.sample_rate, spec.tones_per_source, spec.noise_band, rng);
  const double gain = std::sqrt(detail::energy(out.speech) / detail::energy(out.noise));
  for (double& v : out.noise) v *= gain;
  out.mix.resize(n);
  double peak = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    out.mix[t] = out.speech[t] + out.noise[t];
    peak = std::max(peak, std::abs(out.mix[t]));
  }
  const double scale = 0.9 / peak;
  for (auto* sig : {&out.mix, &out.speech, &out.noise})
    for (double& v : *sig) v *= scale;

  out.spec_speech = stft(out.speech, spec.stft).magnitudes;
  out.spec_noise = stft(out.noise, spec.stft).magnitudes;
  const std::uint64_t nmf_seed = rng.next();
  out.dict_speech = nmf(out.spec_speech, spec.rank, spec.nmf_iterations, nmf_seed).W;
  out.dict_noise = nmf(out.spec_noise, spec.rank, spec.nmf_iterations, nmf_seed + 1).W;
  return out;
}

}  // namespace gammadict
