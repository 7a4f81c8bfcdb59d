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

// 16-bit PCM mono RIFF/WAVE reading and writing. Samples map to doubles as
// s / 32768, so reading yields values in [-1, 1) and writing a value read
// from a file gives back the same integer.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "gammadict/errors.hpp"

namespace gammadict {

struct WavData {
  std::vector<double> samples;
  std::uint32_t sample_rate = 16000;
};

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline void put_u16le(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace detail

inline WavData decode_wav(std::span<const unsigned char> bytes, const std::string& name = "wav") {
  if (bytes.size() < 12 || !std::equal(bytes.begin(), bytes.begin() + 4, "RIFF") ||
      !std::equal(bytes.begin() + 8, bytes.begin() + 12, "WAVE")) {
    throw parse_error(name + ": not a RIFF/WAVE file");
  }
  WavData wav;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t size = detail::read_u32le(hdr + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw parse_error(name + ": truncated chunk");
    if (std::equal(hdr, hdr + 4, "fmt ")) {
      if (size < 16) throw parse_error(name + ": fmt chunk too short");
      const std::uint16_t format = detail::read_u16le(bytes.data() + body);
      const std::uint16_t channels = detail::read_u16le(bytes.data() + body + 2);
      const std::uint16_t bits = detail::read_u16le(bytes.data() + body + 14);
      if (format != 1) {
        throw parse_error(name + ": unsupported codec (format tag " + std::to_string(format) +
                          "); only PCM is supported");
      }
      if (channels != 1) {
        throw parse_error(name + ": " + std::to_string(channels) +
                          " channels; only mono is supported");
      }
      if (bits != 16) {
        throw parse_error(name + ": " + std::to_string(bits) +
                          "-bit samples; only 16-bit PCM is supported");
      }
      wav.sample_rate = detail::read_u32le(bytes.data() + body + 4);
      have_fmt = true;
    } else if (std::equal(hdr, hdr + 4, "data")) {
      if (!have_fmt) throw parse_error(name + ": data chunk before fmt chunk");
      wav.samples.resize(size / 2);
      for (std::size_t i = 0; i < wav.samples.size(); ++i) {
        const auto s = static_cast<std::int16_t>(detail::read_u16le(bytes.data() + body + 2 * i));
        wav.samples[i] = static_cast<double>(s) / 32768.0;
      }
      return wav;
    }
    pos = body + size + (size & 1);
  }
  throw parse_error(name + ": no data chunk");
}

inline std::vector<unsigned char> encode_wav(std::span<const double> samples,
                                             std::uint32_t sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32le(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_u32le(out, 16);
  detail::put_u16le(out, 1);  // PCM
  detail::put_u16le(out, 1);  // mono
  detail::put_u32le(out, sample_rate);
  detail::put_u32le(out, sample_rate * 2);
  detail::put_u16le(out, 2);
  detail::put_u16le(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_u32le(out, data_bytes);
  for (double x : samples) {
    // Saturate; NaN maps to 0.
    double v = std::isnan(x) ? 0.0 : std::round(x * 32768.0);
    v = std::clamp(v, -32768.0, 32767.0);
    detail::put_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

inline WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  return decode_wav(bytes, path);
}

inline void write_wav(const std::string& path, std::span<const double> samples,
                      std::uint32_t sample_rate) {
  const auto bytes = encode_wav(samples, sample_rate);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace gammadict
