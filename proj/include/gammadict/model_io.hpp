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

// Versioned JSON persistence for VaeNmfModel. Schema: docs/model_schema.json.
//
// Doubles are emitted in shortest round-trip form, so load(save(m)) == m
// bit for bit.

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gammadict/errors.hpp"
#include "gammadict/gamma_vae.hpp"
#include "gammadict/matrix.hpp"
#include "gammadict/trainer.hpp"

namespace gammadict {

inline constexpr const char* kModelFormat = "gammadict.vae_nmf";
inline constexpr int kModelVersion = 1;

struct ModelFile {
  VaeNmfModel model;
  std::optional<TrainConfig> train_config;
};

namespace detail {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& A) {
  return json{{"rows", A.rows()},
              {"cols", A.cols()},
              {"data", std::vector<double>(A.data().begin(), A.data().end())}};
}

inline const json& require_field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw parse_error("model file: missing field '" + where + key + "'");
  }
  return j.at(key);
}

template <class T>
T field_as(const json& j, const std::string& key, const std::string& where) {
  const json& v = require_field(j, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw parse_error("model file: field '" + where + key + "' has the wrong type");
  }
}

inline Matrix matrix_from_json(const json& j, const std::string& where) {
  const auto rows = field_as<std::size_t>(j, "rows", where);
  const auto cols = field_as<std::size_t>(j, "cols", where);
  auto data = field_as<std::vector<double>>(j, "data", where);
  if (data.size() != rows * cols) {
    throw parse_error("model file: field '" + where + "data' has " + std::to_string(data.size()) +
                      " values, expected " + std::to_string(rows * cols));
  }
  return Matrix(rows, cols, std::move(data));
}

inline json layer_to_json(const DenseLayer& l) {
  return json{{"weights", matrix_to_json(l.weights)}, {"bias", l.bias}};
}

inline DenseLayer layer_from_json(const json& j, const std::string& where) {
  DenseLayer l;
  l.weights = matrix_from_json(require_field(j, "weights", where), where + "weights.");
  l.bias = field_as<std::vector<double>>(j, "bias", where);
  return l;
}

inline json config_to_json(const TrainConfig& c) {
  return json{{"rank", c.rank},
              {"hidden", {c.hidden1, c.hidden2}},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"weight_decay", c.weight_decay},
              {"gamma", c.gamma},
              {"prior_alpha", c.prior_alpha},
              {"epochs", c.epochs},
              {"seed", c.seed}};
}

inline TrainConfig config_from_json(const json& j) {
  const std::string w = "train_config.";
  TrainConfig c;
  c.rank = field_as<std::size_t>(j, "rank", w);
  const auto hidden = field_as<std::vector<std::size_t>>(j, "hidden", w);
  if (hidden.size() != 2) throw parse_error("model file: field 'train_config.hidden' must have 2 entries");
  c.hidden1 = hidden[0];
  c.hidden2 = hidden[1];
  c.batch_size = field_as<std::size_t>(j, "batch_size", w);
  c.learning_rate = field_as<double>(j, "learning_rate", w);
  c.weight_decay = field_as<double>(j, "weight_decay", w);
  c.gamma = field_as<double>(j, "gamma", w);
  c.prior_alpha = field_as<double>(j, "prior_alpha", w);
  c.epochs = field_as<std::size_t>(j, "epochs", w);
  c.seed = field_as<std::uint64_t>(j, "seed", w);
  return c;
}

}  // namespace detail

inline nlohmann::json model_to_json(const VaeNmfModel& model,
                                    const std::optional<TrainConfig>& config = std::nullopt) {
  using detail::json;
  json j{{"format", kModelFormat},
         {"version", kModelVersion},
         {"input_dim", model.input_dim()},
         {"rank", model.rank()},
         {"hidden", {model.hidden1(), model.hidden2()}},
         {"prior_alpha", model.prior_alpha},
         {"encoder",
          {{"layer1", detail::layer_to_json(model.encoder.layer1)},
           {"layer2", detail::layer_to_json(model.encoder.layer2)},
           {"alpha_head", detail::layer_to_json(model.encoder.alpha_head)}}},
         {"decoder", {{"W", detail::matrix_to_json(model.decoder.W)}}}};
  if (config) j["train_config"] = detail::config_to_json(*config);
  return j;
}

inline ModelFile model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw parse_error("model file: top level must be an object");
  const auto format = detail::field_as<std::string>(j, "format", "");
  if (format != kModelFormat) {
    throw parse_error("model file: field 'format' is '" + format + "', expected '" +
                      kModelFormat + "'");
  }
  const auto version = detail::field_as<int>(j, "version", "");
  if (version != kModelVersion) {
    throw parse_error("model file: field 'version' is " + std::to_string(version) +
                      ", this build reads version " + std::to_string(kModelVersion));
  }
  ModelFile out;
  const auto& enc = detail::require_field(j, "encoder", "");
  out.model.encoder.layer1 = detail::layer_from_json(detail::require_field(enc, "layer1", "encoder."), "encoder.layer1.");
  out.model.encoder.layer2 = detail::layer_from_json(detail::require_field(enc, "layer2", "encoder."), "encoder.layer2.");
  out.model.encoder.alpha_head =
      detail::layer_from_json(detail::require_field(enc, "alpha_head", "encoder."), "encoder.alpha_head.");
  const auto& dec = detail::require_field(j, "decoder", "");
  out.model.decoder.W = detail::matrix_from_json(detail::require_field(dec, "W", "decoder."), "decoder.W.");
  out.model.prior_alpha = detail::field_as<double>(j, "prior_alpha", "");

  const auto input_dim = detail::field_as<std::size_t>(j, "input_dim", "");
  const auto rank = detail::field_as<std::size_t>(j, "rank", "");
  const auto hidden = detail::field_as<std::vector<std::size_t>>(j, "hidden", "");
  if (input_dim != out.model.input_dim() || rank != out.model.rank() || hidden.size() != 2 ||
      hidden[0] != out.model.hidden1() || hidden[1] != out.model.hidden2()) {
    throw parse_error("model file: fields 'input_dim'/'rank'/'hidden' disagree with the parameter shapes");
  }
  try {
    validate_model(out.model);
  } catch (const std::exception& e) {
    throw parse_error(std::string("model file: ") + e.what());
  }
  if (j.contains("train_config")) out.train_config = detail::config_from_json(j.at("train_config"));
  return out;
}

inline void save_model(const std::string& path, const VaeNmfModel& model,
                       const std::optional<TrainConfig>& config = std::nullopt) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << model_to_json(model, config).dump(1) << '\n';
  if (!out) throw io_error("write failed for '" + path + "'");
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(path + ": malformed or truncated model file: " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

}  // namespace gammadict
