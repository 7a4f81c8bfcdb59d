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

// gammadict command-line front end.
//
//   gammadict train    --input X.csv (--model-out m.json | --algo nmf --w-out W.csv --h-out H.csv)
//   gammadict synth    emg|spectra --out-dir DIR
//   gammadict extract  --model m.json --input X.csv --out Z.csv [--mode mean|sample]
//   gammadict enhance  --noisy in.wav --dict-speech Ws.csv --dict-noise Wn.csv --out out.wav
//   gammadict evaluate --ref A --est B --metric vaf|sisdr|dictmatch
//
// Every subcommand accepts --config FILE (lines of `key = value`, `#`
// comments, keys are long flag names) and --json. Values resolve as
// built-in defaults < GAMMADICT_SEED (seed only) < config file < flags.
// Exit codes: 0 success, 1 usage, invalid argument or other failure, 2 I/O or
// file format, 3 numeric failure (NaN or infinity).

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gammadict/gammadict.hpp"
#include "json.hpp"

namespace {

using namespace gammadict;
using nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kNumeric = 3 };

class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void emit_json(const json& j) { std::cout << j.dump() << '\n'; }

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Turns a config file into flag tokens. Multi-value entries (`hidden = 32 32`
// or `hidden = 32, 32`) become `--hidden 32 32`.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw usage_error("config " + path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") {
      throw usage_error("config " + path + ":" + std::to_string(line_no) + ": invalid key '" + key + "'");
    }
    for (char& c : value)
      if (c == ',') c = ' ';
    std::istringstream parts(value);
    std::vector<std::string> values;
    for (std::string p; parts >> p;) values.push_back(p);
    if (values.size() == 1) {
      out.push_back("--" + key + "=" + values[0]);
    } else {
      out.push_back("--" + key);
      out.insert(out.end(), values.begin(), values.end());
    }
  }
  return out;
}

std::uint64_t env_seed() {
  const char* s = std::getenv("GAMMADICT_SEED");
  if (s == nullptr || *s == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != std::string(s).size() || std::string(s).front() == '-') throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw usage_error(std::string("GAMMADICT_SEED is not an unsigned integer: '") + s + "'");
  }
}

struct Common {
  std::string config;
  bool json = false;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--config", common.config, "key = value file; flags given on the command line win");
  cmd->add_flag("--json", common.json, "print a one-line JSON summary instead of tables");
}

std::vector<double> read_signal(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".wav") return read_wav(path).samples;
  const Matrix m = read_csv_matrix(path);
  return {m.data().begin(), m.data().end()};
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string input, model_out, dict_out, w_out, h_out;
  std::string algo = "vae-nmf";
  std::string objective = "frobenius";
  std::size_t rank = 4;
  std::vector<std::size_t> hidden{32, 32};
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  double weight_decay = 5e-4;
  double gamma = 10.0;
  double prior_alpha = 2.0;
  std::size_t epochs = 200;
  std::size_t iters = 500;
  std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a, const Common& common) {
  const Matrix X = read_csv_matrix(a.input);
  if (a.rank < 1) throw std::invalid_argument("--rank must be >= 1");
  if (a.algo == "nmf") {
    if (a.w_out.empty() || a.h_out.empty()) throw usage_error("--algo nmf needs --w-out and --h-out");
    const auto objective = a.objective == "kl" ? NmfObjective::kl : NmfObjective::frobenius;
    const auto res = nmf(X, a.rank, a.iters, a.seed, objective);
    if (!all_finite(res.W.data()) || !all_finite(res.H.data())) throw numeric_error("nmf produced non-finite factors");
    write_csv_matrix(a.w_out, res.W);
    write_csv_matrix(a.h_out, res.H);
    const double v = vaf(X, matmul(res.W, res.H)).global;
    if (common.json) {
      emit_json({{"command", "train"}, {"algo", "nmf"}, {"objective", a.objective}, {"rank", a.rank},
                 {"iters", a.iters}, {"seed", a.seed}, {"final_objective", res.objective_trace.back()},
                 {"vaf", v}});
    } else {
      std::cout << "nmf " << a.objective << " rank " << a.rank << " iters " << a.iters << "\n"
                << "objective " << g6(res.objective_trace.front()) << " -> "
                << g6(res.objective_trace.back()) << "\nvaf " << g6(v) << "\n";
    }
    return kOk;
  }
  if (a.model_out.empty()) throw usage_error("--algo vae-nmf needs --model-out");
  TrainConfig c;
  c.rank = a.rank;
  c.hidden1 = a.hidden[0];
  c.hidden2 = a.hidden[1];
  c.batch_size = a.batch_size;
  c.learning_rate = a.learning_rate;
  c.weight_decay = a.weight_decay;
  c.gamma = a.gamma;
  c.prior_alpha = a.prior_alpha;
  c.epochs = a.epochs;
  c.seed = a.seed;
  c.validate();
  if (!common.json) std::cout << "epoch\trecon\tkl\tpenalty\ttotal\n";
  const auto res = train(X, c, [&](std::size_t epoch, const LossBreakdown& l) {
    if (!common.json) {
      std::cout << epoch + 1 << '\t' << g6(l.recon) << '\t' << g6(l.kl) << '\t' << g6(l.penalty)
                << '\t' << g6(l.total) << '\n';
    }
  });
  save_model(a.model_out, res.model, c);
  const auto dict = export_dictionary(res.model);
  if (!a.dict_out.empty()) write_csv_matrix(a.dict_out, dict.W);
  const double v = vaf(X, matmul(dict.W, infer_activations(res.model, X, ActivationMode::mean))).global;
  const auto& last = res.history.epochs.back();
  if (common.json) {
    emit_json({{"command", "train"}, {"algo", "vae-nmf"}, {"rank", c.rank}, {"epochs", c.epochs},
               {"seed", c.seed}, {"final_loss", last.total}, {"final_recon", last.recon},
               {"final_kl", last.kl}, {"final_penalty", last.penalty},
               {"negative_mass", dict.clamped_mass}, {"vaf", v}, {"model", a.model_out}});
  } else {
    std::cout << "negative mass " << g6(dict.clamped_mass) << "\nvaf " << g6(v) << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string kind;
  std::string out_dir;
  std::uint64_t seed = 0;
  SyntheticSpec emg;
  SpectraSpec spectra;
  std::size_t spectra_rank = 40;
  std::size_t frame = 512;
  std::size_t hop = 256;
  std::uint32_t sample_rate = 8000;
};

int run_synth(SynthArgs a, const Common& common) {
  std::filesystem::create_directories(a.out_dir);
  const auto file = [&](const char* name) { return (std::filesystem::path(a.out_dir) / name).string(); };
  std::vector<std::string> written;
  if (a.kind == "emg") {
    a.emg.seed = a.seed;
    const auto d = synth_emg(a.emg);
    write_csv_matrix(file("X.csv"), d.X);
    write_csv_matrix(file("W_true.csv"), d.W_true);
    write_csv_matrix(file("H_true.csv"), d.H_true);
    written = {file("X.csv"), file("W_true.csv"), file("H_true.csv")};
    if (!common.json) std::cout << "emg X " << d.X.shape_string() << "\n";
  } else {
    a.spectra.seed = a.seed;
    a.spectra.rank = a.spectra_rank;
    a.spectra.sample_rate = a.sample_rate;
    a.spectra.stft = StftConfig{a.frame, a.hop, static_cast<double>(a.sample_rate)};
    const auto d = synth_spectra(a.spectra);
    write_wav(file("mix.wav"), d.mix, a.sample_rate);
    write_wav(file("speech.wav"), d.speech, a.sample_rate);
    write_wav(file("noise.wav"), d.noise, a.sample_rate);
    write_csv_matrix(file("dict_speech.csv"), d.dict_speech);
    write_csv_matrix(file("dict_noise.csv"), d.dict_noise);
    write_csv_matrix(file("spec_speech.csv"), d.spec_speech);
    write_csv_matrix(file("spec_noise.csv"), d.spec_noise);
    written = {file("mix.wav"), file("speech.wav"), file("noise.wav"), file("dict_speech.csv"),
               file("dict_noise.csv"), file("spec_speech.csv"), file("spec_noise.csv")};
    if (!common.json) {
      std::cout << "spectra " << d.mix.size() << " samples, spectrogram " << d.spec_speech.shape_string()
                << ", oracle rank " << a.spectra_rank << "\n";
    }
  }
  if (common.json) {
    emit_json({{"command", "synth"}, {"kind", a.kind}, {"seed", a.seed}, {"files", written}});
  } else {
    for (const auto& w : written) std::cout << "wrote " << w << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
  std::string model, input, out, dict_out, recon_out;
  std::string mode = "mean";
  std::uint64_t seed = 0;
};

int run_extract(const ExtractArgs& a, const Common& common) {
  const auto file = load_model(a.model);
  const Matrix X = read_csv_matrix(a.input);
  Rng rng(a.seed);
  const auto mode = a.mode == "sample" ? ActivationMode::sample : ActivationMode::mean;
  const Matrix Z = infer_activations(file.model, X, mode, &rng);
  if (!all_finite(Z.data())) throw numeric_error("extract: non-finite activations");
  write_csv_matrix(a.out, Z);
  const auto dict = export_dictionary(file.model);
  if (!a.dict_out.empty()) write_csv_matrix(a.dict_out, dict.W);
  if (!a.recon_out.empty()) write_csv_matrix(a.recon_out, matmul(dict.W, Z));
  const double v = vaf(X, matmul(dict.W, Z)).global;
  if (common.json) {
    emit_json({{"command", "extract"}, {"mode", a.mode}, {"rows", Z.rows()}, {"cols", Z.cols()},
               {"vaf", v}, {"out", a.out}});
  } else {
    std::cout << "activations " << Z.shape_string() << " (" << a.mode << ")\nvaf " << g6(v) << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// enhance

struct EnhanceArgs {
  std::string noisy, dict_speech, dict_noise, out, reference;
  std::size_t frame = 512;
  std::size_t hop = 256;
  std::size_t iters = 200;
  std::uint64_t seed = 0;
};

int run_enhance(const EnhanceArgs& a, const Common& common) {
  const auto noisy = read_wav(a.noisy);
  const Matrix Ws = read_csv_matrix(a.dict_speech);
  const Matrix Wn = read_csv_matrix(a.dict_noise);
  const EnhanceConfig ec{StftConfig{a.frame, a.hop, static_cast<double>(noisy.sample_rate)}, a.iters, a.seed};
  const auto out = enhance(noisy.samples, Ws, Wn, ec);
  if (!all_finite(out)) throw numeric_error("enhance: non-finite output");
  write_wav(a.out, out, noisy.sample_rate);
  json summary{{"command", "enhance"}, {"samples", out.size()}, {"out", a.out}};
  std::optional<double> before, after;
  if (!a.reference.empty()) {
    const auto ref = read_wav(a.reference).samples;
    before = si_sdr(ref, noisy.samples);
    after = si_sdr(ref, out);
    summary["sisdr_in"] = *before;
    summary["sisdr_out"] = *after;
    summary["improvement"] = *after - *before;
  }
  if (common.json) {
    emit_json(summary);
  } else {
    std::cout << "enhanced " << out.size() << " samples\n";
    if (before) {
      std::cout << "si-sdr in " << g6(*before) << " dB\nsi-sdr out " << g6(*after)
                << " dB\nimprovement " << g6(*after - *before) << " dB\n";
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string ref, est, metric;
};

int run_evaluate(const EvaluateArgs& a, const Common& common) {
  double value = 0.0;
  json summary{{"command", "evaluate"}, {"metric", a.metric}};
  if (a.metric == "sisdr") {
    value = si_sdr(read_signal(a.ref), read_signal(a.est));
  } else if (a.metric == "vaf") {
    const auto rep = vaf(read_csv_matrix(a.ref), read_csv_matrix(a.est));
    value = rep.global;
    summary["per_channel"] = rep.per_channel;
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  } else {
    const auto m = match_dictionaries(read_csv_matrix(a.est), read_csv_matrix(a.ref));
    value = m.score;
    summary["assignment"] = m.assignment;
    for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
  }
  summary["value"] = value;
  if (common.json) {
    emit_json(summary);
  } else {
    std::cout << a.metric << " " << g6(value) << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int dispatch(int argc, char** argv) {
  CLI::App app{"gammadict: nonnegative dictionary learning with a Gamma-latent VAE"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gammadict 1.0.0");

  const std::uint64_t default_seed = env_seed();
  Common common;

  TrainArgs ta;
  ta.seed = default_seed;
  auto* train_cmd = app.add_subcommand("train", "learn a dictionary from a CSV matrix (columns are samples)");
  add_common(train_cmd, common);
  train_cmd->add_option("--input", ta.input, "data matrix CSV, m x n, nonnegative")->required();
  train_cmd->add_option("--algo", ta.algo, "vae-nmf or nmf")->check(CLI::IsMember({"vae-nmf", "nmf"}))->capture_default_str();
  train_cmd->add_option("--model-out", ta.model_out, "model JSON (vae-nmf)");
  train_cmd->add_option("--dict-out", ta.dict_out, "exported nonnegative dictionary CSV (vae-nmf)");
  train_cmd->add_option("--w-out", ta.w_out, "W CSV (nmf)");
  train_cmd->add_option("--h-out", ta.h_out, "H CSV (nmf)");
  train_cmd->add_option("--objective", ta.objective, "nmf objective")->check(CLI::IsMember({"frobenius", "kl"}))->capture_default_str();
  train_cmd->add_option("--rank", ta.rank, "dictionary size r")->capture_default_str();
  train_cmd->add_option("--hidden", ta.hidden, "encoder widths")->expected(2)->capture_default_str();
  train_cmd->add_option("--batch-size", ta.batch_size)->capture_default_str();
  train_cmd->add_option("--lr", ta.learning_rate, "Adam step size")->capture_default_str();
  train_cmd->add_option("--weight-decay", ta.weight_decay)->capture_default_str();
  train_cmd->add_option("--gamma", ta.gamma, "negative-weight penalty")->capture_default_str();
  train_cmd->add_option("--prior-alpha", ta.prior_alpha, "Gamma prior shape")->capture_default_str();
  train_cmd->add_option("--epochs", ta.epochs)->capture_default_str();
  train_cmd->add_option("--iters", ta.iters, "nmf iterations")->capture_default_str();
  train_cmd->add_option("--seed", ta.seed)->capture_default_str();

  SynthArgs sa;
  sa.seed = default_seed;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset");
  add_common(synth_cmd, common);
  synth_cmd->add_option("kind", sa.kind, "emg or spectra")->required()->check(CLI::IsMember({"emg", "spectra"}));
  synth_cmd->add_option("--out-dir", sa.out_dir)->required();
  synth_cmd->add_option("--seed", sa.seed)->capture_default_str();
  synth_cmd->add_option("--channels", sa.emg.channels, "emg: m")->capture_default_str();
  synth_cmd->add_option("--rank", sa.emg.rank, "emg: true rank")->capture_default_str();
  synth_cmd->add_option("--samples", sa.emg.samples, "emg: n")->capture_default_str();
  synth_cmd->add_option("--smoothing", sa.emg.smoothing, "emg: moving-average span")->capture_default_str();
  synth_cmd->add_option("--noise", sa.emg.noise, "emg: sigma")->capture_default_str();
  synth_cmd->add_option("--amplitude", sa.emg.amplitude, "emg: mean activation")->capture_default_str();
  synth_cmd->add_option("--dict-rank", sa.spectra_rank, "spectra: oracle dictionary rank per source")->capture_default_str();
  synth_cmd->add_option("--duration", sa.spectra.duration_s, "spectra: seconds")->capture_default_str();
  synth_cmd->add_option("--sample-rate", sa.sample_rate, "spectra: Hz")->capture_default_str();
  synth_cmd->add_option("--tones", sa.spectra.tones_per_source, "spectra: tones per source")->capture_default_str();
  synth_cmd->add_option("--nmf-iters", sa.spectra.nmf_iterations, "spectra: oracle NMF iterations")->capture_default_str();
  synth_cmd->add_option("--frame", sa.frame, "spectra: STFT frame length")->capture_default_str();
  synth_cmd->add_option("--hop", sa.hop, "spectra: STFT hop")->capture_default_str();

  ExtractArgs xa;
  xa.seed = default_seed;
  auto* extract_cmd = app.add_subcommand("extract", "infer activations with a trained model");
  add_common(extract_cmd, common);
  extract_cmd->add_option("--model", xa.model)->required();
  extract_cmd->add_option("--input", xa.input)->required();
  extract_cmd->add_option("--out", xa.out, "activations CSV, r x n")->required();
  extract_cmd->add_option("--mode", xa.mode)->check(CLI::IsMember({"mean", "sample"}))->capture_default_str();
  extract_cmd->add_option("--dict-out", xa.dict_out, "exported nonnegative dictionary CSV");
  extract_cmd->add_option("--recon-out", xa.recon_out, "reconstruction W Z CSV");
  extract_cmd->add_option("--seed", xa.seed, "sample mode")->capture_default_str();

  EnhanceArgs ea;
  ea.seed = default_seed;
  auto* enhance_cmd = app.add_subcommand("enhance", "Wiener-mask enhancement with two dictionaries");
  add_common(enhance_cmd, common);
  enhance_cmd->add_option("--noisy", ea.noisy, "PCM16 mono WAV")->required();
  enhance_cmd->add_option("--dict-speech", ea.dict_speech)->required();
  enhance_cmd->add_option("--dict-noise", ea.dict_noise)->required();
  enhance_cmd->add_option("--out", ea.out)->required();
  enhance_cmd->add_option("--reference", ea.reference, "clean WAV; prints SI-SDR before and after");
  enhance_cmd->add_option("--frame", ea.frame)->capture_default_str();
  enhance_cmd->add_option("--hop", ea.hop)->capture_default_str();
  enhance_cmd->add_option("--iters", ea.iters, "activation solver iterations")->capture_default_str();
  enhance_cmd->add_option("--seed", ea.seed)->capture_default_str();

  EvaluateArgs va;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "compare a reference and an estimate");
  add_common(evaluate_cmd, common);
  evaluate_cmd->add_option("--ref", va.ref)->required();
  evaluate_cmd->add_option("--est", va.est)->required();
  evaluate_cmd->add_option("--metric", va.metric)->required()->check(CLI::IsMember({"vaf", "sisdr", "dictmatch"}));

  // Splice config-file tokens in right after the subcommand name so that
  // later command-line flags take precedence.
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!app.get_subcommand_no_throw(args[i])) continue;
    std::string config_path;
    for (std::size_t k = i + 1; k < args.size(); ++k) {
      if (args[k] == "--config" && k + 1 < args.size()) config_path = args[k + 1];
      if (args[k].rfind("--config=", 0) == 0) config_path = args[k].substr(9);
    }
    if (!config_path.empty()) {
      const auto tokens = config_tokens(config_path);
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(i) + 1, tokens.begin(), tokens.end());
    }
    break;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (train_cmd->parsed()) return run_train(ta, common);
  if (synth_cmd->parsed()) return run_synth(sa, common);
  if (extract_cmd->parsed()) return run_extract(xa, common);
  if (enhance_cmd->parsed()) return run_enhance(ea, common);
  return run_evaluate(va, common);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const gammadict::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const gammadict::numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
