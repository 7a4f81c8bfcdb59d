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

// Drives the gammadict executable end to end through the shell.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "gammadict/csv.hpp"
#include "gammadict/wav.hpp"
#include "json.hpp"

namespace gammadict {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("gammadict_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // `env` is prepended verbatim, e.g. "GAMMADICT_SEED=5".
  RunResult run(const std::string& args, const std::string& env = "") const {
    const std::string out = path("stdout.txt"), err = path("stderr.txt");
    const std::string cmd = "cd '" + dir_.string() + "' && env -u GAMMADICT_SEED " + env + " '" +
                            GAMMADICT_CLI_PATH + "' " + args + " >'" + out + "' 2>'" + err + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  nlohmann::json run_json(const std::string& args, const std::string& env = "") const {
    const auto r = run(args + " --json", env);
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out).size(), 1u) << r.out;
    return nlohmann::json::parse(r.out);
  }

  void make_emg() const { ASSERT_EQ(run("synth emg --out-dir emg").code, 0); }

  fs::path dir_;
};

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("evaluate --ref a --est b --metric nope").code, 1);
  EXPECT_EQ(run("evaluate --ref a --est b --metric vaf --bogus 3").code, 1);
}

TEST_F(Cli, SynthEmgDefaultShape) {
  make_emg();
  const Matrix X = read_csv_matrix(path("emg/X.csv"));
  EXPECT_EQ(X.rows(), 10u);
  EXPECT_EQ(X.cols(), 2000u);
  EXPECT_TRUE(fs::exists(path("emg/W_true.csv")));
  EXPECT_TRUE(fs::exists(path("emg/H_true.csv")));
}

TEST_F(Cli, SynthIsDeterministicPerSeed) {
  ASSERT_EQ(run("synth emg --out-dir a --seed 3").code, 0);
  ASSERT_EQ(run("synth emg --out-dir b --seed 3").code, 0);
  ASSERT_EQ(run("synth emg --out-dir c --seed 4").code, 0);
  EXPECT_EQ(slurp(path("a/X.csv")), slurp(path("b/X.csv")));
  EXPECT_NE(slurp(path("a/X.csv")), slurp(path("c/X.csv")));
  const std::string small = "--dict-rank 2 --nmf-iters 5 --duration 0.5";
  ASSERT_EQ(run("synth spectra --out-dir s1 " + small).code, 0);
  ASSERT_EQ(run("synth spectra --out-dir s2 " + small).code, 0);
  for (const char* f : {"mix.wav", "speech.wav", "noise.wav", "dict_speech.csv", "dict_noise.csv"}) {
    EXPECT_EQ(slurp(path(std::string("s1/") + f)), slurp(path(std::string("s2/") + f))) << f;
  }
}

TEST_F(Cli, SynthRejectsInvalidSpec) {
  EXPECT_EQ(run("synth emg --out-dir x --rank 11").code, 1);
  EXPECT_EQ(run("synth spectra --out-dir x --hop 300").code, 1);
}

TEST_F(Cli, TrainPrintsOneRowPerEpochAndWritesModel) {
  make_emg();
  const auto r = run("train --input emg/X.csv --model-out m.json --epochs 7");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_GE(rows.size(), 8u);
  EXPECT_EQ(rows[0], "epoch\trecon\tkl\tpenalty\ttotal");
  for (int e = 1; e <= 7; ++e) EXPECT_EQ(rows[static_cast<std::size_t>(e)].rfind(std::to_string(e) + "\t", 0), 0u);
  EXPECT_EQ(rows[8].rfind("negative mass", 0), 0u);
  EXPECT_TRUE(fs::exists(path("m.json")));
}

TEST_F(Cli, TrainIsBitReproducible) {
  make_emg();
  ASSERT_EQ(run("train --input emg/X.csv --model-out a.json --epochs 3 --seed 9").code, 0);
  ASSERT_EQ(run("train --input emg/X.csv --model-out b.json --epochs 3 --seed 9").code, 0);
  ASSERT_EQ(run("train --input emg/X.csv --model-out c.json --epochs 3 --seed 10").code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_NE(slurp(path("a.json")), slurp(path("c.json")));
}

TEST_F(Cli, TrainExitCodes) {
  make_emg();
  const auto missing = run("train --input no_such.csv --model-out m.json");
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("no_such.csv"), std::string::npos) << missing.err;
  EXPECT_EQ(run("train --input emg/X.csv --model-out m.json --rank 0").code, 1);
  EXPECT_EQ(run("train --input emg/X.csv --algo nmf").code, 1);
  EXPECT_EQ(run("train --input emg/X.csv").code, 1);
  std::ofstream(path("bad.csv")) << "1,2\n3\n";
  EXPECT_EQ(run("train --input bad.csv --model-out m.json").code, 2);
  std::ofstream(path("nan.csv")) << "1,2,3\nnan,1,2\n0.5,0.5,0.5\n";
  EXPECT_EQ(run("train --input nan.csv --model-out m.json --rank 1").code, 3);
}

TEST_F(Cli, TrainNmfWritesFactors) {
  make_emg();
  const auto j = run_json("train --input emg/X.csv --algo nmf --w-out W.csv --h-out H.csv --iters 200");
  EXPECT_EQ(j["algo"], "nmf");
  EXPECT_GT(j["vaf"].get<double>(), 90.0);
  EXPECT_EQ(read_csv_matrix(path("W.csv")).cols(), 4u);
  EXPECT_EQ(read_csv_matrix(path("H.csv")).cols(), 2000u);
}

TEST_F(Cli, ConfigFilePrecedence) {
  make_emg();
  std::ofstream(path("run.cfg")) << "# comment line\n"
                                  << "epochs = 3   # trailing comment\n"
                                  << "hidden = 6, 5\n"
                                  << "seed = 21\n\n";
  auto j = run_json("train --config run.cfg --input emg/X.csv --model-out m.json");
  EXPECT_EQ(j["epochs"], 3);
  EXPECT_EQ(j["seed"], 21);
  const auto model = nlohmann::json::parse(slurp(path("m.json")));
  EXPECT_EQ(model["hidden"], nlohmann::json::array({6, 5}));

  j = run_json("train --input emg/X.csv --model-out m.json --epochs 2 --config run.cfg --seed 4");
  EXPECT_EQ(j["epochs"], 2);
  EXPECT_EQ(j["seed"], 4);

  std::ofstream(path("bad.cfg")) << "epochs 3\n";
  EXPECT_EQ(run("train --config bad.cfg --input emg/X.csv --model-out m.json").code, 1);
  std::ofstream(path("unknown.cfg")) << "colour = blue\n";
  EXPECT_EQ(run("train --config unknown.cfg --input emg/X.csv --model-out m.json").code, 1);
  EXPECT_EQ(run("train --config none.cfg --input emg/X.csv --model-out m.json").code, 2);
}

TEST_F(Cli, SeedEnvironmentVariableIsLowestPrecedence) {
  make_emg();
  const std::string base = "train --input emg/X.csv --model-out m.json --epochs 1";
  EXPECT_EQ(run_json(base)["seed"], 0);
  EXPECT_EQ(run_json(base, "GAMMADICT_SEED=17")["seed"], 17);
  EXPECT_EQ(run_json(base + " --seed 3", "GAMMADICT_SEED=17")["seed"], 3);
  std::ofstream(path("s.cfg")) << "seed = 8\n";
  EXPECT_EQ(run_json(base + " --config s.cfg", "GAMMADICT_SEED=17")["seed"], 8);
  EXPECT_EQ(run(base, "GAMMADICT_SEED=abc").code, 1);
}

TEST_F(Cli, ExtractIsDeterministicAndPositive) {
  make_emg();
  ASSERT_EQ(run("train --input emg/X.csv --model-out m.json --epochs 3").code, 0);
  ASSERT_EQ(run("extract --model m.json --input emg/X.csv --out z1.csv --dict-out W.csv").code, 0);
  ASSERT_EQ(run("extract --model m.json --input emg/X.csv --out z2.csv").code, 0);
  EXPECT_EQ(slurp(path("z1.csv")), slurp(path("z2.csv")));
  const Matrix Z = read_csv_matrix(path("z1.csv"));
  EXPECT_EQ(Z.rows(), 4u);
  for (double v : Z.data()) EXPECT_GT(v, 0.0);
  const Matrix W = read_csv_matrix(path("W.csv"));
  for (double v : W.data()) EXPECT_GE(v, 0.0);

  ASSERT_EQ(run("extract --model m.json --input emg/X.csv --out s1.csv --mode sample --seed 2").code, 0);
  ASSERT_EQ(run("extract --model m.json --input emg/X.csv --out s2.csv --mode sample --seed 2").code, 0);
  EXPECT_EQ(slurp(path("s1.csv")), slurp(path("s2.csv")));
  EXPECT_NE(slurp(path("s1.csv")), slurp(path("z1.csv")));
  EXPECT_EQ(run("extract --model missing.json --input emg/X.csv --out z.csv").code, 2);
}

TEST_F(Cli, EnhanceToyMixture) {
  ASSERT_EQ(run("synth spectra --out-dir s --dict-rank 8").code, 0);
  const auto j = run_json("enhance --noisy s/mix.wav --dict-speech s/dict_speech.csv "
                          "--dict-noise s/dict_noise.csv --out e.wav --reference s/speech.wav");
  EXPECT_GE(j["improvement"].get<double>(), 5.0);
  EXPECT_EQ(read_wav(path("e.wav")).samples.size(), read_wav(path("s/mix.wav")).samples.size());
  const auto missing = run("enhance --noisy s/mix.wav --dict-speech s/none.csv "
                           "--dict-noise s/dict_noise.csv --out e.wav");
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(run("enhance --noisy s/mix.wav --dict-speech s/dict_speech.csv "
                "--dict-noise s/dict_noise.csv --out e.wav --frame 256").code, 1);
}

TEST_F(Cli, EvaluateMetrics) {
  std::ofstream(path("x.csv")) << "1,2,3\n4,5,6\n";
  auto r = run("evaluate --ref x.csv --est x.csv --metric vaf");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "vaf 100\n");

  std::ofstream(path("ref.csv")) << "1\n1\n1\n1\n";
  std::ofstream(path("est.csv")) << "2\n0\n2\n0\n";
  const auto j = run_json("evaluate --ref ref.csv --est est.csv --metric sisdr");
  EXPECT_NEAR(j["value"].get<double>(), 0.0, 0.01);

  std::ofstream(path("w.csv")) << "1,0,0.2\n0,1,0.5\n0.3,0,1\n";
  std::ofstream(path("wp.csv")) << "0.4,2,0\n1,0,1\n2,0.6,0\n";  // columns permuted, rescaled
  r = run("evaluate --ref w.csv --est wp.csv --metric dictmatch");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "dictmatch 1\n");

  EXPECT_EQ(run("evaluate --ref x.csv --est w.csv --metric vaf").code, 1);
  EXPECT_EQ(run("evaluate --ref x.csv --est none.csv --metric vaf").code, 2);
}

}  // namespace
}  // namespace gammadict
