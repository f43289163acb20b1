/*
 * Copyright 2026 The distreg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("distreg_cli_") + info->name() + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  CliResult invoke(const std::string& args) const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + DISTREG_CLI_PATH + "\" " + args + " > \"" +
                            out.string() + "\" 2> \"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }

  // Small Model 3 train/test pair.
  void simulate_pair() const {
    ASSERT_EQ(invoke("--seed 1 --out " + path("train.csv") + " simulate --model 3 --n 400").exit_code,
              0);
    ASSERT_EQ(invoke("--seed 2 --out " + path("test.csv") + " simulate --model 3 --n 100").exit_code,
              0);
  }

  fs::path dir_;
};

const char* kFastFit = " --epochs 5 --hidden 16 --dropout 0 --lr 0.01";

TEST_F(Cli, SimulateIsDeterministic) {
  ASSERT_EQ(invoke("--seed 7 --out " + path("a.csv") + " simulate --model 1 --n 50").exit_code, 0);
  ASSERT_EQ(invoke("--seed 7 --out " + path("b.csv") + " simulate --model 1 --n 50").exit_code, 0);
  ASSERT_EQ(invoke("--seed 8 --out " + path("c.csv") + " simulate --model 1 --n 50").exit_code, 0);
  const auto a = slurp(path("a.csv"));
  EXPECT_EQ(a, slurp(path("b.csv")));
  EXPECT_NE(a, slurp(path("c.csv")));
  const auto lines = lines_of(a);
  ASSERT_EQ(lines.size(), 51u);
  EXPECT_EQ(lines[0], "y,x1,x2,x3,x4,x5");
}

TEST_F(Cli, UnknownModelIsUsageError) {
  const auto r = invoke("--out " + path("a.csv") + " simulate --model 9 --n 10");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(fs::exists(path("a.csv")));
  EXPECT_EQ(invoke("").exit_code, 2);
}

TEST_F(Cli, FitPredictScoreRoundTrip) {
  simulate_pair();
  const auto fit = invoke("--seed 3 --out " + path("model.json") + " fit --data " +
                       path("train.csv") + " --loss jbce -m 20" + kFastFit);
  ASSERT_EQ(fit.exit_code, 0) << fit.err;
  const auto summary = json::parse(fit.out);
  EXPECT_EQ(summary["status"], "ok");
  EXPECT_TRUE(std::isfinite(summary["final_loss"].get<double>()));

  const auto pred = invoke("--out " + path("pred.csv") + " predict --model " + path("model.json") +
                        " --data " + path("test.csv") + " --density-out " + path("dens.csv") +
                        " --grid-points 200");
  ASSERT_EQ(pred.exit_code, 0) << pred.err;
  const auto rows = lines_of(slurp(path("pred.csv")));
  ASSERT_EQ(rows.size(), 101u);
  EXPECT_EQ(rows[0], "row,q05,q50,q95,lo,hi");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream in(rows[i]);
    std::string cell;
    std::vector<double> v;
    while (std::getline(in, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 6u);
    EXPECT_LE(v[1], v[2]);
    EXPECT_LE(v[2], v[3]);
  }

  // Trapezoid over each row's density grid integrates to about one.
  const auto dens = lines_of(slurp(path("dens.csv")));
  ASSERT_EQ(dens.size(), 1u + 100u * 200u);
  EXPECT_EQ(dens[0], "row,y,density");
  for (std::size_t r = 0; r < 100; r += 33) {
    double area = 0.0, prev_y = 0.0, prev_f = 0.0;
    for (std::size_t k = 0; k < 200; ++k) {
      std::istringstream in(dens[1 + r * 200 + k]);
      std::string a, b, c;
      std::getline(in, a, ',');
      std::getline(in, b, ',');
      std::getline(in, c, ',');
      ASSERT_EQ(std::stoul(a), r);
      const double y = std::stod(b), f = std::stod(c);
      EXPECT_GE(f, 0.0);
      if (k > 0) area += 0.5 * (f + prev_f) * (y - prev_y);
      prev_y = y;
      prev_f = f;
    }
    EXPECT_NEAR(area, 1.0, 0.02) << "row " << r;
  }

  const auto score = invoke("score --model " + path("model.json") + " --data " + path("test.csv"));
  ASSERT_EQ(score.exit_code, 0) << score.err;
  const auto report = json::parse(score.out);
  EXPECT_EQ(report["n"], 100);
  EXPECT_GT(report["crps"].get<double>(), 0.0);
}

TEST_F(Cli, EnsembleFit) {
  simulate_pair();
  const auto fit = invoke("--seed 3 --out " + path("ens.json") + " fit --data " +
                       path("train.csv") + " --partition random -m 10 -K 5" + kFastFit);
  ASSERT_EQ(fit.exit_code, 0) << fit.err;
  EXPECT_EQ(json::parse(fit.out)["members"], 5);
  const auto model = json::parse(slurp(path("ens.json")));
  EXPECT_EQ(model["estimator"]["members"].size(), 5u);
}

TEST_F(Cli, BadInputsFailCleanly) {
  simulate_pair();
  auto r = invoke("--out " + path("m.json") + " fit --data " + path("train.csv") + " --dropout 1.0");
  EXPECT_EQ(r.exit_code, 1);
  const auto err = json::parse(r.err);
  EXPECT_EQ(err["status"], "error");
  EXPECT_EQ(err["code"], "config-error");
  EXPECT_FALSE(fs::exists(path("m.json")));

  write("nan.csv", "y,x1\n0.5,1\nnan,2\n");
  r = invoke("--out " + path("m.json") + " fit --data " + path("nan.csv"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(json::parse(r.err)["code"], "parse-error");

  r = invoke("--out " + path("m.json") + " fit --data " + path("missing.csv"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(json::parse(r.err)["code"], "io-error");
}

TEST_F(Cli, RollingSynthetic) {
  write("roll.json", R"({"plan":{"kind":"monthly","initial_months":12,"max_folds":12},
    "recipe_a":{"cuts":20,"network":{"hidden_sizes":[16],"dropout_rate":0.0},
                "training":{"epochs":3,"learning_rate":0.01}}})");
  const auto r = invoke("--seed 5 --config " + path("roll.json") + " --out " + path("folds.csv") +
                     " rolling --synthetic-days 730 --summary " + path("summary.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto folds = lines_of(slurp(path("folds.csv")));
  ASSERT_EQ(folds.size(), 13u);
  EXPECT_EQ(folds[0].rfind("fold,n,crps,aqtl,coverage90", 0), 0u);
  const auto summary = json::parse(slurp(path("summary.json")));
  ASSERT_EQ(summary["recipe_a"]["folds"].size(), 12u);
  for (const auto& f : summary["recipe_a"]["folds"]) EXPECT_TRUE(f["leakage_free"].get<bool>());
}

TEST_F(Cli, ExperimentGrid) {
  write("exp.json", R"({"grid":{"model":3,"replicates":1,"n_train":300,"n_test":100,
    "cells":[{"loss":"jbce","classifier":"deep","bins":10,"ensemble":1}],
    "network":{"hidden_sizes":[8]},"training":{"epochs":3}}})");
  const auto r = invoke("--seed 1 --quiet --out " + path("grid.csv") + " experiment --spec " +
                     path("exp.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto rows = lines_of(slurp(path("grid.csv")));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].rfind("3,0,jbce,deep,10,1,", 0), 0u);

  write("bad.json", R"({"grid":{"model":3,"replicates":"x"}})");
  const auto bad = invoke("--out " + path("g2.csv") + " experiment --spec " + path("bad.json"));
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_NE(json::parse(bad.err)["message"].get<std::string>().find("replicates"),
            std::string::npos);
}

}  // namespace
