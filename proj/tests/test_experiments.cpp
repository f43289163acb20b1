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

#include <cmath>
#include <sstream>

#include "distreg/error.hpp"
#include "distreg/experiments.hpp"

namespace distreg {
namespace {

ExperimentSpec tiny_spec() {
  ExperimentSpec s;
  s.model = 3;
  s.replicates = 1;
  s.n_train = 300;
  s.n_test = 100;
  s.cells = {{LossKind::kJbce, Classifier::kDeep, 10, 1}};
  s.network.hidden_sizes = {8};
  s.training.epochs = 3;
  s.seed = 4;
  return s;
}

TEST(ExperimentSpec, CartesianConfigurations) {
  ExperimentSpec s;
  s.bins = {10, 40};
  s.losses = {LossKind::kJbce};
  s.classifiers = {Classifier::kDeep, Classifier::kLogistic};
  s.ensemble_sizes = {1, 20};
  const auto cells = s.configurations();
  ASSERT_EQ(cells.size(), 8u);
  EXPECT_EQ(cells[0], (GridCell{LossKind::kJbce, Classifier::kDeep, 10, 1}));
  EXPECT_EQ(cells[7], (GridCell{LossKind::kJbce, Classifier::kLogistic, 40, 20}));
}

TEST(ExperimentSpec, Validation) {
  auto s = tiny_spec();
  EXPECT_NO_THROW(s.validate());
  s.replicates = 0;
  EXPECT_THROW(s.validate(), Error);
  s = tiny_spec();
  s.cells[0].bins = 0;
  EXPECT_THROW(s.validate(), Error);
  s = tiny_spec();
  s.model = 7;
  EXPECT_THROW(s.validate(), Error);
}

TEST(ExperimentSpec, JsonNamesBadField) {
  const auto j = nlohmann::json::parse(R"({"model": 3, "replicates": "ten"})");
  try {
    j.get<ExperimentSpec>();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    EXPECT_NE(std::string(e.what()).find("replicates"), std::string::npos);
  }
  try {
    nlohmann::json::parse(R"({"replicate": 3})").get<ExperimentSpec>();
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("replicate"), std::string::npos);
  }
  const auto round = nlohmann::json(tiny_spec()).get<ExperimentSpec>();
  EXPECT_EQ(round.cells, tiny_spec().cells);
  EXPECT_EQ(round.network.hidden_sizes, tiny_spec().network.hidden_sizes);
}

TEST(RunGrid, OneCellOneRow) {
  const auto result = run_grid(tiny_spec());
  ASSERT_EQ(result.rows.size(), 1u);
  const auto& row = result.rows[0];
  EXPECT_TRUE(row.ok());
  EXPECT_GE(row.coverage90, 0.0);
  EXPECT_LE(row.coverage90, 1.0);
  EXPECT_GT(row.crps, 0.0);
  std::ostringstream csv;
  write_grid_csv(result, csv);
  std::istringstream lines(csv.str());
  std::string header, line;
  std::getline(lines, header);
  EXPECT_EQ(header,
            "model,replicate,loss,classifier,bins,ensembleK,crps,aqtl,coverage90,wall_seconds,"
            "status");
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("3,0,jbce,deep,10,1,", 0), 0u);
}

TEST(RunGrid, ReproducibleAcrossThreads) {
  auto spec = tiny_spec();
  spec.replicates = 2;
  spec.cells = {{LossKind::kJbce, Classifier::kDeep, 10, 1},
                {LossKind::kMultinomial, Classifier::kLogistic, 10, 1},
                {LossKind::kJbce, Classifier::kDeep, 6, 3}};
  const auto a = run_grid(spec);
  spec.threads = 3;
  const auto b = run_grid(spec);
  ASSERT_EQ(a.rows.size(), 6u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].cell, b.rows[i].cell);
    EXPECT_EQ(a.rows[i].replicate, b.rows[i].replicate);
    EXPECT_EQ(a.rows[i].crps, b.rows[i].crps);
    EXPECT_EQ(a.rows[i].aqtl, b.rows[i].aqtl);
  }
  EXPECT_EQ(a.crps_by_replicate(spec.cells[1], 2)[1], a.rows[4].crps);
}

TEST(RunGrid, FailedCellIsRecorded) {
  auto spec = tiny_spec();
  spec.training.learning_rate = 1e300;
  spec.training.epochs = 20;
  spec.cells.push_back({LossKind::kMultinomial, Classifier::kLogistic, 10, 1});
  const auto result = run_grid(spec);
  ASSERT_EQ(result.rows.size(), 2u);
  EXPECT_FALSE(result.all_ok());
  const auto& bad = result.rows[0];
  EXPECT_EQ(bad.status.rfind("error: ", 0), 0u);
  EXPECT_TRUE(std::isnan(bad.crps));
  EXPECT_TRUE(std::isnan(result.mean_crps(spec.cells[0])));
}

TEST(Consistency, CubeRootBins) {
  EXPECT_EQ(cube_root_bins(1000), 10u);
  EXPECT_EQ(cube_root_bins(1001), 11u);
  EXPECT_EQ(cube_root_bins(4000), 16u);
  EXPECT_EQ(cube_root_bins(16000), 26u);
  EXPECT_EQ(cube_root_bins(1), 1u);
  ConsistencySpec s;
  EXPECT_EQ(s.bins_for(1000), 10u);
  s.bin_rule = BinRule::kFixed;
  s.fixed_bins = 7;
  EXPECT_EQ(s.bins_for(1000), 7u);
}

TEST(Consistency, IseOracleSelfCheck) {
  const TruncatedLinearNormalLaw law;
  const TrueConditional truth(0, law);
  const std::array<double, 1> x{0.3};
  const auto f = [&](double y) { return truth.pdf(x, y); };
  EXPECT_LT(integrated_squared_error(f, f, -3.0, 3.0), 1e-15);
  const auto zero = [](double) { return 0.0; };
  const auto one = [](double) { return 1.0; };
  EXPECT_NEAR(integrated_squared_error(one, zero, 0.0, 2.0), 2.0, 1e-12);
  EXPECT_THROW(integrated_squared_error(one, zero, 1.0, 1.0), Error);
}

TEST(Consistency, ProbePointsStratified) {
  const auto p = probe_points(10, 3);
  ASSERT_EQ(p.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_GE(p[i], i / 10.0);
    EXPECT_LT(p[i], (i + 1) / 10.0);
  }
  EXPECT_EQ(p, probe_points(10, 3));
}

TEST(Consistency, SmallRunShape) {
  ConsistencySpec s;
  s.sample_sizes = {200, 800};
  s.replicates = 3;
  s.training.epochs = 30;
  s.seed = 2;
  const auto r = run_consistency(s);
  ASSERT_EQ(r.rows.size(), 6u);
  ASSERT_EQ(r.summary.size(), 2u);
  EXPECT_TRUE(r.all_ok());
  EXPECT_EQ(r.summary[0].bins, 6u);
  EXPECT_EQ(r.summary[1].bins, 10u);
  for (const auto& row : r.rows) EXPECT_GE(row.ise, 0.0);
  std::ostringstream csv;
  write_consistency_summary_csv(r, csv);
  EXPECT_EQ(csv.str().rfind("n,bins,median_ise\n200,6,", 0), 0u);
  s.sample_sizes = {800, 200};
  EXPECT_THROW(run_consistency(s), Error);
}

}  // namespace
}  // namespace distreg
