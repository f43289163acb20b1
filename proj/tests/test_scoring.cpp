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
#include "distreg/scoring.hpp"
#include "distreg/simgen.hpp"
#include "test_support.hpp"

namespace distreg {
namespace {

double uniform_cdf(double y) { return std::clamp(y, 0.0, 1.0); }

TEST(Crps, StepForecastIsNearZero) {
  for (double y_obs : {0.0, 0.123, 0.5, 0.999, 1.0}) {
    const auto step = [y_obs](double y) { return y >= y_obs ? 1.0 : 0.0; };
    EXPECT_LE(crps(step, y_obs, 0.0, 1.0), 1.0 / 1000.0);
  }
}

TEST(Crps, UniformPredictive) {
  EXPECT_NEAR(crps(uniform_cdf, 0.5, 0.0, 1.0), 1.0 / 12.0, 2e-3);
  EXPECT_NEAR(crps(uniform_cdf, 0.0, 0.0, 1.0), 1.0 / 3.0, 2e-3);
  EXPECT_NEAR(testing::crps_quadrature(uniform_cdf, 0.5, 0.0, 1.0), 1.0 / 12.0, 1e-9);
  EXPECT_NEAR(testing::crps_quadrature(uniform_cdf, 0.0, 0.0, 1.0), 1.0 / 3.0, 1e-9);
}

TEST(Crps, ClampsObservationIntoRange) {
  EXPECT_EQ(crps(uniform_cdf, -3.0, 0.0, 1.0), crps(uniform_cdf, 0.0, 0.0, 1.0));
  EXPECT_EQ(crps(uniform_cdf, 7.0, 0.0, 1.0), crps(uniform_cdf, 1.0, 0.0, 1.0));
}

TEST(Crps, RejectsBadArguments) {
  EXPECT_THROW(crps(uniform_cdf, 0.5, 1.0, 1.0), Error);
  EXPECT_THROW(crps(uniform_cdf, 0.5, 0.0, 1.0, 1), Error);
}

TEST(Crps, MatchesQuadratureOnRandomHistograms) {
  Rng rng(12);
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  for (int rep = 0; rep < 10; ++rep) {
    const auto h = testing::random_histogram(rng);
    const auto cdf = [&h](double y) { return h.cdf(y); };
    const double y = u(rng);
    EXPECT_NEAR(crps(cdf, y, -2.0, 3.0), testing::crps_quadrature(cdf, y, -2.0, 3.0, 200000),
                2e-3);
  }
}

TEST(Qtl, Examples) {
  EXPECT_EQ(qtl(0.3, 0.3, 0.7), 0.0);
  EXPECT_NEAR(qtl(0.0, 1.0, 0.9), 0.9, 1e-15);
  EXPECT_NEAR(qtl(1.0, 0.0, 0.9), 0.1, 1e-15);
  EXPECT_THROW(qtl(0.0, 1.0, 0.0), Error);
  EXPECT_THROW(qtl(0.0, 1.0, 1.0), Error);
}

TEST(Qtl, NonNegativeAndZeroOnlyAtQuantile) {
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> t(0.01, 0.99);
  for (int i = 0; i < 1000; ++i) {
    const double q = n(rng), y = n(rng), tau = t(rng);
    EXPECT_GT(qtl(q, y, tau), 0.0);
    EXPECT_EQ(qtl(y, y, tau), 0.0);
  }
}

TEST(Aqtl, UniformPredictiveMatchesBruteForce) {
  const auto quantile = [](double tau) { return tau; };
  // Independent brute force of the 99-term average.
  double brute = 0.0;
  for (int t = 1; t <= 99; ++t) {
    const double tau = t / 100.0;
    brute += (0.5 - tau) * (tau - (0.5 <= tau ? 1.0 : 0.0));
  }
  brute /= 99.0;
  EXPECT_NEAR(aqtl(quantile, 0.5), brute, 1e-15);
  EXPECT_NEAR(aqtl(quantile, 0.5), 0.0417, 1e-3);
  EXPECT_NEAR(aqtl(quantile, 0.2), aqtl(quantile, 0.8), 1e-15);
  EXPECT_EQ(aqtl([](double) { return 0.37; }, 0.37), 0.0);
}

TEST(Coverage, Examples) {
  const std::vector<std::pair<double, double>> iv{{0, 1}, {0, 1}, {0, 1}, {0, 1}};
  EXPECT_EQ(coverage(iv, std::vector<double>{0.0, 0.5, 1.0, 0.2}), 1.0);
  EXPECT_EQ(coverage(iv, std::vector<double>{-1.0, 2.0, 1.5, -0.1}), 0.0);
  EXPECT_EQ(coverage(iv, std::vector<double>{0.5, 2.0, 0.1, -0.1}), 0.5);
  try {
    coverage(iv, std::vector<double>{0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
  try {
    coverage({}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyData);
  }
}

// Point forecast at y = x1 for a noise-free relationship.
class PointMass final : public PredictiveDistribution {
 public:
  explicit PointMass(double at) : at_(at) {}
  double lower() const override { return 0.0; }
  double upper() const override { return 1.0; }
  double pdf(double) const override { return 0.0; }
  double cdf(double y) const override { return y >= at_ ? 1.0 : 0.0; }
  double quantile(double) const override { return at_; }

 private:
  double at_;
};

class IdentityModel final : public ConditionalModel {
 public:
  std::size_t input_dim() const override { return 1; }
  double lower() const override { return 0.0; }
  double upper() const override { return 1.0; }
  std::unique_ptr<PredictiveDistribution> distribution(std::span<const double> x) const override {
    return std::make_unique<PointMass>(x[0]);
  }
};

TEST(ScoreTestset, PerfectOracleOnDegenerateData) {
  Dataset d;
  d.x = (Matrix::Random(50, 1).array() + 1.0) / 2.0;
  d.y = d.x.col(0);
  const auto report = score_testset(IdentityModel{}, d);
  EXPECT_EQ(report.n, 50u);
  EXPECT_LE(report.crps, 1.0 / 1000.0);
  EXPECT_EQ(report.aqtl, 0.0);
  EXPECT_EQ(report.coverage90, 1.0);
  EXPECT_EQ(report.clamped, 0u);
}

TEST(ScoreTestset, CountsClampedObservations) {
  Dataset d;
  d.x = Matrix::Constant(4, 1, 0.5);
  d.y.resize(4);
  d.y << -1.0, 0.5, 1.5, 0.2;
  const auto report = score_testset(IdentityModel{}, d);
  EXPECT_EQ(report.clamped, 2u);
  EXPECT_EQ(report.coverage90, 0.25);
}

TEST(ScoreTestset, Model1OracleCoverage) {
  const auto sim = gen_model1(1000, 17);
  const auto [l, u] = widened_range(sim.data.y);
  const OracleModel oracle(sim.truth, 5, l, u);
  const auto report = score_testset(oracle, sim.data);
  EXPECT_EQ(report.n, 1000u);
  EXPECT_GE(report.coverage90, 0.87);
  EXPECT_LE(report.coverage90, 0.93);
  EXPECT_GE(report.crps, 0.0);
  for (double q : report.qtl) EXPECT_GE(q, 0.0);
}

TEST(ScoreReport, CsvAndJsonLayout) {
  ScoreReport r;
  r.n = 3;
  r.crps = 0.1;
  const auto header = ScoreReport::csv_header();
  EXPECT_EQ(header.rfind("n,crps,aqtl,coverage90,qtl_01,", 0), 0u);
  EXPECT_NE(header.find(",qtl_99"), std::string::npos);
  std::size_t commas_h = std::count(header.begin(), header.end(), ',');
  const auto row = r.csv_row();
  EXPECT_EQ(commas_h, static_cast<std::size_t>(std::count(row.begin(), row.end(), ',')));
  EXPECT_EQ(commas_h, 4u + 98u);
  const nlohmann::json j = r;
  EXPECT_EQ(j.at("n"), 3);
}

}  // namespace
}  // namespace distreg
