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

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>

#include "json.hpp"
#include "distreg/dataset.hpp"
#include "distreg/distribution.hpp"

namespace distreg {

inline constexpr std::size_t kDefaultCrpsGridPoints = 1000;
inline constexpr std::size_t kNumPercentiles = 99;

// Range-normalised CRPS of one observation: the mean over `grid_points`
// evenly spaced y in [lower, upper] (both ends included) of
// (F(y) - I(y >= y_obs))^2. y_obs is clamped into [lower, upper].
double crps(const std::function<double(double)>& predictive_cdf, double y_obs, double lower,
            double upper, std::size_t grid_points = kDefaultCrpsGridPoints);

// Pinball loss (y_obs - q_hat)(tau - I(y_obs <= q_hat)).
double qtl(double q_hat, double y_obs, double tau);

// Mean pinball loss over tau = 0.01, ..., 0.99.
double aqtl(const std::function<double(double)>& quantile_fn, double y_obs);

// Fraction of ys inside their closed interval [lo, hi].
double coverage(std::span<const std::pair<double, double>> intervals, std::span<const double> ys);

struct ScoreReport {
  std::size_t n = 0;
  double crps = 0.0;
  double aqtl = 0.0;
  double coverage90 = 0.0;
  std::array<double, kNumPercentiles> qtl{};  // qtl[t-1] = QTL(t/100)
  std::size_t clamped = 0;  // observations outside [lower, upper]

  // n, crps, aqtl, coverage90, qtl_01..qtl_99
  static std::string csv_header();
  std::string csv_row() const;
};

void to_json(nlohmann::json& j, const ScoreReport& r);

struct ScoreOptions {
  std::size_t grid_points = kDefaultCrpsGridPoints;
  double interval_level = 0.9;
};

// Per-observation CRPS and AQTL averaged over the test set, plus empirical
// coverage of the central interval. CRPS integrates over the model's
// [lower, upper]; pinball loss and coverage use the raw responses.
ScoreReport score_testset(const ConditionalModel& model, const Dataset& test,
                          const ScoreOptions& options = {});

}  // namespace distreg
