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

#include "distreg/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "distreg/error.hpp"
#include "distreg/estimator.hpp"

namespace distreg {

double crps(const std::function<double(double)>& predictive_cdf, double y_obs, double lower,
            double upper, std::size_t grid_points) {
  if (!(lower < upper)) throw Error(ErrorCode::kInvalidRange, "crps needs lower < upper");
  if (grid_points < 2) throw Error(ErrorCode::kInvalidCount, "crps needs >= 2 grid points");
  const double obs = std::clamp(y_obs, lower, upper);
  const double step = (upper - lower) / static_cast<double>(grid_points - 1);
  double total = 0.0;
  for (std::size_t j = 0; j < grid_points; ++j) {
    const double y = j + 1 == grid_points ? upper : lower + static_cast<double>(j) * step;
    const double d = predictive_cdf(y) - (y >= obs ? 1.0 : 0.0);
    total += d * d;
  }
  return total / static_cast<double>(grid_points);
}

double qtl(double q_hat, double y_obs, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    std::ostringstream msg;
    msg << "tau must lie in (0, 1), got " << tau;
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  return (y_obs - q_hat) * (tau - (y_obs <= q_hat ? 1.0 : 0.0));
}

double aqtl(const std::function<double(double)>& quantile_fn, double y_obs) {
  double total = 0.0;
  for (std::size_t t = 1; t <= kNumPercentiles; ++t) {
    const double tau = static_cast<double>(t) / 100.0;
    total += qtl(quantile_fn(tau), y_obs, tau);
  }
  return total / static_cast<double>(kNumPercentiles);
}

double coverage(std::span<const std::pair<double, double>> intervals, std::span<const double> ys) {
  if (intervals.size() != ys.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(intervals.size()) + " intervals vs " + std::to_string(ys.size()) +
                    " observations");
  }
  if (ys.empty()) throw Error(ErrorCode::kEmptyData, "coverage of an empty set");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (intervals[i].first <= ys[i] && ys[i] <= intervals[i].second) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(ys.size());
}

std::string ScoreReport::csv_header() {
  std::string h = "n,crps,aqtl,coverage90";
  char buf[16];
  for (std::size_t t = 1; t <= kNumPercentiles; ++t) {
    std::snprintf(buf, sizeof buf, ",qtl_%02zu", t);
    h += buf;
  }
  return h;
}

std::string ScoreReport::csv_row() const {
  std::ostringstream out;
  out.precision(17);
  out << n << ',' << crps << ',' << aqtl << ',' << coverage90;
  for (double q : qtl) out << ',' << q;
  return out.str();
}

void to_json(nlohmann::json& j, const ScoreReport& r) {
  nlohmann::json per_tau = nlohmann::json::object();
  char key[8];
  for (std::size_t t = 1; t <= kNumPercentiles; ++t) {
    std::snprintf(key, sizeof key, "%.2f", static_cast<double>(t) / 100.0);
    per_tau[key] = r.qtl[t - 1];
  }
  j = nlohmann::json{{"n", r.n},
                     {"crps", r.crps},
                     {"aqtl", r.aqtl},
                     {"coverage90", r.coverage90},
                     {"clamped", r.clamped},
                     {"qtl", std::move(per_tau)}};
}

ScoreReport score_testset(const ConditionalModel& model, const Dataset& test,
                          const ScoreOptions& options) {
  if (test.empty()) throw Error(ErrorCode::kEmptyData, "test set has no rows");
  if (test.features() != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "test set has " + std::to_string(test.features()) + " features, model expects " +
                    std::to_string(model.input_dim()));
  }
  const double lower = model.lower();
  const double upper = model.upper();
  ScoreReport report;
  report.n = test.rows();
  std::size_t inside = 0;
  std::array<double, kNumPercentiles> quantiles{};
  for (std::size_t i = 0; i < test.rows(); ++i) {
    const double y = test.y(static_cast<Eigen::Index>(i));
    if (y < lower || y > upper) ++report.clamped;
    const auto dist = model.distribution(test.row(i));
    report.crps += crps([&](double v) { return dist->cdf(v); }, y, lower, upper,
                        options.grid_points);
    double row_aqtl = 0.0;
    for (std::size_t t = 1; t <= kNumPercentiles; ++t) {
      const double tau = static_cast<double>(t) / 100.0;
      quantiles[t - 1] = dist->quantile(tau);
      const double loss = qtl(quantiles[t - 1], y, tau);
      report.qtl[t - 1] += loss;
      row_aqtl += loss;
    }
    report.aqtl += row_aqtl / static_cast<double>(kNumPercentiles);
    const auto [lo, hi] = predict_interval(*dist, options.interval_level);
    if (lo <= y && y <= hi) ++inside;
  }
  const double n = static_cast<double>(report.n);
  report.crps /= n;
  report.aqtl /= n;
  for (auto& q : report.qtl) q /= n;
  report.coverage90 = static_cast<double>(inside) / n;
  return report;
}

}  // namespace distreg
