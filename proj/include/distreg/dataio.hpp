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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "distreg/dataset.hpp"
#include "distreg/distribution.hpp"
#include "distreg/estimator.hpp"
#include "distreg/scoring.hpp"

namespace distreg {

// Column roles for a CSV table. Categorical columns are one-hot expanded in
// order of first appearance ("farm=A", "farm=B", ...).
struct TableSchema {
  std::string target = "y";
  std::vector<std::string> numeric;
  std::vector<std::string> categorical;
  std::optional<std::string> timestamp;
  // Append sin/cos day-of-year and hour-of-day indicators from `timestamp`.
  bool calendar = false;
  // Optional declared response range, e.g. [0, 1] for scaled power output.
  std::optional<double> lower;
  std::optional<double> upper;
  // Drop rows whose target is exactly zero (e.g. night-time solar output).
  bool drop_zero_target = false;

  void validate() const;
};

void to_json(nlohmann::json& j, const TableSchema& s);
void from_json(const nlohmann::json& j, TableSchema& s);

// Parses "YYYY-MM-DD", "YYYY-MM-DD HH:MM[:SS]" or "YYYY-MM-DDTHH:MM[:SS][Z]"
// as UTC seconds since the Unix epoch. Throws kParseError.
std::int64_t parse_timestamp(std::string_view text);
// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(std::int64_t seconds);

inline constexpr double kYearPeriodDays = 365.25;

// Fractional day of year, 0 at midnight on January 1.
double day_of_year(std::int64_t seconds);

// Per row: sin(2 pi d / 365.25), cos(2 pi d / 365.25), hour_0 .. hour_23.
Matrix calendar_features(std::span<const std::int64_t> timestamps);
std::vector<std::string> calendar_feature_names();

// Appends calendar features to a dataset that carries timestamps.
void append_calendar_features(Dataset& data);

// Reads a table with a header row. Rows with missing or non-numeric values
// raise kParseError naming the line; absent columns raise kMissingColumn.
Dataset load_csv(const std::filesystem::path& path, const TableSchema& schema);
Dataset read_csv(std::istream& in, const TableSchema& schema);

// Schema for files written by write_csv: target "y", optional "timestamp"
// column, every other column numeric.
Dataset load_csv(const std::filesystem::path& path);

// Header y,<feature names>[,timestamp]; floats use shortest round-trip form.
void write_csv(const Dataset& data, const std::filesystem::path& path);
void write_csv(const Dataset& data, std::ostream& out);

// One rolling-origin fold: train on rows [0, train_end), test on rows
// [train_end, test_end).
struct Fold {
  std::size_t train_end = 0;
  std::size_t test_end = 0;
};

// Consecutive folds; each fold's training window ends where the previous
// fold's test span ended.
struct RollingPlan {
  std::vector<Fold> folds;

  std::size_t size() const { return folds.size(); }
  // Throws kEmptyFold or kInvalidArgument.
  void validate(std::size_t rows) const;
};

// Calendar-month folds: the first `initial_months` months train the first
// model; each following month is one test span. `max_folds` = 0 uses every
// remaining month. Timestamps must be sorted (kUnsortedData otherwise).
RollingPlan monthly_plan(std::span<const std::int64_t> timestamps, std::size_t initial_months,
                         std::size_t max_folds = 0);

// Fixed-size row folds for data without timestamps.
RollingPlan row_plan(std::size_t rows, std::size_t initial_rows, std::size_t test_rows,
                     std::size_t folds);

struct FoldScore {
  std::size_t fold = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  // Set when the data carries timestamps.
  std::optional<std::int64_t> max_train_time;
  std::optional<std::int64_t> min_test_time;
  ScoreReport report;
  std::string status = "ok";  // otherwise the error message

  bool ok() const { return status == "ok"; }
  bool leakage_free() const {
    return !max_train_time || !min_test_time || *max_train_time < *min_test_time;
  }
};

struct RollingResult {
  std::vector<FoldScore> folds;

  bool all_ok() const;
  // Means over successful folds.
  double mean_crps() const;
  double mean_aqtl() const;
  double mean_coverage90() const;
};

using ModelFactory =
    std::function<std::unique_ptr<ConditionalModel>(const Dataset& train, std::size_t fold)>;

// Trains on each fold's window and scores its test span. A failing fold is
// recorded with its error and the harness moves on.
RollingResult rolling_eval(const Dataset& data, const RollingPlan& plan,
                           const ModelFactory& factory, const ScoreOptions& options = {});
RollingResult rolling_eval(const Dataset& data, const RollingPlan& plan,
                           const ModelRecipe& recipe, const ScoreOptions& options = {});

// (score_a - score_b) / score_b per fold, and its mean over folds.
struct RelativeChange {
  std::vector<double> crps;
  std::vector<double> aqtl;
  double mean_crps = 0.0;
  double mean_aqtl = 0.0;
};
RelativeChange relative_change(const RollingResult& a, const RollingResult& b);

// Per-fold CSV: fold,n,crps,aqtl,coverage90[,crps_rel_change,aqtl_rel_change].
void write_fold_csv(const RollingResult& a, const RelativeChange* change, std::ostream& out);
nlohmann::json rolling_summary_json(const RollingResult& a, const RollingResult* b,
                                    const RelativeChange* change);

// Daily-cycle synthetic series with an annual season: `rows_per_day` evenly
// spaced observations from `start` for `days` days, one covariate ("cloud")
// and a response in (0, 1).
Dataset synthetic_seasonal(std::int64_t start, std::size_t days, std::size_t rows_per_day,
                           std::uint64_t seed);

}  // namespace distreg
