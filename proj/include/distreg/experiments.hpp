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
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "distreg/estimator.hpp"
#include "distreg/nn.hpp"
#include "distreg/scoring.hpp"
#include "distreg/simgen.hpp"

namespace distreg {

enum class Classifier { kDeep, kLogistic };

std::string_view to_string(Classifier c);
Classifier classifier_from_string(std::string_view s);

// One grid configuration. `bins` is the number of cut points m.
struct GridCell {
  LossKind loss = LossKind::kJbce;
  Classifier classifier = Classifier::kDeep;
  std::size_t bins = 40;
  std::size_t ensemble = 1;

  bool operator==(const GridCell&) const = default;
};

struct ExperimentSpec {
  int model = 3;
  std::size_t replicates = 10;
  std::size_t n_train = 2000;
  std::size_t n_test = 1000;
  std::vector<std::size_t> bins{10, 40, 160};
  std::vector<LossKind> losses{LossKind::kMultinomial, LossKind::kJbce};
  std::vector<Classifier> classifiers{Classifier::kDeep, Classifier::kLogistic};
  std::vector<std::size_t> ensemble_sizes{1, 20};
  // Explicit configurations; when nonempty they replace the cartesian
  // product of the four sweeps above.
  std::vector<GridCell> cells;
  // Hidden layers and dropout for the deep classifier; widths are filled in
  // per cell.
  NetworkConfig network;
  TrainConfig training;
  ScoreOptions scoring;
  double range_margin = 0.01;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  // Throws kConfig.
  void validate() const;
  // Cells in grid order: bins, then loss, then classifier, then ensemble.
  std::vector<GridCell> configurations() const;
};

void to_json(nlohmann::json& j, const ExperimentSpec& s);
// Throws kConfig naming the offending field.
void from_json(const nlohmann::json& j, ExperimentSpec& s);

struct GridRow {
  int model = 0;
  std::size_t replicate = 0;
  GridCell cell;
  double crps = 0.0;
  double aqtl = 0.0;
  double coverage90 = 0.0;
  double wall_seconds = 0.0;
  std::string status = "ok";  // "error: <message>" for failed cells

  bool ok() const { return status == "ok"; }
};

struct GridResult {
  std::vector<GridRow> rows;

  bool all_ok() const;
  // Mean CRPS of successful rows matching `cell`; NaN when there are none.
  double mean_crps(const GridCell& cell) const;
  // Per-replicate CRPS of `cell`, indexed by replicate (NaN for failures).
  std::vector<double> crps_by_replicate(const GridCell& cell, std::size_t replicates) const;
};

// Replicate r draws its training and test sets from child_seed(seed, r); all
// cells of a replicate share the data. Rows come back replicate-major in
// configuration order regardless of thread count. A failing cell is recorded
// with NaN scores and an error status.
GridResult run_grid(const ExperimentSpec& spec,
                    const std::function<void(const GridRow&)>& progress = {});

// model,replicate,loss,classifier,bins,ensembleK,crps,aqtl,coverage90,wall_seconds,status
void write_grid_csv(const GridResult& result, std::ostream& out);

enum class BinRule { kCubeRoot, kFixed };

// Smallest k with k^3 >= n.
std::size_t cube_root_bins(std::size_t n);

struct ConsistencySpec {
  std::vector<std::size_t> sample_sizes{1000, 4000, 16000};
  BinRule bin_rule = BinRule::kCubeRoot;
  std::size_t fixed_bins = 10;  // used by BinRule::kFixed
  std::size_t replicates = 5;
  std::size_t probes = 10;
  std::size_t quadrature_points = 2000;
  TruncatedLinearNormalLaw law;
  TrainConfig training{.loss = LossKind::kMultinomial,
                       .epochs = 200,
                       .batch_size = 128,
                       .learning_rate = 0.02};
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
  // Number of bins (not cut points) for sample size n.
  std::size_t bins_for(std::size_t n) const;
};

void to_json(nlohmann::json& j, const ConsistencySpec& s);
void from_json(const nlohmann::json& j, ConsistencySpec& s);

// Midpoint rule with `points` cells over [lower, upper] of (f_hat - f)^2.
double integrated_squared_error(const std::function<double(double)>& f_hat,
                                const std::function<double(double)>& f, double lower,
                                double upper, std::size_t points = 2000);

// Probe covariates: one seeded uniform draw in each of `count` equal strata
// of [0, 1].
std::vector<double> probe_points(std::size_t count, std::uint64_t seed);

struct ConsistencyRow {
  std::size_t n = 0;
  std::size_t bins = 0;
  std::size_t replicate = 0;
  double ise = 0.0;  // averaged over probes
  std::string status = "ok";
};

struct ConsistencySummary {
  std::size_t n = 0;
  std::size_t bins = 0;
  double median_ise = 0.0;
};

struct ConsistencyResult {
  std::vector<ConsistencyRow> rows;
  std::vector<ConsistencySummary> summary;  // one entry per sample size

  bool all_ok() const;
  bool strictly_decreasing() const;
};

// Multinomial logistic regression on an even partition of the law's support
// with bins_for(n) bins; ISE against the analytic density at the probes.
ConsistencyResult run_consistency(const ConsistencySpec& spec);

// n,bins,replicate,ise,status
void write_consistency_csv(const ConsistencyResult& result, std::ostream& out);
// n,bins,median_ise
void write_consistency_summary_csv(const ConsistencyResult& result, std::ostream& out);

}  // namespace distreg
