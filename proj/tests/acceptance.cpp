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

// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset; exits nonzero when any selected criterion
// fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "distreg/dataio.hpp"
#include "distreg/estimator.hpp"
#include "distreg/experiments.hpp"
#include "distreg/scoring.hpp"
#include "distreg/simgen.hpp"
#include "test_support.hpp"

namespace {

using namespace distreg;
using distreg::testing::crps_quadrature;
using distreg::testing::max_gradient_rel_error;
using distreg::testing::random_batch;
using distreg::testing::random_histogram;
using distreg::testing::random_network;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Shared settings for the simulation-study criteria.
constexpr std::uint64_t kStudySeed = 2024;
constexpr std::size_t kStudyEpochs = 200;

ExperimentSpec study_spec(int model, std::size_t replicates, std::size_t n_train,
                          std::size_t n_test, std::vector<GridCell> cells) {
  ExperimentSpec s;
  s.model = model;
  s.replicates = replicates;
  s.n_train = n_train;
  s.n_test = n_test;
  s.cells = std::move(cells);
  s.training.epochs = kStudyEpochs;
  s.seed = kStudySeed;
  return s;
}

// ------------------------------------------------------------------ 1
Outcome gradient_correctness() {
  const auto start = std::chrono::steady_clock::now();
  constexpr double kTol = 1e-5;
  double worst = 0.0;
  Rng rng(101);
  std::uniform_int_distribution<std::size_t> classes(3, 6), inputs(1, 4);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const std::size_t c = classes(rng);
    const std::size_t p = inputs(rng);
    const Network net = random_network(p, {4}, c, 1000 + k);
    const LabeledBatch batch = random_batch(5, p, c, rng);
    for (LossKind loss : {LossKind::kMultinomial, LossKind::kJbce}) {
      worst = std::max(worst, max_gradient_rel_error(net, batch, loss, 1e-5));
    }
  }
  const double t = seconds_since(start);
  return {worst <= kTol && t < 30.0,
          "max relative error " + num(worst) + " (limit 1e-05), " + num(t) + " s (limit 30)"};
}

// ------------------------------------------------------------------ 2
Outcome monotone_cdf() {
  const auto start = std::chrono::steady_clock::now();
  constexpr double kTol = 1e-9;
  Rng rng(202);
  std::uniform_int_distribution<std::size_t> cuts(1, 60), inputs(1, 5);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_drop = 0.0, worst_end = 0.0;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const std::size_t m = cuts(rng);
    const std::size_t p = inputs(rng);
    Partition part = random_partition(-1.0 - std::abs(normal(rng)), 1.0 + std::abs(normal(rng)),
                                      m, rng);
    const double l = part.lower(), u = part.upper();
    DensityEstimator est(std::move(part), random_network(p, {8, 8}, m + 1, 5000 + k),
                         LossKind::kJbce);
    std::vector<double> x(p);
    for (auto& v : x) v = 3.0 * normal(rng);
    const Eigen::VectorXd probs = est.network().forward(x);
    double running = 0.0, prev = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
      running += probs(i);
      worst_drop = std::max(worst_drop, prev - running);
      prev = running;
    }
    worst_end = std::max(worst_end, std::abs(running - 1.0));
    const auto dist = est.predict(x);
    worst_end = std::max({worst_end, std::abs(dist.cdf(l)), std::abs(dist.cdf(u) - 1.0)});
    prev = dist.cdf(l);
    for (int g = 1; g < 500; ++g) {
      const double c = dist.cdf(l + (u - l) * g / 499.0);
      worst_drop = std::max(worst_drop, prev - c);
      prev = c;
    }
  }
  const double t = seconds_since(start);
  return {worst_drop <= kTol && worst_end <= kTol && t < 30.0,
          "largest decrease " + num(worst_drop) + ", endpoint error " + num(worst_end) +
              " (limit 1e-09), " + num(t) + " s (limit 30)"};
}

// ------------------------------------------------------------------ 3
Outcome scoring_oracles() {
  const auto start = std::chrono::steady_clock::now();
  constexpr double kTol = 2e-3;
  Rng rng(303);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto hist = random_histogram(rng);
    const double y = std::uniform_real_distribution<double>(-2.5, 3.5)(rng);
    const auto cdf = [&](double v) { return hist.cdf(v); };
    const double grid = crps(cdf, y, hist.lower(), hist.upper(), 1000);
    worst = std::max(worst, std::abs(grid - crps_quadrature(cdf, y, hist.lower(), hist.upper())));
  }
  const auto uniform = [](double v) { return std::clamp(v, 0.0, 1.0); };
  const double mid = crps(uniform, 0.5, 0.0, 1.0);
  const double edge = crps(uniform, 0.0, 0.0, 1.0);
  const bool uniform_ok = std::abs(mid - 1.0 / 12.0) <= kTol && std::abs(edge - 1.0 / 3.0) <= kTol;
  // Pinball examples must match their hand derivations bit for bit.
  const bool pinball_ok = qtl(0.3, 0.3, 0.5) == 0.0 && qtl(0.0, 1.0, 0.9) == 1.0 * 0.9 &&
                          qtl(1.0, 0.0, 0.9) == (-1.0) * (0.9 - 1.0);
  const double t = seconds_since(start);
  return {worst <= kTol && uniform_ok && pinball_ok && t < 60.0,
          "max |grid - quadrature| " + num(worst) + ", uniform " + num(mid) + " / " + num(edge) +
              ", pinball " + (pinball_ok ? "ok" : "mismatch") + ", " + num(t) +
              " s (limit 60)"};
}

// ------------------------------------------------------------------ 4
Outcome quantile_round_trip() {
  const auto start = std::chrono::steady_clock::now();
  constexpr double kTol = 1e-8;
  Rng rng(404);
  std::uniform_int_distribution<std::size_t> cuts(1, 60);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_y = 0.0, worst_tau = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const std::size_t m = cuts(rng);
    Partition part = random_partition(-2.0, 4.0, m, rng);
    DensityEstimator est(std::move(part), random_network(3, {8}, m + 1, 7000 + k),
                         LossKind::kJbce);
    const std::vector<double> x{normal(rng), normal(rng), normal(rng)};
    const auto dist = est.predict(x);
    for (int g = 0; g < 200; ++g) {
      const double y = -2.0 + 6.0 * (g + 0.5) / 200.0;
      if (!(dist.pdf(y) > 0.0)) continue;
      worst_y = std::max(worst_y, std::abs(dist.quantile(dist.cdf(y)) - y));
    }
    for (int tp = 1; tp <= 99; ++tp) {
      const double tau = tp / 100.0;
      worst_tau = std::max(worst_tau, std::abs(dist.cdf(dist.quantile(tau)) - tau));
    }
  }
  const double t = seconds_since(start);
  return {worst_y <= kTol && worst_tau <= kTol && t < 60.0,
          "max |q(F(y)) - y| " + num(worst_y) + ", max |F(q(tau)) - tau| " + num(worst_tau) +
              " (limit 1e-08), " + num(t) + " s (limit 60)"};
}

// ------------------------------------------------------------------ 5
Outcome model1_coverage() {
  const auto start = std::chrono::steady_clock::now();
  auto spec = study_spec(1, 5, 6000, 1000, {{LossKind::kJbce, Classifier::kDeep, 40, 1}});
  const auto result = run_grid(spec);
  double mean = 0.0;
  for (const auto& row : result.rows) mean += row.coverage90;
  mean /= static_cast<double>(result.rows.size());
  const double t = seconds_since(start);
  return {result.all_ok() && mean >= 0.85 && mean <= 0.95 && t < 1200.0,
          "mean coverage " + num(mean) + " (band [0.85, 0.95]), " + num(t) + " s (limit 1200)"};
}

// ------------------------------------------------------------------ 6-8
// One Model 3 study feeds criteria 6 to 8; each criterion runs its own cells
// under the shared seed, so every replicate sees the same data throughout.
const GridCell kJbceDeep40{LossKind::kJbce, Classifier::kDeep, 40, 1};
const GridCell kLogistic40{LossKind::kMultinomial, Classifier::kLogistic, 40, 1};
constexpr std::size_t kStudyReplicates = 10;

GridResult& model3_results() {
  static GridResult all;
  return all;
}

GridResult run_model3(std::vector<GridCell> cells) {
  auto& cache = model3_results();
  std::vector<GridCell> missing;
  for (const auto& c : cells) {
    const bool have = std::any_of(cache.rows.begin(), cache.rows.end(),
                                  [&](const GridRow& r) { return r.cell == c; });
    if (!have) missing.push_back(c);
  }
  if (!missing.empty()) {
    const auto fresh = run_grid(study_spec(3, kStudyReplicates, 2000, 1000, missing));
    cache.rows.insert(cache.rows.end(), fresh.rows.begin(), fresh.rows.end());
  }
  return cache;
}

Outcome deep_beats_logistic() {
  const auto start = std::chrono::steady_clock::now();
  const auto result = run_model3({kJbceDeep40, kLogistic40});
  const auto deep = result.crps_by_replicate(kJbceDeep40, kStudyReplicates);
  const auto logit = result.crps_by_replicate(kLogistic40, kStudyReplicates);
  std::size_t wins = 0;
  for (std::size_t r = 0; r < kStudyReplicates; ++r) wins += deep[r] < logit[r] ? 1 : 0;
  const double t = seconds_since(start);
  return {result.all_ok() && wins >= 8 && t < 1800.0,
          std::to_string(wins) + "/10 replicates (need 8), mean CRPS deep " +
              num(result.mean_crps(kJbceDeep40)) + " vs logistic " +
              num(result.mean_crps(kLogistic40)) + ", " + num(t) + " s (limit 1800)"};
}

Outcome bin_count_stability() {
  std::vector<GridCell> cells;
  for (LossKind loss : {LossKind::kJbce, LossKind::kMultinomial}) {
    for (std::size_t m : {10, 40, 160}) cells.push_back({loss, Classifier::kDeep, m, 1});
  }
  const auto result = run_model3(cells);
  auto spread = [&](LossKind loss, std::string& means) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t m : {10, 40, 160}) {
      const double v = result.mean_crps({loss, Classifier::kDeep, m, 1});
      means += (means.empty() ? "" : ", ") + std::string("m=") + std::to_string(m) + " " + num(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi - lo;
  };
  std::string jm, mm;
  const double js = spread(LossKind::kJbce, jm);
  const double ms = spread(LossKind::kMultinomial, mm);
  return {result.all_ok() && std::isfinite(js) && std::isfinite(ms) && js < ms,
          "JBCE spread " + num(js) + " [" + jm + "], multinomial spread " + num(ms) + " [" + mm +
              "]"};
}

Outcome ensemble_improvement() {
  const GridCell ensemble{LossKind::kJbce, Classifier::kDeep, 40, 20};
  const auto result = run_model3({kJbceDeep40, ensemble});
  const double single = result.mean_crps(kJbceDeep40);
  const double mixed = result.mean_crps(ensemble);
  return {result.all_ok() && mixed <= single + 0.002,
          "K=20 ensemble " + num(mixed) + " vs single " + num(single) + " (allowance 0.002)"};
}

// ------------------------------------------------------------------ 9
Outcome consistency() {
  const auto start = std::chrono::steady_clock::now();
  ConsistencySpec spec;
  spec.seed = 909;
  const auto result = run_consistency(spec);
  std::string medians;
  for (const auto& s : result.summary) {
    medians += (medians.empty() ? "" : ", ") + std::string("n=") + std::to_string(s.n) + " (" +
               std::to_string(s.bins) + " bins) " + num(s.median_ise);
  }
  const double t = seconds_since(start);
  return {result.all_ok() && result.strictly_decreasing() && t < 600.0,
          "median ISE " + medians + ", " + num(t) + " s (limit 600)"};
}

// ------------------------------------------------------------------ 10
Outcome rolling_substitute() {
  Dataset data = synthetic_seasonal(parse_timestamp("2013-01-01"), 730, 4, 1010);
  append_calendar_features(data);
  const RollingPlan plan = monthly_plan(data.timestamps, 12, 12);
  ModelRecipe recipe;
  recipe.cuts = 20;
  recipe.network.hidden_sizes = {32, 32};
  recipe.network.dropout_rate = 0.0;
  recipe.training.epochs = 20;
  recipe.training.learning_rate = 0.005;
  recipe.lower = 0.0;
  recipe.upper = 1.0;
  recipe.seed = 10;
  const auto a = rolling_eval(data, plan, recipe);
  const auto b = rolling_eval(data, plan, recipe);
  bool finite = true, leak_free = true;
  for (const auto& f : a.folds) {
    finite = finite && std::isfinite(f.report.crps) && std::isfinite(f.report.aqtl) &&
             std::isfinite(f.report.coverage90);
    leak_free = leak_free && f.max_train_time && f.min_test_time && f.leakage_free();
  }
  const auto change = relative_change(a, b);
  bool zero = change.mean_crps == 0.0 && change.mean_aqtl == 0.0;
  for (double c : change.crps) zero = zero && c == 0.0;
  for (double c : change.aqtl) zero = zero && c == 0.0;
  return {a.folds.size() == 12 && a.all_ok() && finite && leak_free && zero,
          std::to_string(a.folds.size()) + " folds, all ok " + (a.all_ok() ? "yes" : "no") +
              ", finite " + (finite ? "yes" : "no") + ", leakage-free " +
              (leak_free ? "yes" : "no") + ", relative change " + num(change.mean_crps) + " / " +
              num(change.mean_aqtl) + ", mean CRPS " + num(a.mean_crps())};
}

// ------------------------------------------------------------------ 11
Outcome simulation_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  // Mixing rate of the two-component models.
  std::vector<int> pi;
  gen_model2(100000, 1111, &pi);
  double rate = 0.0;
  for (int v : pi) rate += v;
  rate /= static_cast<double>(pi.size());

  Rng rng(1112);
  double mean = 0.0, sq = 0.0;
  constexpr int kDraws = 100000;
  std::vector<double> draws(kDraws);
  for (auto& d : draws) {
    d = sample_skew_normal(0.0, 1.0, -5.0, rng);
    mean += d;
  }
  mean /= kDraws;
  for (double d : draws) sq += (d - mean) * (d - mean);
  const double var = sq / (kDraws - 1);

  // Empirical cdf of Model 3 responses with X1 in a narrow slab around 5.
  const auto sim = gen_model3(100000, 1113);
  std::vector<double> ys;
  for (std::size_t r = 0; r < sim.data.rows(); ++r) {
    const double x = sim.data.x(static_cast<Eigen::Index>(r), 0);
    if (x > 4.9 && x < 5.1) ys.push_back(sim.data.y(static_cast<Eigen::Index>(r)));
  }
  const std::array<double, 1> x0{5.0};
  double slab = 0.0;
  for (int k = 0; k <= 40; ++k) {
    const double y = -3.0 + 6.0 * k / 40.0;
    const double emp = static_cast<double>(std::count_if(ys.begin(), ys.end(),
                                                         [&](double v) { return v <= y; })) /
                       static_cast<double>(ys.size());
    slab = std::max(slab, std::abs(emp - sim.truth.cdf(x0, y)));
  }
  const double t = seconds_since(start);
  const bool ok = std::abs(rate - 0.5) <= 0.02 && std::abs(mean + 0.7824) <= 0.01 &&
                  std::abs(var - 0.3880) <= 0.01 && slab <= 0.03 && t < 120.0;
  return {ok, "Bernoulli rate " + num(rate) + ", skew-normal mean " + num(mean) + " variance " +
                  num(var) + ", slab cdf gap " + num(slab) + " over " +
                  std::to_string(ys.size()) + " rows, " + num(t) + " s (limit 120)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradient_correctness},
      {2, "monotone cdf", monotone_cdf},
      {3, "scoring oracles", scoring_oracles},
      {4, "quantile/cdf round trip", quantile_round_trip},
      {5, "Model 1 interval coverage", model1_coverage},
      {6, "deep network beats logistic regression", deep_beats_logistic},
      {7, "bin-count stability", bin_count_stability},
      {8, "ensemble improvement", ensemble_improvement},
      {9, "consistency", consistency},
      {10, "rolling harness substitute", rolling_substitute},
      {11, "simulation fidelity", simulation_fidelity},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
