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

#include "distreg/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

#include "distreg/error.hpp"
#include "distreg/parallel.hpp"
#include "distreg/seeding.hpp"

namespace distreg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("field '") + key + "': " + e.message());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("field '") + key + "': " + e.what());
  }
}

template <class T, class Convert>
void read_enum_list(const nlohmann::json& j, const char* key, std::vector<T>& out,
                    Convert convert) {
  std::vector<std::string> names;
  read_field(j, key, names);
  if (!j.contains(key)) return;
  out.clear();
  try {
    for (const auto& n : names) out.push_back(convert(n));
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("field '") + key + "': " + e.message());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("field '") + key + "': " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const char* what) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, std::string(what) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw Error(ErrorCode::kConfig, std::string(what) + ": unknown field '" + key + "'");
    }
  }
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

std::string_view to_string(Classifier c) {
  return c == Classifier::kDeep ? "deep" : "logistic";
}

Classifier classifier_from_string(std::string_view s) {
  if (s == "deep") return Classifier::kDeep;
  if (s == "logistic") return Classifier::kLogistic;
  throw Error(ErrorCode::kConfig, "unknown classifier '" + std::string(s) + "'");
}

void ExperimentSpec::validate() const {
  if (model < 1 || model > 4) {
    throw Error(ErrorCode::kConfig, "model must be 1..4, got " + std::to_string(model));
  }
  if (replicates < 1) throw Error(ErrorCode::kConfig, "replicates must be >= 1");
  if (n_train < 2 || n_test < 1) throw Error(ErrorCode::kConfig, "n_train >= 2 and n_test >= 1");
  const auto configs = configurations();
  if (configs.empty()) throw Error(ErrorCode::kConfig, "the grid has no configurations");
  for (const auto& c : configs) {
    if (c.bins < 1) throw Error(ErrorCode::kConfig, "all bin counts must be >= 1");
    if (c.ensemble < 1) throw Error(ErrorCode::kConfig, "ensemble sizes must be >= 1");
  }
  NetworkConfig probe = network;
  probe.input_dim = 1;
  probe.output_dim = 2;
  probe.validate();
  training.validate();
  if (!(range_margin >= 0.0)) throw Error(ErrorCode::kConfig, "range_margin must be >= 0");
}

std::vector<GridCell> ExperimentSpec::configurations() const {
  if (!cells.empty()) return cells;
  std::vector<GridCell> out;
  for (auto m : bins) {
    for (auto loss : losses) {
      for (auto cls : classifiers) {
        for (auto k : ensemble_sizes) out.push_back({loss, cls, m, k});
      }
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const ExperimentSpec& s) {
  std::vector<std::string> losses, classifiers;
  for (auto l : s.losses) losses.emplace_back(to_string(l));
  for (auto c : s.classifiers) classifiers.emplace_back(to_string(c));
  j = nlohmann::json{{"model", s.model},
                     {"replicates", s.replicates},
                     {"n_train", s.n_train},
                     {"n_test", s.n_test},
                     {"bins", s.bins},
                     {"losses", losses},
                     {"classifiers", classifiers},
                     {"ensemble_sizes", s.ensemble_sizes},
                     {"network", s.network},
                     {"training", s.training},
                     {"grid_points", s.scoring.grid_points},
                     {"range_margin", s.range_margin},
                     {"seed", s.seed},
                     {"threads", s.threads}};
  if (!s.cells.empty()) {
    auto& cells = j["cells"] = nlohmann::json::array();
    for (const auto& c : s.cells) {
      cells.push_back({{"loss", to_string(c.loss)},
                       {"classifier", to_string(c.classifier)},
                       {"bins", c.bins},
                       {"ensemble", c.ensemble}});
    }
  }
}

void from_json(const nlohmann::json& j, ExperimentSpec& s) {
  reject_unknown(j,
                 {"model", "replicates", "n_train", "n_test", "bins", "losses", "classifiers",
                  "ensemble_sizes", "cells", "network", "training", "grid_points",
                  "range_margin", "seed", "threads"},
                 "experiment spec");
  read_field(j, "model", s.model);
  read_field(j, "replicates", s.replicates);
  read_field(j, "n_train", s.n_train);
  read_field(j, "n_test", s.n_test);
  read_field(j, "bins", s.bins);
  read_enum_list(j, "losses", s.losses, [](const std::string& n) { return loss_from_string(n); });
  read_enum_list(j, "classifiers", s.classifiers,
                 [](const std::string& n) { return classifier_from_string(n); });
  read_field(j, "ensemble_sizes", s.ensemble_sizes);
  read_field(j, "network", s.network);
  read_field(j, "training", s.training);
  read_field(j, "grid_points", s.scoring.grid_points);
  read_field(j, "range_margin", s.range_margin);
  read_field(j, "seed", s.seed);
  read_field(j, "threads", s.threads);
  if (j.contains("cells")) {
    s.cells.clear();
    try {
      for (const auto& c : j.at("cells")) {
        GridCell cell;
        if (c.contains("loss")) cell.loss = loss_from_string(c.at("loss").get<std::string>());
        if (c.contains("classifier")) {
          cell.classifier = classifier_from_string(c.at("classifier").get<std::string>());
        }
        cell.bins = c.value("bins", cell.bins);
        cell.ensemble = c.value("ensemble", cell.ensemble);
        s.cells.push_back(cell);
      }
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kConfig, std::string("field 'cells': ") + e.what());
    }
  }
}

bool GridResult::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const GridRow& r) { return r.ok(); });
}

double GridResult::mean_crps(const GridCell& cell) const {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.cell == cell && r.ok()) {
      total += r.crps;
      ++n;
    }
  }
  return n == 0 ? kNaN : total / static_cast<double>(n);
}

std::vector<double> GridResult::crps_by_replicate(const GridCell& cell,
                                                  std::size_t replicates) const {
  std::vector<double> out(replicates, kNaN);
  for (const auto& r : rows) {
    if (r.cell == cell && r.ok() && r.replicate < replicates) out[r.replicate] = r.crps;
  }
  return out;
}

GridResult run_grid(const ExperimentSpec& spec,
                    const std::function<void(const GridRow&)>& progress) {
  spec.validate();
  const auto configs = spec.configurations();
  struct ReplicateData {
    Dataset train;
    Dataset test;
  };
  std::vector<ReplicateData> data;
  data.reserve(spec.replicates);
  for (std::size_t r = 0; r < spec.replicates; ++r) {
    // One draw per replicate so that laws with random parameters (Model 1)
    // share them between training and test rows.
    const Dataset all =
        simulate(spec.model, spec.n_train + spec.n_test, child_seed(spec.seed, r)).data;
    data.push_back({all.slice(0, spec.n_train), all.slice(spec.n_train, all.rows())});
  }

  GridResult result;
  result.rows.resize(spec.replicates * configs.size());
  std::mutex progress_mutex;
  parallel_for(result.rows.size(), spec.threads, [&](std::size_t index) {
    const std::size_t r = index / configs.size();
    const GridCell& cell = configs[index % configs.size()];
    GridRow row;
    row.model = spec.model;
    row.replicate = r;
    row.cell = cell;
    const auto start = std::chrono::steady_clock::now();
    try {
      const Dataset& train = data[r].train;
      const auto [lower, upper] = widened_range(train.y, spec.range_margin);
      NetworkConfig net = cell.classifier == Classifier::kDeep
                              ? spec.network
                              : NetworkConfig::logistic(train.features(), cell.bins + 1);
      TrainConfig tc = spec.training;
      tc.loss = cell.loss;
      tc.seed = child_seed(child_seed(spec.seed, r), 1);
      ScoreReport report;
      if (cell.ensemble > 1) {
        const auto model = fit_ensemble(train, lower, upper, cell.bins, cell.ensemble, net, tc,
                                        tc.seed);
        report = score_testset(model, data[r].test, spec.scoring);
      } else {
        const auto model = fit_estimator(train, even_partition(lower, upper, cell.bins), net, tc);
        report = score_testset(model, data[r].test, spec.scoring);
      }
      row.crps = report.crps;
      row.aqtl = report.aqtl;
      row.coverage90 = report.coverage90;
    } catch (const std::exception& e) {
      row.crps = row.aqtl = row.coverage90 = kNaN;
      row.status = std::string("error: ") + e.what();
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.rows[index] = row;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(result.rows[index]);
    }
  });
  return result;
}

void write_grid_csv(const GridResult& result, std::ostream& out) {
  out << "model,replicate,loss,classifier,bins,ensembleK,crps,aqtl,coverage90,wall_seconds,"
         "status\n";
  for (const auto& r : result.rows) {
    out << r.model << ',' << r.replicate << ',' << to_string(r.cell.loss) << ','
        << to_string(r.cell.classifier) << ',' << r.cell.bins << ',' << r.cell.ensemble << ','
        << fmt(r.crps) << ',' << fmt(r.aqtl) << ',' << fmt(r.coverage90) << ','
        << fmt(r.wall_seconds) << ',' << csv_escape(r.status) << '\n';
  }
}

std::size_t cube_root_bins(std::size_t n) {
  std::size_t k = 1;
  while (k * k * k < n) ++k;
  return k;
}

void ConsistencySpec::validate() const {
  if (sample_sizes.empty()) throw Error(ErrorCode::kConfig, "sample_sizes is empty");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 2) throw Error(ErrorCode::kConfig, "sample sizes must be >= 2");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) {
      throw Error(ErrorCode::kConfig, "sample sizes must be strictly increasing");
    }
  }
  if (bin_rule == BinRule::kFixed && fixed_bins < 2) {
    throw Error(ErrorCode::kConfig, "fixed_bins must be >= 2");
  }
  if (replicates < 1 || probes < 1 || quadrature_points < 1) {
    throw Error(ErrorCode::kConfig, "replicates, probes and quadrature_points must be >= 1");
  }
  if (!(law.sd > 0.0) || !(law.lower < law.upper)) {
    throw Error(ErrorCode::kConfig, "law needs sd > 0 and lower < upper");
  }
  training.validate();
}

std::size_t ConsistencySpec::bins_for(std::size_t n) const {
  const std::size_t k = bin_rule == BinRule::kCubeRoot ? cube_root_bins(n) : fixed_bins;
  return std::max<std::size_t>(k, 2);
}

void to_json(nlohmann::json& j, const ConsistencySpec& s) {
  j = nlohmann::json{{"sample_sizes", s.sample_sizes},
                     {"bin_rule", s.bin_rule == BinRule::kCubeRoot ? "cube-root" : "fixed"},
                     {"fixed_bins", s.fixed_bins},
                     {"replicates", s.replicates},
                     {"probes", s.probes},
                     {"quadrature_points", s.quadrature_points},
                     {"law",
                      {{"intercept", s.law.intercept},
                       {"slope", s.law.slope},
                       {"sd", s.law.sd},
                       {"lower", s.law.lower},
                       {"upper", s.law.upper}}},
                     {"training", s.training},
                     {"seed", s.seed},
                     {"threads", s.threads}};
}

void from_json(const nlohmann::json& j, ConsistencySpec& s) {
  reject_unknown(j,
                 {"sample_sizes", "bin_rule", "fixed_bins", "replicates", "probes",
                  "quadrature_points", "law", "training", "seed", "threads"},
                 "consistency spec");
  read_field(j, "sample_sizes", s.sample_sizes);
  std::string rule;
  read_field(j, "bin_rule", rule);
  if (rule == "cube-root") {
    s.bin_rule = BinRule::kCubeRoot;
  } else if (rule == "fixed") {
    s.bin_rule = BinRule::kFixed;
  } else if (!rule.empty()) {
    throw Error(ErrorCode::kConfig, "field 'bin_rule': expected cube-root or fixed");
  }
  read_field(j, "fixed_bins", s.fixed_bins);
  read_field(j, "replicates", s.replicates);
  read_field(j, "probes", s.probes);
  read_field(j, "quadrature_points", s.quadrature_points);
  if (j.contains("law")) {
    const auto& law = j.at("law");
    read_field(law, "intercept", s.law.intercept);
    read_field(law, "slope", s.law.slope);
    read_field(law, "sd", s.law.sd);
    read_field(law, "lower", s.law.lower);
    read_field(law, "upper", s.law.upper);
  }
  read_field(j, "training", s.training);
  read_field(j, "seed", s.seed);
  read_field(j, "threads", s.threads);
}

double integrated_squared_error(const std::function<double(double)>& f_hat,
                                const std::function<double(double)>& f, double lower,
                                double upper, std::size_t points) {
  if (!(lower < upper)) throw Error(ErrorCode::kInvalidRange, "ISE needs lower < upper");
  if (points < 1) throw Error(ErrorCode::kInvalidCount, "ISE needs at least one point");
  const double h = (upper - lower) / static_cast<double>(points);
  double total = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double y = lower + (static_cast<double>(i) + 0.5) * h;
    const double d = f_hat(y) - f(y);
    total += d * d;
  }
  return total * h;
}

std::vector<double> probe_points(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = (static_cast<double>(i) + unit(rng)) / static_cast<double>(count);
  }
  return out;
}

bool ConsistencyResult::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.status == "ok"; });
}

bool ConsistencyResult::strictly_decreasing() const {
  for (std::size_t i = 1; i < summary.size(); ++i) {
    if (!(summary[i].median_ise < summary[i - 1].median_ise)) return false;
  }
  return !summary.empty();
}

ConsistencyResult run_consistency(const ConsistencySpec& spec) {
  spec.validate();
  const auto probes = probe_points(spec.probes, child_seed(spec.seed, ~std::uint64_t{0}));
  ConsistencyResult result;
  result.rows.resize(spec.sample_sizes.size() * spec.replicates);
  parallel_for(result.rows.size(), spec.threads, [&](std::size_t index) {
    const std::size_t i = index / spec.replicates;
    const std::size_t r = index % spec.replicates;
    ConsistencyRow row;
    row.n = spec.sample_sizes[i];
    row.bins = spec.bins_for(row.n);
    row.replicate = r;
    try {
      const std::uint64_t data_seed = child_seed(child_seed(spec.seed, i), r);
      const auto sim = gen_truncated_linear_normal(row.n, data_seed, spec.law);
      TrainConfig tc = spec.training;
      tc.seed = child_seed(data_seed, 1);
      const auto est =
          fit_estimator(sim.data, even_partition(spec.law.lower, spec.law.upper, row.bins - 1),
                        NetworkConfig::logistic(1, row.bins), tc);
      double total = 0.0;
      for (double x : probes) {
        const std::array<double, 1> xs{x};
        const auto dist = est.predict(xs);
        total += integrated_squared_error([&](double y) { return dist.pdf(y); },
                                          [&](double y) { return sim.truth.pdf(xs, y); },
                                          spec.law.lower, spec.law.upper,
                                          spec.quadrature_points);
      }
      row.ise = total / static_cast<double>(probes.size());
    } catch (const std::exception& e) {
      row.ise = kNaN;
      row.status = std::string("error: ") + e.what();
    }
    result.rows[index] = row;
  });
  for (std::size_t i = 0; i < spec.sample_sizes.size(); ++i) {
    std::vector<double> ises;
    for (std::size_t r = 0; r < spec.replicates; ++r) {
      ises.push_back(result.rows[i * spec.replicates + r].ise);
    }
    result.summary.push_back(
        {spec.sample_sizes[i], spec.bins_for(spec.sample_sizes[i]), median(std::move(ises))});
  }
  return result;
}

void write_consistency_csv(const ConsistencyResult& result, std::ostream& out) {
  out << "n,bins,replicate,ise,status\n";
  for (const auto& r : result.rows) {
    out << r.n << ',' << r.bins << ',' << r.replicate << ',' << fmt(r.ise) << ','
        << csv_escape(r.status) << '\n';
  }
}

void write_consistency_summary_csv(const ConsistencyResult& result, std::ostream& out) {
  out << "n,bins,median_ise\n";
  for (const auto& s : result.summary) {
    out << s.n << ',' << s.bins << ',' << fmt(s.median_ise) << '\n';
  }
}

}  // namespace distreg
