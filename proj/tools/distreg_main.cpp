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

// distreg command-line tool: simulate, fit, predict, score, rolling,
// experiment.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "distreg/dataio.hpp"
#include "distreg/error.hpp"
#include "distreg/estimator.hpp"
#include "distreg/experiments.hpp"
#include "distreg/scoring.hpp"
#include "distreg/simgen.hpp"

namespace {

using distreg::Error;
using distreg::ErrorCode;
using nlohmann::json;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  bool quiet = false;
};

void info(const Globals& g, const std::string& line) {
  if (!g.quiet) std::cout << line << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, "'" + path + "': " + e.what());
  }
}

json load_config(const Globals& g) {
  if (g.config.empty()) return json::object();
  json j = read_json_file(g.config);
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "config must be a JSON object");
  return j;
}

template <class T>
T config_field(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("field '") + key + "': " + e.message());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("field '") + key + "': " + e.what());
  }
}

std::optional<distreg::TableSchema> config_schema(const json& cfg) {
  if (!cfg.contains("schema")) return std::nullopt;
  auto schema = config_field<distreg::TableSchema>(cfg, "schema", {});
  schema.validate();
  return schema;
}

distreg::Dataset load_data(const std::string& path,
                           const std::optional<distreg::TableSchema>& schema) {
  return schema ? distreg::load_csv(path, *schema) : distreg::load_csv(path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

std::string require_out(const Globals& g) {
  if (g.out.empty()) throw Error(ErrorCode::kConfig, "--out is required");
  return g.out;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  int model = 0;
  std::size_t n = 1000;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  const auto out = require_out(g);
  const auto sim = distreg::simulate(a.model, a.n, g.seed.value_or(0));
  distreg::write_csv(sim.data, out);
  info(g, "wrote " + std::to_string(sim.data.rows()) + " rows to " + out);
  return 0;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string data;
  std::optional<std::string> loss;
  std::optional<std::string> partition;
  std::optional<std::string> classifier;
  std::optional<std::size_t> cuts;
  std::optional<std::size_t> members;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> learning_rate;
  std::optional<double> dropout;
  std::optional<std::vector<std::size_t>> hidden;
  unsigned threads = 1;
};

distreg::ModelRecipe build_recipe(const Globals& g, const json& cfg, const FitArgs& a,
                                  const std::optional<distreg::TableSchema>& schema) {
  auto recipe = config_field<distreg::ModelRecipe>(cfg, "recipe", {});
  if (schema && schema->lower && !recipe.lower) {
    recipe.lower = schema->lower;
    recipe.upper = schema->upper;
  }
  if (a.loss) recipe.training.loss = distreg::loss_from_string(*a.loss);
  if (a.partition) {
    distreg::from_json(json{{"partition", *a.partition}}, recipe);
  }
  if (a.classifier) {
    const auto cls = distreg::classifier_from_string(*a.classifier);
    if (cls == distreg::Classifier::kLogistic) {
      recipe.network.hidden_sizes.clear();
      recipe.network.dropout_rate = 0.0;
    }
  }
  if (a.cuts) recipe.cuts = *a.cuts;
  if (a.members) recipe.members = *a.members;
  if (a.epochs) recipe.training.epochs = *a.epochs;
  if (a.batch_size) recipe.training.batch_size = *a.batch_size;
  if (a.learning_rate) recipe.training.learning_rate = *a.learning_rate;
  if (a.dropout) recipe.network.dropout_rate = *a.dropout;
  if (a.hidden) recipe.network.hidden_sizes = *a.hidden;
  if (g.seed) recipe.seed = *g.seed;
  if (recipe.cuts == 0) throw Error(ErrorCode::kConfig, "cuts must be >= 1");
  if (recipe.members == 0) throw Error(ErrorCode::kConfig, "members must be >= 1");
  // Validate before touching the data.
  distreg::NetworkConfig probe = recipe.network;
  probe.input_dim = 1;
  probe.output_dim = recipe.cuts + 1;
  probe.validate();
  recipe.training.validate();
  return recipe;
}

double final_loss(const distreg::ConditionalModel& model) {
  if (const auto* e = dynamic_cast<const distreg::DensityEstimator*>(&model)) {
    return e->loss_trace().empty() ? std::nan("") : e->loss_trace().back();
  }
  const auto& ens = dynamic_cast<const distreg::EnsembleEstimator&>(model);
  double total = 0.0;
  for (const auto& m : ens.members()) total += m.loss_trace().back();
  return total / static_cast<double>(ens.size());
}

int cmd_fit(const Globals& g, const FitArgs& a) {
  const auto out = require_out(g);
  const json cfg = load_config(g);
  const auto schema = config_schema(cfg);
  const auto recipe = build_recipe(g, cfg, a, schema);
  const auto data = load_data(a.data, schema);
  const auto model = distreg::fit_recipe(recipe, data, a.threads);
  json file{{"estimator", distreg::conditional_model_to_json(*model)},
            {"features", data.feature_names}};
  if (schema) file["schema"] = *schema;
  write_text(out, file.dump() + "\n");
  std::cout << json{{"status", "ok"},
                    {"rows", data.rows()},
                    {"members", recipe.members},
                    {"final_loss", final_loss(*model)},
                    {"model", out}}
                   .dump()
            << '\n';
  return 0;
}

// ----------------------------------------------------------- predict/score

struct LoadedFile {
  std::unique_ptr<distreg::ConditionalModel> model;
  std::optional<distreg::TableSchema> schema;
};

LoadedFile load_model_file(const std::string& path) {
  const json j = read_json_file(path);
  LoadedFile f;
  try {
    f.model = distreg::conditional_model_from_json(j.contains("estimator") ? j.at("estimator") : j);
    if (j.contains("schema")) f.schema = j.at("schema").get<distreg::TableSchema>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kParseError, "'" + path + "' is not a model file: " + e.what());
  }
  return f;
}

void check_features(const distreg::ConditionalModel& model, const distreg::Dataset& data) {
  if (model.input_dim() != data.features()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature mismatch: model expects " + std::to_string(model.input_dim()) +
                    " features, data has " + std::to_string(data.features()));
  }
}

std::vector<double> parse_taus(const std::string& text) {
  std::vector<double> taus;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double t = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), t);
    if (ec != std::errc() || ptr != item.data() + item.size() || !(t > 0.0 && t < 1.0)) {
      throw Error(ErrorCode::kConfig, "taus: '" + item + "' is not in (0, 1)");
    }
    taus.push_back(t);
  }
  if (taus.empty()) throw Error(ErrorCode::kConfig, "taus: empty list");
  return taus;
}

std::string tau_column(double tau) {
  const double pct = tau * 100.0;
  if (std::abs(pct - std::round(pct)) < 1e-9) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "q%02d", static_cast<int>(std::round(pct)));
    return buf;
  }
  return "q" + fmt(tau);
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string taus = "0.05,0.5,0.95";
  double level = 0.9;
  std::string density_out;
  std::size_t grid_points = 100;
};

int cmd_predict(const Globals& g, const PredictArgs& a) {
  const auto out = require_out(g);
  const auto taus = parse_taus(a.taus);
  if (!(a.level > 0.0 && a.level < 1.0)) throw Error(ErrorCode::kConfig, "level must be in (0, 1)");
  if (a.grid_points < 2) throw Error(ErrorCode::kConfig, "grid-points must be >= 2");
  const auto file = load_model_file(a.model);
  const auto data = load_data(a.data, file.schema);
  check_features(*file.model, data);

  std::ostringstream csv;
  csv << "row";
  for (double t : taus) csv << ',' << tau_column(t);
  csv << ",lo,hi\n";
  std::ostringstream dens;
  const bool want_density = !a.density_out.empty();
  const double lower = file.model->lower(), upper = file.model->upper();
  const double h = (upper - lower) / static_cast<double>(a.grid_points - 1);
  if (want_density) dens << "row,y,density\n";
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const auto dist = file.model->distribution(data.row(r));
    csv << r;
    for (double t : taus) csv << ',' << fmt(dist->quantile(t));
    const auto [lo, hi] = distreg::predict_interval(*dist, a.level);
    csv << ',' << fmt(lo) << ',' << fmt(hi) << '\n';
    if (want_density) {
      // Cell-averaged density around each grid point.
      for (std::size_t k = 0; k < a.grid_points; ++k) {
        const double y = lower + static_cast<double>(k) * h;
        const double f = (dist->cdf(y + 0.5 * h) - dist->cdf(y - 0.5 * h)) / h;
        dens << r << ',' << fmt(y) << ',' << fmt(f) << '\n';
      }
    }
  }
  write_text(out, csv.str());
  if (want_density) write_text(a.density_out, dens.str());
  info(g, "wrote " + std::to_string(data.rows()) + " rows to " + out);
  return 0;
}

struct ScoreArgs {
  std::string model;
  std::string data;
  std::size_t grid_points = distreg::kDefaultCrpsGridPoints;
};

int cmd_score(const Globals& g, const ScoreArgs& a) {
  const auto file = load_model_file(a.model);
  const auto data = load_data(a.data, file.schema);
  check_features(*file.model, data);
  distreg::ScoreOptions options;
  options.grid_points = a.grid_points;
  const auto report = distreg::score_testset(*file.model, data, options);
  if (!g.out.empty()) {
    write_text(g.out, distreg::ScoreReport::csv_header() + "\n" + report.csv_row() + "\n");
  }
  std::cout << json(report).dump() << '\n';
  return 0;
}

// ----------------------------------------------------------------- rolling

struct RollingArgs {
  std::string data;
  std::size_t synthetic_days = 0;
  std::string summary;
};

distreg::RollingPlan build_plan(const json& cfg, const distreg::Dataset& data) {
  const json plan = config_field<json>(cfg, "plan", json{{"kind", "monthly"}});
  const auto kind = config_field<std::string>(plan, "kind", "monthly");
  if (kind == "monthly") {
    return distreg::monthly_plan(data.timestamps,
                                 config_field<std::size_t>(plan, "initial_months", 12),
                                 config_field<std::size_t>(plan, "max_folds", 12));
  }
  if (kind == "rows") {
    return distreg::row_plan(data.rows(), config_field<std::size_t>(plan, "initial_rows", 0),
                             config_field<std::size_t>(plan, "test_rows", 0),
                             config_field<std::size_t>(plan, "folds", 0));
  }
  throw Error(ErrorCode::kConfig, "field 'plan.kind': expected monthly or rows");
}

int cmd_rolling(const Globals& g, const RollingArgs& a) {
  const auto out = require_out(g);
  const json cfg = load_config(g);
  const auto schema = config_schema(cfg);
  distreg::Dataset data;
  if (a.synthetic_days > 0) {
    data = distreg::synthetic_seasonal(distreg::parse_timestamp("2013-01-01"), a.synthetic_days,
                                       4, g.seed.value_or(0));
    distreg::append_calendar_features(data);
  } else if (!a.data.empty()) {
    data = load_data(a.data, schema);
  } else {
    throw Error(ErrorCode::kConfig, "give --data or --synthetic-days");
  }
  const auto plan = build_plan(cfg, data);
  auto recipe_a = config_field<distreg::ModelRecipe>(cfg, "recipe_a", {});
  std::optional<distreg::ModelRecipe> recipe_b;
  if (cfg.contains("recipe_b")) recipe_b = config_field<distreg::ModelRecipe>(cfg, "recipe_b", {});
  if (g.seed) {
    recipe_a.seed = *g.seed;
    if (recipe_b) recipe_b->seed = *g.seed;
  }
  for (auto* r : {&recipe_a, recipe_b ? &*recipe_b : nullptr}) {
    if (r && schema && schema->lower && !r->lower) {
      r->lower = schema->lower;
      r->upper = schema->upper;
    }
  }
  distreg::ScoreOptions options;
  options.grid_points = config_field<std::size_t>(cfg, "grid_points", options.grid_points);

  const auto result_a = distreg::rolling_eval(data, plan, recipe_a, options);
  std::optional<distreg::RollingResult> result_b;
  std::optional<distreg::RelativeChange> change;
  if (recipe_b) {
    result_b = distreg::rolling_eval(data, plan, *recipe_b, options);
    change = distreg::relative_change(result_a, *result_b);
  }
  std::ostringstream csv;
  distreg::write_fold_csv(result_a, change ? &*change : nullptr, csv);
  write_text(out, csv.str());
  const json summary = distreg::rolling_summary_json(result_a, result_b ? &*result_b : nullptr,
                                                     change ? &*change : nullptr);
  if (!a.summary.empty()) write_text(a.summary, summary.dump(2) + "\n");
  info(g, summary.dump());
  const bool ok = result_a.all_ok() && (!result_b || result_b->all_ok());
  if (!ok) {
    std::cerr << json{{"status", "error"}, {"code", "fold-failed"},
                      {"message", "one or more folds failed; see the summary"}}
                     .dump()
              << '\n';
  }
  return ok ? 0 : 1;
}

// -------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string spec;
  std::string consistency_out;
};

int cmd_experiment(const Globals& g, const ExperimentArgs& a) {
  const auto out = require_out(g);
  const json spec = a.spec.empty() ? load_config(g) : read_json_file(a.spec);
  if (!spec.is_object() || (!spec.contains("grid") && !spec.contains("consistency"))) {
    throw Error(ErrorCode::kConfig, "experiment spec needs a 'grid' or 'consistency' object");
  }
  json summary{{"status", "ok"}};
  bool ok = true;
  if (spec.contains("grid")) {
    auto grid = config_field<distreg::ExperimentSpec>(spec, "grid", {});
    if (g.seed) grid.seed = *g.seed;
    const auto result = distreg::run_grid(grid, [&](const distreg::GridRow& row) {
      info(g, "replicate " + std::to_string(row.replicate) + " " +
                  std::string(distreg::to_string(row.cell.loss)) + "/" +
                  std::string(distreg::to_string(row.cell.classifier)) + " m=" +
                  std::to_string(row.cell.bins) + " K=" + std::to_string(row.cell.ensemble) +
                  " crps=" + fmt(row.crps) + " " + row.status);
    });
    std::ostringstream csv;
    distreg::write_grid_csv(result, csv);
    write_text(out, csv.str());
    std::size_t failed = 0;
    for (const auto& r : result.rows) failed += r.ok() ? 0 : 1;
    summary["grid"] = {{"rows", result.rows.size()}, {"failed", failed}, {"csv", out}};
    ok = ok && failed == 0;
  }
  if (spec.contains("consistency")) {
    auto cons = config_field<distreg::ConsistencySpec>(spec, "consistency", {});
    if (g.seed) cons.seed = *g.seed;
    const auto result = distreg::run_consistency(cons);
    const std::string path = !a.consistency_out.empty() ? a.consistency_out
                             : spec.contains("grid")    ? out + ".consistency.csv"
                                                        : out;
    std::ostringstream csv;
    distreg::write_consistency_csv(result, csv);
    write_text(path, csv.str());
    json medians = json::array();
    for (const auto& s : result.summary) {
      medians.push_back({{"n", s.n}, {"bins", s.bins}, {"median_ise", s.median_ise}});
    }
    summary["consistency"] = {{"csv", path},
                              {"medians", medians},
                              {"strictly_decreasing", result.strictly_decreasing()}};
    ok = ok && result.all_ok();
  }
  if (!ok) summary["status"] = "error";
  (ok ? std::cout : std::cerr) << summary.dump() << '\n';
  return ok ? 0 : 1;
}

int report_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"status", "error"}, {"code", code}, {"message", message}}.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional density estimation by binned softmax classification"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--config", g.config, "JSON config file");
  app.add_option("--out", g.out, "Output path");
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Write a simulated dataset as CSV");
  simulate->add_option("--model", sim.model, "Simulation model 1-4")
      ->required()
      ->check(CLI::Range(1, 4));
  simulate->add_option("--n", sim.n, "Number of rows")->check(CLI::PositiveNumber);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit an estimator or ensemble");
  fit_cmd->add_option("--data", fit.data, "Training CSV")->required();
  fit_cmd->add_option("--loss", fit.loss, "multinomial | jbce");
  fit_cmd->add_option("--partition", fit.partition, "even | random");
  fit_cmd->add_option("--classifier", fit.classifier, "deep | logistic");
  fit_cmd->add_option("--cuts,-m", fit.cuts, "Number of cut points");
  fit_cmd->add_option("--members,-K", fit.members, "Ensemble size");
  fit_cmd->add_option("--epochs", fit.epochs);
  fit_cmd->add_option("--batch-size", fit.batch_size);
  fit_cmd->add_option("--lr", fit.learning_rate);
  fit_cmd->add_option("--dropout", fit.dropout);
  fit_cmd->add_option("--hidden", fit.hidden, "Hidden layer widths")->delimiter(',');
  fit_cmd->add_option("--threads", fit.threads, "Worker threads for ensembles (0 = all)");

  PredictArgs pred;
  auto* predict = app.add_subcommand("predict", "Quantiles, intervals and densities");
  predict->add_option("--model", pred.model)->required();
  predict->add_option("--data", pred.data)->required();
  predict->add_option("--taus", pred.taus, "Comma-separated quantile levels");
  predict->add_option("--level", pred.level, "Central interval level");
  predict->add_option("--density-out", pred.density_out, "Write a density grid CSV here");
  predict->add_option("--grid-points", pred.grid_points, "Density grid size");

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "CRPS, AQTL and coverage on a test set");
  score_cmd->add_option("--model", score.model)->required();
  score_cmd->add_option("--data", score.data)->required();
  score_cmd->add_option("--grid-points", score.grid_points, "CRPS grid size");

  RollingArgs roll;
  auto* rolling = app.add_subcommand("rolling", "Rolling-origin evaluation");
  rolling->add_option("--data", roll.data, "Time-ordered CSV");
  rolling->add_option("--synthetic-days", roll.synthetic_days,
                      "Use a synthetic seasonal series of this many days");
  rolling->add_option("--summary", roll.summary, "Write the JSON summary here");

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "Simulation grid and consistency runs");
  experiment->add_option("--spec", exp.spec, "Experiment spec JSON (defaults to --config)");
  experiment->add_option("--consistency-out", exp.consistency_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(g, sim);
    if (fit_cmd->parsed()) return cmd_fit(g, fit);
    if (predict->parsed()) return cmd_predict(g, pred);
    if (score_cmd->parsed()) return cmd_score(g, score);
    if (rolling->parsed()) return cmd_rolling(g, roll);
    if (experiment->parsed()) return cmd_experiment(g, exp);
  } catch (const Error& e) {
    return report_error(std::string(distreg::to_string(e.code())), e.message());
  } catch (const json::exception& e) {
    return report_error("parse-error", e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 1;
}
