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

#include "distreg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "distreg/error.hpp"
#include "distreg/parallel.hpp"
#include "distreg/seeding.hpp"

namespace distreg {
namespace {

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    std::ostringstream msg;
    msg << "tau must lie in (0, 1), got " << tau;
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
}

constexpr double kBisectionTolerance = 1e-9;

}  // namespace

HistogramDistribution::HistogramDistribution(std::shared_ptr<const Partition> partition,
                                             std::vector<double> probs)
    : partition_(std::move(partition)), probs_(std::move(probs)) {
  if (probs_.size() != partition_->num_bins()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(probs_.size()) + " masses for " +
                    std::to_string(partition_->num_bins()) + " bins");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::kInvalidArgument, "bin masses must be finite and nonnegative");
    }
    total += p;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bin masses sum to zero");
  cum_.resize(probs_.size() + 1);
  cum_[0] = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    probs_[i] /= total;
    cum_[i + 1] = cum_[i] + probs_[i];
  }
}

double HistogramDistribution::pdf(double y) const {
  const std::size_t k = partition_->bin_index(y);
  return probs_[k] / partition_->bin_width(k);
}

double HistogramDistribution::cdf(double y) const {
  if (y <= lower()) return 0.0;
  if (y >= upper()) return 1.0;
  const std::size_t k = partition_->bin_index(y);
  const double frac = (y - partition_->bin_lower(k)) / partition_->bin_width(k);
  return std::min(1.0, cum_[k] + probs_[k] * frac);
}

double HistogramDistribution::quantile(double tau) const {
  check_tau(tau);
  // First bin whose cumulative upper mass reaches tau.
  auto it = std::lower_bound(cum_.begin() + 1, cum_.end(), tau);
  std::size_t k = static_cast<std::size_t>(it - cum_.begin()) - 1;
  k = std::min(k, probs_.size() - 1);
  // Skip massless bins so the inverse lands where the density is positive.
  while (probs_[k] == 0.0 && k + 1 < probs_.size()) ++k;
  const double frac = std::clamp((tau - cum_[k]) / probs_[k], 0.0, 1.0);
  return partition_->bin_lower(k) + frac * partition_->bin_width(k);
}

MixtureDistribution::MixtureDistribution(std::vector<HistogramDistribution> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw Error(ErrorCode::kInvalidCount, "empty mixture");
  for (const auto& m : members_) {
    if (m.lower() != lower() || m.upper() != upper()) {
      throw Error(ErrorCode::kInvalidRange, "mixture members disagree on [lower, upper]");
    }
  }
}

double MixtureDistribution::pdf(double y) const {
  double total = 0.0;
  for (const auto& m : members_) total += m.pdf(y);
  return total / static_cast<double>(members_.size());
}

double MixtureDistribution::cdf(double y) const {
  double total = 0.0;
  for (const auto& m : members_) total += m.cdf(y);
  return total / static_cast<double>(members_.size());
}

double MixtureDistribution::quantile(double tau) const {
  check_tau(tau);
  double lo = lower();
  double hi = upper();
  while (hi - lo > kBisectionTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < tau) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> predict_interval(const PredictiveDistribution& dist, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    std::ostringstream msg;
    msg << "interval level must lie in (0, 1), got " << level;
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  const double lo = dist.quantile(0.5 * (1.0 - level));
  const double hi = dist.quantile(0.5 * (1.0 + level));
  return {lo, std::max(lo, hi)};
}

DensityEstimator::DensityEstimator(Partition partition, Network network, LossKind loss)
    : partition_(std::make_shared<const Partition>(std::move(partition))),
      network_(std::move(network)),
      loss_(loss) {
  if (network_.output_dim() != partition_->num_bins()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "classifier has " + std::to_string(network_.output_dim()) +
                    " outputs for " + std::to_string(partition_->num_bins()) + " bins");
  }
}

HistogramDistribution DensityEstimator::predict(std::span<const double> x) const {
  const Eigen::VectorXd p = network_.forward(x);
  return HistogramDistribution(partition_, std::vector<double>(p.begin(), p.end()));
}

std::unique_ptr<PredictiveDistribution> DensityEstimator::distribution(
    std::span<const double> x) const {
  return std::make_unique<HistogramDistribution>(predict(x));
}

EnsembleEstimator::EnsembleEstimator(std::vector<DensityEstimator> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw Error(ErrorCode::kInvalidCount, "ensemble needs K >= 1");
  for (const auto& m : members_) {
    if (m.lower() != lower() || m.upper() != upper()) {
      throw Error(ErrorCode::kInvalidRange, "ensemble members disagree on [lower, upper]");
    }
    if (m.input_dim() != input_dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "ensemble members disagree on input_dim");
    }
  }
}

MixtureDistribution EnsembleEstimator::predict(std::span<const double> x) const {
  std::vector<HistogramDistribution> parts;
  parts.reserve(members_.size());
  for (const auto& m : members_) parts.push_back(m.predict(x));
  return MixtureDistribution(std::move(parts));
}

std::unique_ptr<PredictiveDistribution> EnsembleEstimator::distribution(
    std::span<const double> x) const {
  return std::make_unique<MixtureDistribution>(predict(x));
}

std::vector<std::size_t> label_responses(const Dataset& data, const Partition& partition) {
  if (data.empty()) throw Error(ErrorCode::kEmptyData, "training set has no rows");
  std::vector<std::size_t> labels(data.rows());
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double y = data.y(static_cast<Eigen::Index>(i));
    if (y >= partition.lower() && y <= partition.upper()) {
      labels[i] = partition.bin_index(y);
    } else {
      bad.push_back(i);
    }
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << bad.size() << " response(s) outside [" << partition.lower() << ", "
        << partition.upper() << "] at rows";
    for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 20); ++i) {
      msg << ' ' << bad[i];
    }
    if (bad.size() > 20) msg << " ...";
    throw Error(ErrorCode::kResponseOutOfRange, msg.str());
  }
  return labels;
}

DensityEstimator fit_estimator(const Dataset& data, const Partition& partition,
                               NetworkConfig net_cfg, const TrainConfig& train_cfg) {
  data.validate();
  LabeledBatch batch{data.x, label_responses(data, partition)};
  net_cfg.input_dim = data.features();
  net_cfg.output_dim = partition.num_bins();
  Network net = Network::init(net_cfg, child_seed(train_cfg.seed, 0));
  TrainResult result = train(std::move(net), batch, train_cfg);
  DensityEstimator estimator(partition, std::move(result.network), train_cfg.loss);
  estimator.set_loss_trace(std::move(result.loss_trace));
  return estimator;
}

EnsembleEstimator fit_ensemble(const Dataset& data, double lower, double upper,
                               std::size_t m, std::size_t members,
                               const NetworkConfig& net_cfg, const TrainConfig& train_cfg,
                               std::uint64_t seed, unsigned threads) {
  if (members == 0) throw Error(ErrorCode::kInvalidCount, "ensemble needs K >= 1");
  if (data.empty()) throw Error(ErrorCode::kEmptyData, "training set has no rows");
  std::vector<std::optional<DensityEstimator>> slots(members);
  parallel_for(members, threads, [&](std::size_t k) {
    const std::uint64_t member_seed = child_seed(seed, k);
    Partition partition = random_partition(lower, upper, m, child_seed(member_seed, 0));
    TrainConfig cfg = train_cfg;
    cfg.seed = child_seed(member_seed, 1);
    slots[k].emplace(fit_estimator(data, partition, net_cfg, cfg));
  });
  std::vector<DensityEstimator> out;
  out.reserve(members);
  for (auto& s : slots) out.push_back(std::move(*s));
  return EnsembleEstimator(std::move(out));
}

void to_json(nlohmann::json& j, const ModelRecipe& r) {
  j = nlohmann::json{{"partition", r.partition == PartitionKind::kEven ? "even" : "random"},
                     {"cuts", r.cuts},
                     {"members", r.members},
                     {"network", r.network},
                     {"training", r.training},
                     {"range_margin", r.range_margin},
                     {"seed", r.seed}};
  if (r.lower) j["lower"] = *r.lower;
  if (r.upper) j["upper"] = *r.upper;
}

void from_json(const nlohmann::json& j, ModelRecipe& r) {
  if (j.contains("partition")) {
    const auto kind = j.at("partition").get<std::string>();
    if (kind == "even") {
      r.partition = PartitionKind::kEven;
    } else if (kind == "random") {
      r.partition = PartitionKind::kRandom;
    } else {
      throw Error(ErrorCode::kConfig, "partition: expected 'even' or 'random', got '" + kind + "'");
    }
  }
  r.cuts = j.value("cuts", r.cuts);
  r.members = j.value("members", r.members);
  if (j.contains("network")) r.network = j.at("network").get<NetworkConfig>();
  if (j.contains("training")) r.training = j.at("training").get<TrainConfig>();
  if (j.contains("lower")) r.lower = j.at("lower").get<double>();
  if (j.contains("upper")) r.upper = j.at("upper").get<double>();
  r.range_margin = j.value("range_margin", r.range_margin);
  r.seed = j.value("seed", r.seed);
  if (r.cuts == 0) throw Error(ErrorCode::kConfig, "cuts: must be >= 1");
  if (r.members == 0) throw Error(ErrorCode::kConfig, "members: must be >= 1");
  if (r.lower.has_value() != r.upper.has_value()) {
    throw Error(ErrorCode::kConfig, "lower/upper: give both or neither");
  }
}

std::pair<double, double> recipe_range(const ModelRecipe& recipe, const Dataset& train) {
  if (recipe.lower && recipe.upper) return {*recipe.lower, *recipe.upper};
  return widened_range(train.y, recipe.range_margin);
}

std::unique_ptr<ConditionalModel> fit_recipe(const ModelRecipe& recipe, const Dataset& train,
                                             unsigned threads) {
  if (train.empty()) throw Error(ErrorCode::kEmptyData, "training set has no rows");
  recipe.training.validate();
  const auto [lower, upper] = recipe_range(recipe, train);
  NetworkConfig net_cfg = recipe.network;
  net_cfg.input_dim = train.features();
  net_cfg.output_dim = recipe.cuts + 1;
  net_cfg.validate();
  if (recipe.members > 1) {
    return std::make_unique<EnsembleEstimator>(fit_ensemble(
        train, lower, upper, recipe.cuts, recipe.members, net_cfg, recipe.training,
        recipe.seed, threads));
  }
  Partition partition = recipe.partition == PartitionKind::kEven
                            ? even_partition(lower, upper, recipe.cuts)
                            : random_partition(lower, upper, recipe.cuts, child_seed(recipe.seed, 0));
  TrainConfig cfg = recipe.training;
  cfg.seed = child_seed(recipe.seed, 1);
  return std::make_unique<DensityEstimator>(fit_estimator(train, partition, net_cfg, cfg));
}

nlohmann::json estimator_to_json(const DensityEstimator& e) {
  return {{"partition", e.partition()}, {"model", model_to_json(e.network(), e.loss())}};
}

nlohmann::json ensemble_to_json(const EnsembleEstimator& e) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : e.members()) members.push_back(estimator_to_json(m));
  return {{"members", std::move(members)}, {"lower", e.lower()}, {"upper", e.upper()}};
}

nlohmann::json conditional_model_to_json(const ConditionalModel& model) {
  if (const auto* single = dynamic_cast<const DensityEstimator*>(&model)) {
    return estimator_to_json(*single);
  }
  if (const auto* ens = dynamic_cast<const EnsembleEstimator*>(&model)) {
    return ensemble_to_json(*ens);
  }
  throw Error(ErrorCode::kInvalidArgument, "model kind has no file representation");
}

DensityEstimator estimator_from_json(const nlohmann::json& j) {
  if (!j.contains("partition") || !j.contains("model")) {
    throw Error(ErrorCode::kParseError, "estimator: expected 'partition' and 'model'");
  }
  auto loaded = model_from_json(j.at("model"));
  return DensityEstimator(partition_from_json(j.at("partition")), std::move(loaded.network),
                          loaded.loss);
}

EnsembleEstimator ensemble_from_json(const nlohmann::json& j) {
  if (!j.contains("members") || !j.at("members").is_array()) {
    throw Error(ErrorCode::kParseError, "ensemble: expected 'members' array");
  }
  std::vector<DensityEstimator> members;
  for (const auto& m : j.at("members")) members.push_back(estimator_from_json(m));
  EnsembleEstimator ens(std::move(members));
  if (j.contains("lower") && (j.at("lower").get<double>() != ens.lower() ||
                              j.at("upper").get<double>() != ens.upper())) {
    throw Error(ErrorCode::kParseError, "ensemble: lower/upper disagree with members");
  }
  return ens;
}

std::unique_ptr<ConditionalModel> conditional_model_from_json(const nlohmann::json& j) {
  if (j.contains("members")) return std::make_unique<EnsembleEstimator>(ensemble_from_json(j));
  return std::make_unique<DensityEstimator>(estimator_from_json(j));
}

}  // namespace distreg
