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
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "distreg/dataset.hpp"
#include "distreg/distribution.hpp"
#include "distreg/nn.hpp"
#include "distreg/partition.hpp"

namespace distreg {

// Piecewise-constant density p_i / |T_i| over a partition. The cdf is the
// exact integral (linear within each bin) and the quantile its exact inverse.
class HistogramDistribution final : public PredictiveDistribution {
 public:
  // `probs` must hold one positive mass per bin; it is renormalised to sum 1.
  HistogramDistribution(std::shared_ptr<const Partition> partition, std::vector<double> probs);

  const Partition& partition() const { return *partition_; }
  std::span<const double> probs() const { return probs_; }

  double lower() const override { return partition_->lower(); }
  double upper() const override { return partition_->upper(); }
  // Throws kOutOfRange outside [lower, upper].
  double pdf(double y) const override;
  double cdf(double y) const override;
  double quantile(double tau) const override;

 private:
  std::shared_ptr<const Partition> partition_;
  std::vector<double> probs_;
  std::vector<double> cum_;  // cum_[i] = mass of bins [0, i)
};

// Equal-weight average of histogram densities over a common [lower, upper].
// The quantile inverts the averaged cdf by bisection to 1e-9 in y.
class MixtureDistribution final : public PredictiveDistribution {
 public:
  explicit MixtureDistribution(std::vector<HistogramDistribution> members);

  std::span<const HistogramDistribution> members() const { return members_; }

  double lower() const override { return members_.front().lower(); }
  double upper() const override { return members_.front().upper(); }
  double pdf(double y) const override;
  double cdf(double y) const override;
  double quantile(double tau) const override;

 private:
  std::vector<HistogramDistribution> members_;
};

// Central interval (quantile((1-level)/2), quantile((1+level)/2)).
std::pair<double, double> predict_interval(const PredictiveDistribution& dist, double level);

// A partition paired with a softmax classifier over its bins.
class DensityEstimator final : public ConditionalModel {
 public:
  // Throws kDimensionMismatch unless the network has one output per bin.
  DensityEstimator(Partition partition, Network network, LossKind loss);

  const Partition& partition() const { return *partition_; }
  const Network& network() const { return network_; }
  LossKind loss() const { return loss_; }

  // Mean training loss per epoch; empty for estimators loaded from disk.
  const std::vector<double>& loss_trace() const { return loss_trace_; }
  void set_loss_trace(std::vector<double> trace) { loss_trace_ = std::move(trace); }

  std::size_t input_dim() const override { return network_.input_dim(); }
  double lower() const override { return partition_->lower(); }
  double upper() const override { return partition_->upper(); }

  HistogramDistribution predict(std::span<const double> x) const;
  std::unique_ptr<PredictiveDistribution> distribution(std::span<const double> x) const override;

  double pdf(std::span<const double> x, double y) const { return predict(x).pdf(y); }
  double cdf(std::span<const double> x, double y) const { return predict(x).cdf(y); }
  double quantile(std::span<const double> x, double tau) const {
    return predict(x).quantile(tau);
  }

 private:
  std::shared_ptr<const Partition> partition_;
  Network network_;
  LossKind loss_;
  std::vector<double> loss_trace_;
};

// K density estimators over independently drawn partitions of one range.
class EnsembleEstimator final : public ConditionalModel {
 public:
  // Throws kInvalidCount when empty and kInvalidRange when members disagree
  // on [lower, upper] or input dimension.
  explicit EnsembleEstimator(std::vector<DensityEstimator> members);

  std::span<const DensityEstimator> members() const { return members_; }
  std::size_t size() const { return members_.size(); }

  std::size_t input_dim() const override { return members_.front().input_dim(); }
  double lower() const override { return members_.front().lower(); }
  double upper() const override { return members_.front().upper(); }

  MixtureDistribution predict(std::span<const double> x) const;
  std::unique_ptr<PredictiveDistribution> distribution(std::span<const double> x) const override;

  double pdf(std::span<const double> x, double y) const { return predict(x).pdf(y); }
  double cdf(std::span<const double> x, double y) const { return predict(x).cdf(y); }
  double quantile(std::span<const double> x, double tau) const {
    return predict(x).quantile(tau);
  }

 private:
  std::vector<DensityEstimator> members_;
};

// Zero-based bin labels for every response. Throws kEmptyData on an empty
// dataset and kResponseOutOfRange (listing offending rows) when a response
// falls outside the partition.
std::vector<std::size_t> label_responses(const Dataset& data, const Partition& partition);

// Labels the responses, trains the classifier and returns the pair. The
// network's input/output widths are taken from the data and partition.
DensityEstimator fit_estimator(const Dataset& data, const Partition& partition,
                               NetworkConfig net_cfg, const TrainConfig& train_cfg);

// K members, member k using partition and training seeds derived from
// child_seed(seed, k); identical output for any thread count.
EnsembleEstimator fit_ensemble(const Dataset& data, double lower, double upper,
                               std::size_t m, std::size_t members,
                               const NetworkConfig& net_cfg, const TrainConfig& train_cfg,
                               std::uint64_t seed, unsigned threads = 1);

enum class PartitionKind { kEven, kRandom };

// Everything needed to fit a model from a training set; used by the rolling
// harness, the experiment grid and the CLI.
struct ModelRecipe {
  PartitionKind partition = PartitionKind::kEven;
  std::size_t cuts = 40;
  std::size_t members = 1;  // > 1 builds a random-partition ensemble
  NetworkConfig network;
  TrainConfig training;
  std::optional<double> lower;
  std::optional<double> upper;
  double range_margin = 0.01;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const ModelRecipe& r);
void from_json(const nlohmann::json& j, ModelRecipe& r);

// [lower, upper] the recipe would use for this training set.
std::pair<double, double> recipe_range(const ModelRecipe& recipe, const Dataset& train);

std::unique_ptr<ConditionalModel> fit_recipe(const ModelRecipe& recipe, const Dataset& train,
                                             unsigned threads = 1);

nlohmann::json estimator_to_json(const DensityEstimator& e);
nlohmann::json ensemble_to_json(const EnsembleEstimator& e);
// Serialises either estimator kind; throws kInvalidArgument otherwise.
nlohmann::json conditional_model_to_json(const ConditionalModel& model);
DensityEstimator estimator_from_json(const nlohmann::json& j);
EnsembleEstimator ensemble_from_json(const nlohmann::json& j);
// Dispatches on the presence of "members".
std::unique_ptr<ConditionalModel> conditional_model_from_json(const nlohmann::json& j);

}  // namespace distreg
