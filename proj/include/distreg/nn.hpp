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
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "distreg/seeding.hpp"

namespace distreg {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

enum class Activation { kElu, kIdentity };
enum class LossKind { kMultinomial, kJbce };

std::string_view to_string(Activation a);
std::string_view to_string(LossKind l);
Activation activation_from_string(std::string_view s);
LossKind loss_from_string(std::string_view s);

struct NetworkConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_sizes{100, 100, 100};
  std::size_t output_dim = 0;
  double dropout_rate = 0.5;
  Activation activation = Activation::kElu;

  // Throws kConfig on output_dim < 2, dropout outside [0, 1) or zero widths.
  void validate() const;

  // Multinomial logistic regression: no hidden layers, no dropout.
  static NetworkConfig logistic(std::size_t input_dim, std::size_t output_dim);
};

struct TrainConfig {
  LossKind loss = LossKind::kJbce;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  double log_clip_eps = 1e-12;

  void validate() const;
};

void to_json(nlohmann::json& j, const NetworkConfig& c);
void from_json(const nlohmann::json& j, NetworkConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Affine map applied as `inputs * weights + bias`; weights are fan_in x fan_out.
struct Layer {
  Matrix weights;
  RowVector bias;
};

// Feed-forward softmax classifier. Hidden layers apply the configured
// activation followed (in training) by inverted dropout; the output layer
// applies softmax.
class Network {
 public:
  // Throws kDimensionMismatch when layer shapes do not chain per `config`.
  Network(NetworkConfig config, std::vector<Layer> layers);

  // Weights ~ N(0, 1/fan_in), zero biases.
  static Network init(const NetworkConfig& config, std::uint64_t seed);

  const NetworkConfig& config() const { return config_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  std::size_t input_dim() const { return config_.input_dim; }
  std::size_t output_dim() const { return config_.output_dim; }
  std::size_t num_parameters() const;

  // Eval mode: no dropout; deterministic.
  Eigen::VectorXd forward(std::span<const double> x) const;
  // Train mode: dropout masks are drawn from `dropout_rng`.
  Eigen::VectorXd forward(std::span<const double> x, Rng& dropout_rng) const;
  // Eval mode over rows of `x`; returns one probability row per input row.
  Matrix forward_batch(const Matrix& x) const;

 private:
  NetworkConfig config_;
  std::vector<Layer> layers_;
};

double elu(double t);

// -log(max(probs[target], clip)).
double loss_multinomial(std::span<const double> probs, std::size_t target, double clip);

// Sum over the m cuts of the binary cross entropy between I(target <= j)
// and the cumulative mass F_j = probs[0] + ... + probs[j].
double loss_jbce(std::span<const double> probs, std::size_t target, double clip);

double observation_loss(std::span<const double> probs, std::size_t target,
                        LossKind loss, double clip);

// Covariate rows paired with zero-based bin labels.
struct LabeledBatch {
  Matrix x;
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  void validate(std::size_t input_dim, std::size_t output_dim) const;
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<RowVector> biases;
  double loss = 0.0;  // mean per-observation loss at the evaluated parameters
};

// Exact gradient of the mean per-observation loss over `batch`. When
// `dropout_rng` is non-null the pass runs in train mode and the sampled masks
// are reused by the backward pass.
Gradients gradient(const Network& net, const LabeledBatch& batch, LossKind loss,
                   double clip, Rng* dropout_rng = nullptr);

// Mean per-observation loss in eval mode.
double mean_loss(const Network& net, const LabeledBatch& batch, LossKind loss,
                 double clip);

struct TrainResult {
  Network network;
  std::vector<double> loss_trace;  // mean training loss per epoch
};

// Mini-batch Adam over shuffled epochs.
TrainResult train(Network net, const LabeledBatch& data, const TrainConfig& cfg);

nlohmann::json model_to_json(const Network& net, LossKind loss);

struct LoadedModel {
  Network network;
  LossKind loss;
};
LoadedModel model_from_json(const nlohmann::json& j);

}  // namespace distreg
