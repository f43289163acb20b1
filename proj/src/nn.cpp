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

#include "distreg/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "distreg/error.hpp"

namespace distreg {
namespace {

struct ForwardPass {
  std::vector<Matrix> pre;    // hidden pre-activations
  std::vector<Matrix> out;    // hidden outputs after activation and dropout
  std::vector<Matrix> masks;  // scaled keep masks; empty in eval mode
  Matrix probs;
};

void softmax_rows(Matrix& z) {
  constexpr double kTiny = std::numeric_limits<double>::min();
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
    // exp underflow would give exact zeros; keep masses strictly positive.
    row = row.cwiseMax(kTiny);
  }
}

void activate(Matrix& m, Activation a) {
  if (a == Activation::kElu) {
    m = m.unaryExpr([](double t) { return elu(t); });
  }
}

Matrix activation_derivative(const Matrix& pre, Activation a) {
  if (a == Activation::kIdentity) return Matrix::Ones(pre.rows(), pre.cols());
  return pre.unaryExpr([](double t) { return t >= 0.0 ? 1.0 : std::exp(t); });
}

ForwardPass run_forward(const Network& net, const Matrix& x, Rng* dropout_rng) {
  const auto& cfg = net.config();
  const auto& layers = net.layers();
  ForwardPass pass;
  const bool dropout = dropout_rng != nullptr && cfg.dropout_rate > 0.0;
  const double keep = 1.0 - cfg.dropout_rate;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Matrix* input = &x;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Matrix pre = (*input) * layers[l].weights;
    pre.rowwise() += layers[l].bias;
    Matrix out = pre;
    activate(out, cfg.activation);
    if (dropout) {
      Matrix mask(out.rows(), out.cols());
      for (Eigen::Index i = 0; i < mask.size(); ++i) {
        mask.data()[i] = unit(*dropout_rng) < keep ? 1.0 / keep : 0.0;
      }
      out.array() *= mask.array();
      pass.masks.push_back(std::move(mask));
    }
    pass.pre.push_back(std::move(pre));
    pass.out.push_back(std::move(out));
    input = &pass.out.back();
  }
  pass.probs = (*input) * layers.back().weights;
  pass.probs.rowwise() += layers.back().bias;
  softmax_rows(pass.probs);
  return pass;
}

// Writes dL/dz for one observation into `dlogits`; returns the loss.
double loss_and_logit_gradient(std::span<const double> p, std::size_t target,
                               LossKind kind, double clip, std::span<double> dlogits) {
  const std::size_t k = p.size();
  if (kind == LossKind::kMultinomial) {
    const double pt = p[target];
    if (pt < clip) {
      std::fill(dlogits.begin(), dlogits.end(), 0.0);
      return -std::log(clip);
    }
    for (std::size_t i = 0; i < k; ++i) dlogits[i] = p[i];
    dlogits[target] -= 1.0;
    return -std::log(pt);
  }

  // JBCE. head[j] = F_j, tail[j] = 1 - F_j accumulated from the top so that
  // small upper-tail masses keep full precision.
  const std::size_t m = k - 1;
  std::vector<double> head(m), tail(m);
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) head[j] = (acc += p[j]);
  acc = 0.0;
  for (std::size_t j = m; j-- > 0;) tail[j] = (acc += p[j + 1]);

  // dL/dF_j is collected in `below` (target at or below cut j) and dL/dS_j in
  // `above`; dL/dp_i = sum_{j >= i} below_j + sum_{j < i} above_j.
  std::vector<double> below(m, 0.0), above(m, 0.0);
  double loss = 0.0;
  const double hi = 1.0 - clip;
  for (std::size_t j = 0; j < m; ++j) {
    if (target <= j) {
      const double f = std::clamp(head[j], clip, hi);
      loss -= std::log(f);
      if (head[j] > clip && head[j] < hi) below[j] = -1.0 / head[j];
    } else {
      const double s = std::clamp(tail[j], clip, hi);
      loss -= std::log(s);
      if (tail[j] > clip && tail[j] < hi) above[j] = -1.0 / tail[j];
    }
  }
  std::vector<double> g(k, 0.0);
  double suffix = 0.0;
  for (std::size_t i = m; i-- > 0;) {
    suffix += below[i];
    g[i] += suffix;
  }
  double prefix = 0.0;
  for (std::size_t i = 1; i < k; ++i) {
    prefix += above[i - 1];
    g[i] += prefix;
  }
  double mean_g = 0.0;
  for (std::size_t i = 0; i < k; ++i) mean_g += p[i] * g[i];
  for (std::size_t i = 0; i < k; ++i) dlogits[i] = p[i] * (g[i] - mean_g);
  return loss;
}

template <class RowMat>
std::span<const double> row_span(const RowMat& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace

std::string_view to_string(Activation a) {
  return a == Activation::kElu ? "elu" : "identity";
}

std::string_view to_string(LossKind l) {
  return l == LossKind::kJbce ? "jbce" : "multinomial";
}

Activation activation_from_string(std::string_view s) {
  if (s == "elu") return Activation::kElu;
  if (s == "identity") return Activation::kIdentity;
  throw Error(ErrorCode::kConfig, "unknown activation '" + std::string(s) + "'");
}

LossKind loss_from_string(std::string_view s) {
  if (s == "jbce") return LossKind::kJbce;
  if (s == "multinomial") return LossKind::kMultinomial;
  throw Error(ErrorCode::kConfig, "unknown loss '" + std::string(s) + "'");
}

void NetworkConfig::validate() const {
  if (input_dim == 0) throw Error(ErrorCode::kConfig, "input_dim must be >= 1");
  if (output_dim < 2) throw Error(ErrorCode::kConfig, "output_dim must be >= 2");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::kConfig, "dropout_rate must lie in [0, 1)");
  }
  for (auto h : hidden_sizes) {
    if (h == 0) throw Error(ErrorCode::kConfig, "hidden layer width must be >= 1");
  }
}

NetworkConfig NetworkConfig::logistic(std::size_t input_dim, std::size_t output_dim) {
  NetworkConfig cfg;
  cfg.input_dim = input_dim;
  cfg.hidden_sizes.clear();
  cfg.output_dim = output_dim;
  cfg.dropout_rate = 0.0;
  return cfg;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw Error(ErrorCode::kConfig, "epochs must be >= 1");
  if (batch_size == 0) throw Error(ErrorCode::kConfig, "batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kConfig, "learning_rate must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw Error(ErrorCode::kConfig, "adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw Error(ErrorCode::kConfig, "adam_eps must be > 0");
  if (!(log_clip_eps > 0.0 && log_clip_eps < 0.5)) {
    throw Error(ErrorCode::kConfig, "log_clip_eps must lie in (0, 0.5)");
  }
}

void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = nlohmann::json{{"input_dim", c.input_dim},
                     {"hidden_sizes", c.hidden_sizes},
                     {"output_dim", c.output_dim},
                     {"dropout_rate", c.dropout_rate},
                     {"activation", to_string(c.activation)}};
}

void from_json(const nlohmann::json& j, NetworkConfig& c) {
  c.input_dim = j.value("input_dim", c.input_dim);
  c.hidden_sizes = j.value("hidden_sizes", c.hidden_sizes);
  c.output_dim = j.value("output_dim", c.output_dim);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  if (j.contains("activation")) {
    c.activation = activation_from_string(j.at("activation").get<std::string>());
  }
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"loss", to_string(c.loss)},
                     {"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"learning_rate", c.learning_rate},
                     {"adam_beta1", c.adam_beta1},
                     {"adam_beta2", c.adam_beta2},
                     {"adam_eps", c.adam_eps},
                     {"seed", c.seed},
                     {"log_clip_eps", c.log_clip_eps}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (j.contains("loss")) c.loss = loss_from_string(j.at("loss").get<std::string>());
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.seed = j.value("seed", c.seed);
  c.log_clip_eps = j.value("log_clip_eps", c.log_clip_eps);
}

Network::Network(NetworkConfig config, std::vector<Layer> layers)
    : config_(std::move(config)), layers_(std::move(layers)) {
  config_.validate();
  if (layers_.size() != config_.hidden_sizes.size() + 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected " + std::to_string(config_.hidden_sizes.size() + 1) +
                    " layers, got " + std::to_string(layers_.size()));
  }
  std::size_t fan_in = config_.input_dim;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::size_t fan_out = l < config_.hidden_sizes.size()
                                    ? config_.hidden_sizes[l]
                                    : config_.output_dim;
    const auto& layer = layers_[l];
    if (static_cast<std::size_t>(layer.weights.rows()) != fan_in ||
        static_cast<std::size_t>(layer.weights.cols()) != fan_out ||
        static_cast<std::size_t>(layer.bias.size()) != fan_out) {
      std::ostringstream msg;
      msg << "layer " << l << " is " << layer.weights.rows() << "x"
          << layer.weights.cols() << " (bias " << layer.bias.size()
          << "), expected " << fan_in << "x" << fan_out;
      throw Error(ErrorCode::kDimensionMismatch, msg.str());
    }
    fan_in = fan_out;
  }
}

Network Network::init(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  std::vector<Layer> layers;
  std::size_t fan_in = config.input_dim;
  const std::size_t n_layers = config.hidden_sizes.size() + 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t fan_out =
        l < config.hidden_sizes.size() ? config.hidden_sizes[l] : config.output_dim;
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    Layer layer{Matrix(fan_in, fan_out), RowVector::Zero(fan_out)};
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
      layer.weights.data()[i] = normal(rng);
    }
    layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return Network(config, std::move(layers));
}

std::size_t Network::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

namespace {

Matrix as_row(std::span<const double> x, std::size_t input_dim) {
  if (x.size() != input_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input has " + std::to_string(x.size()) + " entries, network expects " +
                    std::to_string(input_dim));
  }
  return Eigen::Map<const Matrix>(x.data(), 1, static_cast<Eigen::Index>(x.size()));
}

}  // namespace

Eigen::VectorXd Network::forward(std::span<const double> x) const {
  return run_forward(*this, as_row(x, input_dim()), nullptr).probs.row(0).transpose();
}

Eigen::VectorXd Network::forward(std::span<const double> x, Rng& dropout_rng) const {
  return run_forward(*this, as_row(x, input_dim()), &dropout_rng).probs.row(0).transpose();
}

Matrix Network::forward_batch(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input has " + std::to_string(x.cols()) + " columns, network expects " +
                    std::to_string(input_dim()));
  }
  return run_forward(*this, x, nullptr).probs;
}

double elu(double t) { return t >= 0.0 ? t : std::expm1(t); }

double loss_multinomial(std::span<const double> probs, std::size_t target, double clip) {
  return -std::log(std::max(probs[target], clip));
}

double loss_jbce(std::span<const double> probs, std::size_t target, double clip) {
  std::vector<double> scratch(probs.size());
  return loss_and_logit_gradient(probs, target, LossKind::kJbce, clip, scratch);
}

double observation_loss(std::span<const double> probs, std::size_t target,
                        LossKind loss, double clip) {
  return loss == LossKind::kJbce ? loss_jbce(probs, target, clip)
                                 : loss_multinomial(probs, target, clip);
}

void LabeledBatch::validate(std::size_t input_dim, std::size_t output_dim) const {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(x.rows()) + " rows but " + std::to_string(labels.size()) +
                    " labels");
  }
  if (static_cast<std::size_t>(x.cols()) != input_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "batch has " + std::to_string(x.cols()) + " features, network expects " +
                    std::to_string(input_dim));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= output_dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                      " exceeds " + std::to_string(output_dim) + " classes");
    }
  }
}

Gradients gradient(const Network& net, const LabeledBatch& batch, LossKind loss,
                   double clip, Rng* dropout_rng) {
  if (batch.size() == 0) throw Error(ErrorCode::kEmptyData, "empty batch");
  batch.validate(net.input_dim(), net.output_dim());
  const auto& cfg = net.config();
  const auto& layers = net.layers();
  ForwardPass pass = run_forward(net, batch.x, dropout_rng);

  const auto n = static_cast<Eigen::Index>(batch.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix delta(n, pass.probs.cols());
  double total = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    std::span<double> d(delta.data() + r * delta.cols(), static_cast<std::size_t>(delta.cols()));
    total += loss_and_logit_gradient(row_span(pass.probs, r), batch.labels[r], loss, clip, d);
  }
  delta *= inv_n;

  Gradients g;
  g.loss = total * inv_n;
  g.weights.resize(layers.size());
  g.biases.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix& input = l == 0 ? batch.x : pass.out[l - 1];
    g.weights[l].noalias() = input.transpose() * delta;
    g.biases[l] = delta.colwise().sum();
    if (l == 0) break;
    Matrix back = delta * layers[l].weights.transpose();
    if (!pass.masks.empty()) back.array() *= pass.masks[l - 1].array();
    back.array() *= activation_derivative(pass.pre[l - 1], cfg.activation).array();
    delta = std::move(back);
  }
  return g;
}

double mean_loss(const Network& net, const LabeledBatch& batch, LossKind loss, double clip) {
  if (batch.size() == 0) throw Error(ErrorCode::kEmptyData, "empty batch");
  batch.validate(net.input_dim(), net.output_dim());
  const Matrix probs = net.forward_batch(batch.x);
  double total = 0.0;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    total += observation_loss(row_span(probs, r), batch.labels[r], loss, clip);
  }
  return total / static_cast<double>(probs.rows());
}

TrainResult train(Network net, const LabeledBatch& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw Error(ErrorCode::kEmptyData, "no training rows");
  data.validate(net.input_dim(), net.output_dim());

  auto& layers = net.mutable_layers();
  std::vector<Matrix> m_w, v_w;
  std::vector<RowVector> m_b, v_b;
  for (const auto& l : layers) {
    m_w.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    v_w.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    m_b.push_back(RowVector::Zero(l.bias.size()));
    v_b.push_back(RowVector::Zero(l.bias.size()));
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch_size = std::min(cfg.batch_size, data.size());
  LabeledBatch batch;
  std::vector<double> trace;
  trace.reserve(cfg.epochs);
  double beta1_pow = 1.0, beta2_pow = 1.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t len = std::min(batch_size, order.size() - start);
      batch.x.resize(static_cast<Eigen::Index>(len), data.x.cols());
      batch.labels.resize(len);
      for (std::size_t r = 0; r < len; ++r) {
        batch.x.row(static_cast<Eigen::Index>(r)) = data.x.row(static_cast<Eigen::Index>(order[start + r]));
        batch.labels[r] = data.labels[order[start + r]];
      }
      Gradients g = gradient(net, batch, cfg.loss, cfg.log_clip_eps, &rng);
      if (!std::isfinite(g.loss)) {
        throw Error(ErrorCode::kNonFiniteLoss,
                    "loss became non-finite at epoch " + std::to_string(epoch + 1) +
                        "; reduce the learning rate");
      }
      epoch_loss += g.loss * static_cast<double>(len);

      beta1_pow *= cfg.adam_beta1;
      beta2_pow *= cfg.adam_beta2;
      const double step = cfg.learning_rate * std::sqrt(1.0 - beta2_pow) / (1.0 - beta1_pow);
      const double eps_hat = cfg.adam_eps * std::sqrt(1.0 - beta2_pow);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        m_w[l] = cfg.adam_beta1 * m_w[l] + (1.0 - cfg.adam_beta1) * g.weights[l];
        v_w[l] = cfg.adam_beta2 * v_w[l] + (1.0 - cfg.adam_beta2) * g.weights[l].cwiseAbs2();
        layers[l].weights.array() -= step * m_w[l].array() / (v_w[l].array().sqrt() + eps_hat);
        m_b[l] = cfg.adam_beta1 * m_b[l] + (1.0 - cfg.adam_beta1) * g.biases[l];
        v_b[l] = cfg.adam_beta2 * v_b[l] + (1.0 - cfg.adam_beta2) * g.biases[l].cwiseAbs2();
        layers[l].bias.array() -= step * m_b[l].array() / (v_b[l].array().sqrt() + eps_hat);
      }
    }
    trace.push_back(epoch_loss / static_cast<double>(data.size()));
  }
  return TrainResult{std::move(net), std::move(trace)};
}

nlohmann::json model_to_json(const Network& net, LossKind loss) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    nlohmann::json w = nlohmann::json::array();
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      w.push_back(std::vector<double>(l.weights.row(r).begin(), l.weights.row(r).end()));
    }
    layers.push_back({{"w", std::move(w)},
                      {"b", std::vector<double>(l.bias.begin(), l.bias.end())}});
  }
  return {{"config", net.config()}, {"layers", std::move(layers)}, {"loss", to_string(loss)}};
}

LoadedModel model_from_json(const nlohmann::json& j) {
  try {
    auto config = j.at("config").get<NetworkConfig>();
    std::vector<Layer> layers;
    for (const auto& jl : j.at("layers")) {
      const auto rows = jl.at("w").get<std::vector<std::vector<double>>>();
      const auto bias = jl.at("b").get<std::vector<double>>();
      const auto cols = rows.empty() ? std::size_t{0} : rows.front().size();
      Layer layer{Matrix(rows.size(), cols), RowVector(bias.size())};
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) {
          throw Error(ErrorCode::kDimensionMismatch, "ragged weight matrix");
        }
        for (std::size_t c = 0; c < cols; ++c) layer.weights(r, c) = rows[r][c];
      }
      for (std::size_t c = 0; c < bias.size(); ++c) layer.bias(c) = bias[c];
      layers.push_back(std::move(layer));
    }
    return {Network(std::move(config), std::move(layers)),
            loss_from_string(j.at("loss").get<std::string>())};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model: ") + e.what());
  }
}

}  // namespace distreg
