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

#include "distreg/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "distreg/error.hpp"

namespace distreg {
namespace {

constexpr double kQuantileTolerance = 1e-10;
constexpr double kModel3Sd1 = 0.3;
constexpr double kModel3Sd2 = 0.8;

double model3_mean1(double x) { return std::sin(x); }
double model3_mean2(double x) { return 2.0 * std::sin(1.5 * x + 1.0); }

[[noreturn]] void unsupported(int model_id) {
  throw Error(ErrorCode::kUnsupportedModel,
              "model " + std::to_string(model_id) + " has no closed-form conditional law");
}

double linear(std::span<const double> x, const Eigen::VectorXd& beta) {
  if (x.size() != static_cast<std::size_t>(beta.size())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "x has " + std::to_string(x.size()) + " entries, law expects " +
                    std::to_string(beta.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * beta(static_cast<Eigen::Index>(i));
  return s;
}

double first(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::kDimensionMismatch, "law needs one covariate");
  return x[0];
}

struct Bracket {
  double lo;
  double hi;
};

class TrueDistribution final : public PredictiveDistribution {
 public:
  TrueDistribution(std::shared_ptr<const TrueConditional> truth, std::vector<double> x,
                   double lower, double upper)
      : truth_(std::move(truth)), x_(std::move(x)), lower_(lower), upper_(upper) {}

  double lower() const override { return lower_; }
  double upper() const override { return upper_; }
  double pdf(double y) const override { return truth_->pdf(x_, y); }
  double cdf(double y) const override { return truth_->cdf(x_, y); }
  double quantile(double tau) const override { return truth_->quantile(x_, tau); }

 private:
  std::shared_ptr<const TrueConditional> truth_;
  std::vector<double> x_;
  double lower_;
  double upper_;
};

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double TrueConditional::cdf(std::span<const double> x, double y) const {
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          unsupported(model_id_);
        } else if constexpr (std::is_same_v<T, HeteroscedasticLinearLaw>) {
          return normal_cdf((y - linear(x, law.beta1)) / std::exp(linear(x, law.beta2)));
        } else if constexpr (std::is_same_v<T, SineMixtureLaw>) {
          const double v = first(x);
          return 0.5 * normal_cdf((y - model3_mean1(v)) / kModel3Sd1) +
                 0.5 * normal_cdf((y - model3_mean2(v)) / kModel3Sd2);
        } else {
          if (y <= law.lower) return 0.0;
          if (y >= law.upper) return 1.0;
          const double mu = law.intercept + law.slope * first(x);
          const double a = normal_cdf((law.lower - mu) / law.sd);
          const double b = normal_cdf((law.upper - mu) / law.sd);
          return std::clamp((normal_cdf((y - mu) / law.sd) - a) / (b - a), 0.0, 1.0);
        }
      },
      law_);
}

double TrueConditional::pdf(std::span<const double> x, double y) const {
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          unsupported(model_id_);
        } else if constexpr (std::is_same_v<T, HeteroscedasticLinearLaw>) {
          const double sd = std::exp(linear(x, law.beta2));
          return normal_pdf((y - linear(x, law.beta1)) / sd) / sd;
        } else if constexpr (std::is_same_v<T, SineMixtureLaw>) {
          const double v = first(x);
          return 0.5 * normal_pdf((y - model3_mean1(v)) / kModel3Sd1) / kModel3Sd1 +
                 0.5 * normal_pdf((y - model3_mean2(v)) / kModel3Sd2) / kModel3Sd2;
        } else {
          if (y < law.lower || y > law.upper) return 0.0;
          const double mu = law.intercept + law.slope * first(x);
          const double a = normal_cdf((law.lower - mu) / law.sd);
          const double b = normal_cdf((law.upper - mu) / law.sd);
          return normal_pdf((y - mu) / law.sd) / law.sd / (b - a);
        }
      },
      law_);
}

double TrueConditional::quantile(std::span<const double> x, double tau) const {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tau must lie in (0, 1)");
  }
  const Bracket bracket = std::visit(
      [&](const auto& law) -> Bracket {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          unsupported(model_id_);
        } else if constexpr (std::is_same_v<T, HeteroscedasticLinearLaw>) {
          const double mu = linear(x, law.beta1);
          const double sd = std::exp(linear(x, law.beta2));
          return {mu - 40.0 * sd, mu + 40.0 * sd};
        } else if constexpr (std::is_same_v<T, SineMixtureLaw>) {
          const double v = first(x);
          const double a = std::min(model3_mean1(v), model3_mean2(v));
          const double b = std::max(model3_mean1(v), model3_mean2(v));
          return {a - 40.0 * kModel3Sd2, b + 40.0 * kModel3Sd2};
        } else {
          return {law.lower, law.upper};
        }
      },
      law_);
  double lo = bracket.lo;
  double hi = bracket.hi;
  while (hi - lo > kQuantileTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(x, mid) < tau) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double sample_skew_normal(double location, double scale, double shape, Rng& rng) {
  if (!(scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "skew-normal scale must be > 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double delta = shape / std::sqrt(1.0 + shape * shape);
  const double z0 = normal(rng);
  const double z1 = normal(rng);
  return location + scale * (delta * std::abs(z0) + std::sqrt(1.0 - delta * delta) * z1);
}

SimulatedData gen_model1(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr int p = 5;
  HeteroscedasticLinearLaw law{Eigen::VectorXd(p), Eigen::VectorXd(p)};
  for (int i = 0; i < p; ++i) law.beta1(i) = normal(rng);
  const double beta2_sd = std::sqrt(0.45);
  for (int i = 0; i < p; ++i) law.beta2(i) = beta2_sd * normal(rng);

  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(n), p);
  d.y.resize(static_cast<Eigen::Index>(n));
  d.feature_names = default_feature_names(p);
  for (std::size_t r = 0; r < n; ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (int c = 0; c < p; ++c) d.x(i, c) = normal(rng);
    const double eps = normal(rng);
    const Eigen::VectorXd xr = d.x.row(i).transpose();
    d.y(i) = xr.dot(law.beta1) + std::exp(xr.dot(law.beta2)) * eps;
  }
  return {std::move(d), TrueConditional(1, std::move(law))};
}

double model2_component_mean(std::span<const double> x, bool first_component) {
  if (x.size() < 5) throw Error(ErrorCode::kDimensionMismatch, "model 2 needs >= 5 inputs");
  if (first_component) {
    return 10.0 * std::sin(2.0 * std::numbers::pi * x[0] * x[1]) + 10.0 * x[3];
  }
  return 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 5.0 * x[4];
}

double model4_mean(std::span<const double> x) {
  if (x.size() < 5) throw Error(ErrorCode::kDimensionMismatch, "model 4 needs >= 5 inputs");
  return 10.0 * std::sin(2.0 * std::numbers::pi * x[0] * x[1]) +
         20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
}

Dataset gen_model2(std::size_t n, std::uint64_t seed, std::vector<int>* components) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> eps1(0.0, 1.5);  // variance 2.25
  std::normal_distribution<double> eps2(0.0, 1.0);
  constexpr int p = 10;
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(n), p);
  d.y.resize(static_cast<Eigen::Index>(n));
  d.feature_names = default_feature_names(p);
  if (components) components->assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (int c = 0; c < p; ++c) d.x(i, c) = unit(rng);
    const bool pi1 = coin(rng);
    const double e1 = eps1(rng);
    const double e2 = eps2(rng);
    d.y(i) = model2_component_mean(d.row(r), pi1) + (pi1 ? e1 : e2);
    if (components) (*components)[r] = pi1 ? 1 : 0;
  }
  return d;
}

SimulatedData gen_model3(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> x_dist(0.0, 10.0);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> eps1(0.0, kModel3Sd1);  // variance 0.09
  std::normal_distribution<double> eps2(0.0, kModel3Sd2);  // variance 0.64
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(n), 1);
  d.y.resize(static_cast<Eigen::Index>(n));
  d.feature_names = default_feature_names(1);
  for (std::size_t r = 0; r < n; ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    const double x = x_dist(rng);
    const bool pi1 = coin(rng);
    const double e1 = eps1(rng);
    const double e2 = eps2(rng);
    d.x(i, 0) = x;
    d.y(i) = pi1 ? model3_mean1(x) + e1 : model3_mean2(x) + e2;
  }
  return {std::move(d), TrueConditional(3, SineMixtureLaw{})};
}

Dataset gen_model4(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int p = 10;
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(n), p);
  d.y.resize(static_cast<Eigen::Index>(n));
  d.feature_names = default_feature_names(p);
  for (std::size_t r = 0; r < n; ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (int c = 0; c < p; ++c) d.x(i, c) = unit(rng);
    d.y(i) = model4_mean(d.row(r)) + sample_skew_normal(0.0, 1.0, -5.0, rng);
  }
  return d;
}

SimulatedData gen_truncated_linear_normal(std::size_t n, std::uint64_t seed,
                                          const TruncatedLinearNormalLaw& law) {
  if (!(law.lower < law.upper) || !(law.sd > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "truncated normal needs lower < upper and sd > 0");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(n), 1);
  d.y.resize(static_cast<Eigen::Index>(n));
  d.feature_names = default_feature_names(1);
  for (std::size_t r = 0; r < n; ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    const double x = unit(rng);
    const double mu = law.intercept + law.slope * x;
    double y;
    do {
      y = mu + law.sd * normal(rng);
    } while (y < law.lower || y > law.upper);
    d.x(i, 0) = x;
    d.y(i) = y;
  }
  return {std::move(d), TrueConditional(0, law)};
}

SimulatedData simulate(int model_id, std::size_t n, std::uint64_t seed) {
  switch (model_id) {
    case 1: return gen_model1(n, seed);
    case 2: return {gen_model2(n, seed), TrueConditional(2, std::monostate{})};
    case 3: return gen_model3(n, seed);
    case 4: return {gen_model4(n, seed), TrueConditional(4, std::monostate{})};
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "model id must be 1..4, got " + std::to_string(model_id));
  }
}

OracleModel::OracleModel(TrueConditional truth, std::size_t input_dim, double lower,
                         double upper)
    : truth_(std::make_shared<const TrueConditional>(std::move(truth))),
      input_dim_(input_dim),
      lower_(lower),
      upper_(upper) {
  if (!truth_->supported()) {
    throw Error(ErrorCode::kUnsupportedModel,
                "model " + std::to_string(truth_->model_id()) + " has no closed-form law");
  }
  if (!(lower < upper)) throw Error(ErrorCode::kInvalidRange, "oracle needs lower < upper");
}

std::unique_ptr<PredictiveDistribution> OracleModel::distribution(
    std::span<const double> x) const {
  return std::make_unique<TrueDistribution>(truth_, std::vector<double>(x.begin(), x.end()),
                                            lower_, upper_);
}

}  // namespace distreg
