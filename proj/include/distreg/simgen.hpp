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
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "distreg/dataset.hpp"
#include "distreg/distribution.hpp"
#include "distreg/seeding.hpp"

namespace distreg {

// Y | x ~ N(x'beta1, exp(2 x'beta2)).
struct HeteroscedasticLinearLaw {
  Eigen::VectorXd beta1;
  Eigen::VectorXd beta2;
};

// Equal-weight mixture N(sin x, 0.3^2) and N(2 sin(1.5x + 1), 0.8^2).
struct SineMixtureLaw {};

// Y | x ~ N(intercept + slope*x, sd^2) truncated to [lower, upper].
struct TruncatedLinearNormalLaw {
  double intercept = -1.0;
  double slope = 2.0;
  double sd = 0.5;
  double lower = -3.0;
  double upper = 3.0;
};

// Exact conditional law of a simulation model. Models without a closed-form
// law carry std::monostate and throw kUnsupportedModel when evaluated.
class TrueConditional {
 public:
  using Law = std::variant<std::monostate, HeteroscedasticLinearLaw, SineMixtureLaw,
                           TruncatedLinearNormalLaw>;

  TrueConditional(int model_id, Law law) : model_id_(model_id), law_(std::move(law)) {}

  int model_id() const { return model_id_; }
  const Law& law() const { return law_; }
  bool supported() const { return !std::holds_alternative<std::monostate>(law_); }

  double cdf(std::span<const double> x, double y) const;
  double pdf(std::span<const double> x, double y) const;
  // Bisection on the cdf to 1e-10.
  double quantile(std::span<const double> x, double tau) const;

 private:
  int model_id_;
  Law law_;
};

struct SimulatedData {
  Dataset data;
  TrueConditional truth;
};

double normal_cdf(double z);
double normal_pdf(double z);

// Azzalini skew-normal draw: location + scale*(d|Z0| + sqrt(1-d^2) Z1),
// d = shape / sqrt(1 + shape^2).
double sample_skew_normal(double location, double scale, double shape, Rng& rng);

// X1..X5 ~ N(0,1); beta1 ~ N(0, I5) and beta2 ~ N(0, 0.45 I5) drawn once.
SimulatedData gen_model1(std::size_t n, std::uint64_t seed);
// Two-component mixture with nonlinear means over ten Uniform(0,1) inputs.
// `components`, when given, receives pi1 (1 = first component) per row.
Dataset gen_model2(std::size_t n, std::uint64_t seed, std::vector<int>* components = nullptr);
// X1 ~ Uniform(0,10); sine mixture (see SineMixtureLaw).
SimulatedData gen_model3(std::size_t n, std::uint64_t seed);
// Nonlinear mean plus SkewNormal(0, 1, -5) noise over ten Uniform(0,1) inputs.
Dataset gen_model4(std::size_t n, std::uint64_t seed);

// Noise-free means of the Model 2 components and of Model 4.
double model2_component_mean(std::span<const double> x, bool first_component);
double model4_mean(std::span<const double> x);

// One-feature model with a known density for consistency checks:
// X ~ Uniform(0,1), Y | X from `law`.
SimulatedData gen_truncated_linear_normal(std::size_t n, std::uint64_t seed,
                                          const TruncatedLinearNormalLaw& law = {});

// Dispatches on model id 1..4; throws kInvalidArgument otherwise. Models 2
// and 4 come back with an unsupported truth.
SimulatedData simulate(int model_id, std::size_t n, std::uint64_t seed);

// Adapter exposing a true law as a ConditionalModel scored over [lower, upper].
class OracleModel final : public ConditionalModel {
 public:
  OracleModel(TrueConditional truth, std::size_t input_dim, double lower, double upper);

  std::size_t input_dim() const override { return input_dim_; }
  double lower() const override { return lower_; }
  double upper() const override { return upper_; }
  std::unique_ptr<PredictiveDistribution> distribution(std::span<const double> x) const override;

 private:
  std::shared_ptr<const TrueConditional> truth_;
  std::size_t input_dim_;
  double lower_;
  double upper_;
};

}  // namespace distreg
