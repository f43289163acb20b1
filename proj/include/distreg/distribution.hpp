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
#include <memory>
#include <span>

namespace distreg {

// Predictive law of Y at one covariate value, restricted to [lower, upper].
class PredictiveDistribution {
 public:
  virtual ~PredictiveDistribution() = default;

  virtual double lower() const = 0;
  virtual double upper() const = 0;
  virtual double pdf(double y) const = 0;
  // Clamped: 0 below lower(), 1 above upper().
  virtual double cdf(double y) const = 0;
  // Requires 0 < tau < 1.
  virtual double quantile(double tau) const = 0;
};

// Anything that maps covariates to a predictive distribution.
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  virtual std::size_t input_dim() const = 0;
  virtual double lower() const = 0;
  virtual double upper() const = 0;
  virtual std::unique_ptr<PredictiveDistribution> distribution(
      std::span<const double> x) const = 0;
};

}  // namespace distreg
