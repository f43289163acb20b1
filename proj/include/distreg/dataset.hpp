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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "distreg/nn.hpp"

namespace distreg {

// N rows of covariates with one real response each. `timestamps` (seconds
// since the Unix epoch, UTC) is either empty or one entry per row.
struct Dataset {
  Matrix x;
  Eigen::VectorXd y;
  std::vector<std::string> feature_names;
  std::vector<std::int64_t> timestamps;

  std::size_t rows() const { return static_cast<std::size_t>(y.size()); }
  std::size_t features() const { return static_cast<std::size_t>(x.cols()); }
  bool empty() const { return rows() == 0; }

  std::span<const double> row(std::size_t i) const {
    return {x.data() + static_cast<Eigen::Index>(i) * x.cols(), features()};
  }

  // Rows [begin, end).
  Dataset slice(std::size_t begin, std::size_t end) const;
  Dataset select(std::span<const std::size_t> indices) const;

  // Throws kDimensionMismatch on inconsistent sizes and kParseError on
  // non-finite entries.
  void validate() const;
};

// Default feature names x1..xp.
std::vector<std::string> default_feature_names(std::size_t p);

// [min(y) - margin*r, max(y) + margin*r] with r = max(y) - min(y); a
// degenerate sample falls back to a unit-width window around its value.
std::pair<double, double> widened_range(const Eigen::VectorXd& y, double margin = 0.01);

}  // namespace distreg
