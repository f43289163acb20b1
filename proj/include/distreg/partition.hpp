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
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "distreg/seeding.hpp"

namespace distreg {

// Division of [lower, upper] into m+1 consecutive bins by m interior cuts.
// Bins are half-open [c_{i-1}, c_i) except the last, which is closed at
// `upper`. Bin indices are zero-based: bin i spans edges[i]..edges[i+1].
class Partition {
 public:
  // Throws kInvalidRange unless lower < cuts[0] < ... < cuts[m-1] < upper,
  // and kInvalidCount when `cuts` is empty.
  Partition(double lower, double upper, std::vector<double> cuts);

  double lower() const { return edges_.front(); }
  double upper() const { return edges_.back(); }
  double range() const { return upper() - lower(); }

  std::size_t num_cuts() const { return edges_.size() - 2; }
  std::size_t num_bins() const { return edges_.size() - 1; }

  std::span<const double> cuts() const {
    return std::span<const double>(edges_).subspan(1, num_cuts());
  }
  // lower, cuts..., upper
  std::span<const double> edges() const { return edges_; }

  // Bin containing y. Throws kOutOfRange when y is outside [lower, upper].
  std::size_t bin_index(double y) const;

  // Throws kIndexOutOfBounds for i >= num_bins().
  double bin_width(std::size_t i) const;
  double bin_lower(std::size_t i) const;
  double bin_upper(std::size_t i) const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<double> edges_;
};

// Equal-width bins: cut i sits at lower + (i+1)(upper-lower)/(m+1).
Partition even_partition(double lower, double upper, std::size_t m);

double default_min_width_fraction(std::size_t m);

// Sorted order statistics of m iid Uniform(lower, upper) draws. Whole draw
// sets are rejected until every bin is at least
// min_width_fraction * (upper - lower) wide; 10,000 consecutive rejections
// raise kNonConvergence.
Partition random_partition(double lower, double upper, std::size_t m, Rng& rng,
                           std::optional<double> min_width_fraction = {});
Partition random_partition(double lower, double upper, std::size_t m,
                           std::uint64_t seed,
                           std::optional<double> min_width_fraction = {});

void to_json(nlohmann::json& j, const Partition& p);
Partition partition_from_json(const nlohmann::json& j);

}  // namespace distreg
