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

#include "distreg/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "distreg/error.hpp"

namespace distreg {
namespace {

constexpr int kMaxRejections = 10000;

void check_range(double lower, double upper) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
    std::ostringstream msg;
    msg << "need finite lower < upper, got [" << lower << ", " << upper << "]";
    throw Error(ErrorCode::kInvalidRange, msg.str());
  }
}

void check_count(std::size_t m) {
  if (m == 0) {
    throw Error(ErrorCode::kInvalidCount, "a partition needs at least one cut");
  }
}

}  // namespace

Partition::Partition(double lower, double upper, std::vector<double> cuts) {
  check_range(lower, upper);
  check_count(cuts.size());
  edges_.reserve(cuts.size() + 2);
  edges_.push_back(lower);
  edges_.insert(edges_.end(), cuts.begin(), cuts.end());
  edges_.push_back(upper);
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i - 1] < edges_[i]) || !std::isfinite(edges_[i])) {
      std::ostringstream msg;
      msg << "edges must be strictly increasing; edge " << i << " = "
          << edges_[i] << " follows " << edges_[i - 1];
      throw Error(ErrorCode::kInvalidRange, msg.str());
    }
  }
}

std::size_t Partition::bin_index(double y) const {
  if (!(y >= lower() && y <= upper())) {
    std::ostringstream msg;
    msg << "y = " << y << " outside [" << lower() << ", " << upper() << "]";
    throw Error(ErrorCode::kOutOfRange, msg.str());
  }
  // First edge strictly greater than y closes the bin holding y.
  auto it = std::upper_bound(edges_.begin() + 1, edges_.end() - 1, y);
  return static_cast<std::size_t>(it - edges_.begin()) - 1;
}

double Partition::bin_width(std::size_t i) const {
  return bin_upper(i) - bin_lower(i);
}

double Partition::bin_lower(std::size_t i) const {
  if (i >= num_bins()) {
    throw Error(ErrorCode::kIndexOutOfBounds,
                "bin " + std::to_string(i) + " of " + std::to_string(num_bins()));
  }
  return edges_[i];
}

double Partition::bin_upper(std::size_t i) const {
  if (i >= num_bins()) {
    throw Error(ErrorCode::kIndexOutOfBounds,
                "bin " + std::to_string(i) + " of " + std::to_string(num_bins()));
  }
  return edges_[i + 1];
}

Partition even_partition(double lower, double upper, std::size_t m) {
  check_range(lower, upper);
  check_count(m);
  const double span = upper - lower;
  const double denom = static_cast<double>(m + 1);
  std::vector<double> cuts(m);
  for (std::size_t i = 0; i < m; ++i) {
    cuts[i] = lower + static_cast<double>(i + 1) * span / denom;
  }
  return Partition(lower, upper, std::move(cuts));
}

double default_min_width_fraction(std::size_t m) {
  return 0.01 / static_cast<double>(m + 1);
}

Partition random_partition(double lower, double upper, std::size_t m, Rng& rng,
                           std::optional<double> min_width_fraction) {
  check_range(lower, upper);
  check_count(m);
  const double fraction = min_width_fraction.value_or(default_min_width_fraction(m));
  if (!(fraction >= 0.0) || !(fraction * static_cast<double>(m + 1) < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "min_width_fraction must lie in [0, 1/(m+1))");
  }
  const double min_width = fraction * (upper - lower);
  std::uniform_real_distribution<double> uniform(lower, upper);

  std::vector<double> draws(m);
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    for (auto& v : draws) {
      // Open interval: redraw exact endpoint hits.
      do {
        v = uniform(rng);
      } while (v <= lower || v >= upper);
    }
    std::sort(draws.begin(), draws.end());
    double prev = lower;
    bool ok = true;
    for (std::size_t i = 0; i <= m && ok; ++i) {
      const double next = i < m ? draws[i] : upper;
      const double width = next - prev;
      ok = width > 0.0 && width >= min_width;
      prev = next;
    }
    if (ok) return Partition(lower, upper, draws);
  }
  throw Error(ErrorCode::kNonConvergence,
              "random_partition rejected 10000 consecutive draws; "
              "min_width_fraction is too large");
}

Partition random_partition(double lower, double upper, std::size_t m,
                           std::uint64_t seed,
                           std::optional<double> min_width_fraction) {
  Rng rng(seed);
  return random_partition(lower, upper, m, rng, min_width_fraction);
}

void to_json(nlohmann::json& j, const Partition& p) {
  j = nlohmann::json{{"lower", p.lower()},
                     {"upper", p.upper()},
                     {"cuts", std::vector<double>(p.cuts().begin(), p.cuts().end())}};
}

Partition partition_from_json(const nlohmann::json& j) {
  try {
    return Partition(j.at("lower").get<double>(), j.at("upper").get<double>(),
                     j.at("cuts").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("partition: ") + e.what());
  }
}

}  // namespace distreg
