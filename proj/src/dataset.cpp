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

#include "distreg/dataset.hpp"

#include <cmath>

#include "distreg/error.hpp"

namespace distreg {

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) {
    throw Error(ErrorCode::kIndexOutOfBounds,
                "slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " +
                    std::to_string(rows()) + " rows");
  }
  const auto b = static_cast<Eigen::Index>(begin);
  const auto n = static_cast<Eigen::Index>(end - begin);
  Dataset out;
  out.x = x.middleRows(b, n);
  out.y = y.segment(b, n);
  out.feature_names = feature_names;
  if (!timestamps.empty()) {
    out.timestamps.assign(timestamps.begin() + b, timestamps.begin() + b + n);
  }
  return out;
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(indices.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(indices.size()));
  out.feature_names = feature_names;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows()) {
      throw Error(ErrorCode::kIndexOutOfBounds, "row " + std::to_string(indices[r]));
    }
    const auto src = static_cast<Eigen::Index>(indices[r]);
    out.x.row(static_cast<Eigen::Index>(r)) = x.row(src);
    out.y(static_cast<Eigen::Index>(r)) = y(src);
    if (!timestamps.empty()) out.timestamps.push_back(timestamps[indices[r]]);
  }
  return out;
}

void Dataset::validate() const {
  if (static_cast<std::size_t>(x.rows()) != rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(x.rows()) + " covariate rows vs " + std::to_string(rows()) +
                    " responses");
  }
  if (!feature_names.empty() && feature_names.size() != features()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature name count differs from columns");
  }
  if (!timestamps.empty() && timestamps.size() != rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "timestamp count differs from rows");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw Error(ErrorCode::kParseError, "dataset contains non-finite values");
  }
}

std::vector<std::string> default_feature_names(std::size_t p) {
  std::vector<std::string> names;
  names.reserve(p);
  for (std::size_t i = 1; i <= p; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

std::pair<double, double> widened_range(const Eigen::VectorXd& y, double margin) {
  if (y.size() == 0) throw Error(ErrorCode::kEmptyData, "no responses");
  const double lo = y.minCoeff();
  const double hi = y.maxCoeff();
  const double r = hi - lo;
  if (!(r > 0.0)) return {lo - 0.5, hi + 0.5};
  return {lo - margin * r, hi + margin * r};
}

}  // namespace distreg
