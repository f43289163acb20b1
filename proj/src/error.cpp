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

#include "distreg/error.hpp"

namespace distreg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidRange: return "invalid-range";
    case ErrorCode::kInvalidCount: return "invalid-count";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kIndexOutOfBounds: return "index-out-of-bounds";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kNonFiniteLoss: return "non-finite-loss";
    case ErrorCode::kEmptyData: return "empty-data";
    case ErrorCode::kResponseOutOfRange: return "response-out-of-range";
    case ErrorCode::kUnsupportedModel: return "unsupported-model";
    case ErrorCode::kMissingColumn: return "missing-column";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kEmptyFile: return "empty-file";
    case ErrorCode::kUnsortedData: return "unsorted-data";
    case ErrorCode::kEmptyFold: return "empty-fold";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kConfig: return "config-error";
  }
  return "unknown";
}

}  // namespace distreg
