// Copyright 2026 The kmsgibbs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kmsgibbs {

enum class ErrorCode {
  kNonFinite,
  kSymmetryViolation,
  kDomain,
  kNotPsd,
  kShape,
  kUnknownFrequency,
  kSize,
  kInvalidRule,
  kInvalidProfile,
  kPrecondition,
  kNormalization,
  kAccuracy,
  kLevelTooShallow,
  kUnbalanced,
  kParse,
  kUsage,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kSymmetryViolation: return "symmetry_violation";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kNotPsd: return "not_psd";
    case ErrorCode::kShape: return "shape_mismatch";
    case ErrorCode::kUnknownFrequency: return "unknown_frequency";
    case ErrorCode::kSize: return "size";
    case ErrorCode::kInvalidRule: return "invalid_rule";
    case ErrorCode::kInvalidProfile: return "invalid_profile";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kNormalization: return "normalization";
    case ErrorCode::kAccuracy: return "accuracy";
    case ErrorCode::kLevelTooShallow: return "level_too_shallow";
    case ErrorCode::kUnbalanced: return "unbalanced";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kUsage: return "usage";
  }
  return "unknown";
}

/** Error carrying a stable machine-readable code. */
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace kmsgibbs
