// Copyright (c) 2026 The distmetric Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "error.h"

namespace distmetric {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kConsistency: return "ConsistencyError";
    case ErrorCode::kData: return "DataError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kDomain: return "DomainError";
    case ErrorCode::kNotPsd: return "NotPSD";
    case ErrorCode::kDimension: return "DimensionError";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kSingularCovariance: return "SingularCovariance";
    case ErrorCode::kSilentSignal: return "SilentSignal";
    case ErrorCode::kSilentNoise: return "SilentNoise";
    case ErrorCode::kRateMismatch: return "RateMismatch";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kDegenerateBaseline: return "DegenerateBaseline";
    case ErrorCode::kMissingCondition: return "MissingCondition";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

bool IsInputError(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat:
    case ErrorCode::kConsistency:
    case ErrorCode::kData:
    case ErrorCode::kIo:
    case ErrorCode::kRateMismatch:
    case ErrorCode::kEmptyCorpus:
    case ErrorCode::kInvalidArgument:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      detail_(message) {}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace distmetric
