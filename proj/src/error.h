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

#ifndef DISTMETRIC_ERROR_H_
#define DISTMETRIC_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace distmetric {

enum class ErrorCode {
  kFormat,
  kConsistency,
  kData,
  kIo,
  kInsufficientSamples,
  kDomain,
  kNotPsd,
  kDimension,
  kDegenerateData,
  kSingularCovariance,
  kSilentSignal,
  kSilentNoise,
  kRateMismatch,
  kEmptyCorpus,
  kDegenerateBaseline,
  kMissingCondition,
  kInsufficientData,
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

// True for errors caused by bad input files or arguments, as opposed to
// failures of a computation on well-formed input.
bool IsInputError(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }
  // Message without the error-name prefix.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace distmetric

#endif  // DISTMETRIC_ERROR_H_
