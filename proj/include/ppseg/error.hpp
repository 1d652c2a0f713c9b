// Copyright 2026 The ppseg Authors.
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

#ifndef PPSEG_ERROR_HPP_
#define PPSEG_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ppseg {

// Every failure raised by the library carries one of these codes so callers
// (the CLI in particular) can map them onto exit statuses without parsing
// message text.
enum class ErrorCode {
  kRangeError,
  kFormError,
  kDuplicateId,
  kPartsOnStuff,
  kEmptyTaxonomy,
  kSchemaError,
  kBadMagic,
  kTruncatedStream,
  kVersionUnsupported,
  kTrailingData,
  kUnknownClass,
  kNotAPartClass,
  kEmptyUnion,
  kGridMismatch,
  kNoEvaluatableClass,
  kTaxonomyMismatch,
  kUnexpectedPid,
  kDatasetMismatch,
  kShapeMismatch,
  kHeadDivisibility,
  kOddChannels,
  kNonFinite,
  kEmptyStages,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ppseg

#endif  // PPSEG_ERROR_HPP_
