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

#include "ppseg/error.hpp"

namespace ppseg {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRangeError: return "RangeError";
    case ErrorCode::kFormError: return "FormError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kPartsOnStuff: return "PartsOnStuff";
    case ErrorCode::kEmptyTaxonomy: return "EmptyTaxonomy";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedStream: return "TruncatedStream";
    case ErrorCode::kVersionUnsupported: return "VersionUnsupported";
    case ErrorCode::kTrailingData: return "TrailingData";
    case ErrorCode::kUnknownClass: return "UnknownClass";
    case ErrorCode::kNotAPartClass: return "NotAPartClass";
    case ErrorCode::kEmptyUnion: return "EmptyUnion";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kNoEvaluatableClass: return "NoEvaluatableClass";
    case ErrorCode::kTaxonomyMismatch: return "TaxonomyMismatch";
    case ErrorCode::kUnexpectedPid: return "UnexpectedPid";
    case ErrorCode::kDatasetMismatch: return "DatasetMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kHeadDivisibility: return "HeadDivisibility";
    case ErrorCode::kOddChannels: return "OddChannels";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kEmptyStages: return "EmptyStages";
  }
  return "UnknownError";
}

}  // namespace ppseg
