// Copyright 2026 The evnat authors
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

#include "evnat/core/error.hpp"

namespace evnat {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TruncatedRecord: return "TruncatedRecord";
    case ErrorCode::AddressOutOfBounds: return "AddressOutOfBounds";
    case ErrorCode::EmptyHeaderMalformed: return "EmptyHeaderMalformed";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::ValueOverflow: return "ValueOverflow";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::UnsupportedMagic: return "UnsupportedMagic";
    case ErrorCode::MaxvalUnsupported: return "MaxvalUnsupported";
    case ErrorCode::BodyTooShort: return "BodyTooShort";
    case ErrorCode::MissingCounterpart: return "MissingCounterpart";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonIntegralOutput: return "NonIntegralOutput";
    case ErrorCode::MultiChannelInput: return "MultiChannelInput";
    case ErrorCode::ThresholdOrder: return "ThresholdOrder";
    case ErrorCode::GraphConsumed: return "GraphConsumed";
    case ErrorCode::IndivisibleSpatialSize: return "IndivisibleSpatialSize";
    case ErrorCode::SpatialCollapse: return "SpatialCollapse";
    case ErrorCode::GeometryMismatch: return "GeometryMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::ReportWriteFailure: return "ReportWriteFailure";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "UnknownError";
}

}  // namespace evnat
