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

#pragma once

#include <stdexcept>
#include <string>

namespace evnat {

enum class ErrorCode {
  // file formats
  TruncatedRecord,
  AddressOutOfBounds,
  EmptyHeaderMalformed,
  NonMonotonicTimestamp,
  ValueOverflow,
  LabelOutOfRange,
  UnsupportedMagic,
  MaxvalUnsupported,
  BodyTooShort,
  MissingCounterpart,
  SizeMismatch,
  IoFailure,
  // tensors and networks
  ShapeMismatch,
  NonIntegralOutput,
  MultiChannelInput,
  ThresholdOrder,
  GraphConsumed,
  IndivisibleSpatialSize,
  SpatialCollapse,
  GeometryMismatch,
  EmptyDataset,
  // harness
  MissingInput,
  UnsupportedCombination,
  CountMismatch,
  ReportWriteFailure,
  BadConfig,
};

const char* to_string(ErrorCode code);

/// Single exception type for the toolkit; the code identifies the failure
/// class and is what the CLI emits in its machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace evnat
