/* Copyright 2026 The SMOT Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smot {

// Error categories shared by every module. The numeric values are part of the
// C API (see smot.h) and must stay stable.
enum class ErrorCode : int {
  kSyntax = 1,
  kSchema = 2,
  kRange = 3,
  kIo = 4,
  kMissingFile = 5,
  kInvalidAnnotation = 6,
  kInvalidArgument = 7,
  kFrameOrder = 8,
  kNumeric = 9,
  kDimMismatch = 10,
  kEmptyInput = 11,
  kLabelRange = 12,
  kInfeasibleMotion = 13,
  kEmptyGroundTruth = 14,
  kEmptyCorpus = 15,
  kEmptyReference = 16,
  kNegativeSize = 17,
  kEmptyGrid = 18,
  kInternal = 99,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace smot
