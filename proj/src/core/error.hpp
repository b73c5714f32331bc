// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace splatrig {

// Error categories. The numeric values are mirrored by splatrig_status in the
// C API, so do not reorder.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kFormat = 2,
  kIo = 3,
  kEmptyScene = 4,
  kDegenerateGeometry = 5,
  kNoOverlap = 6,
  kLimit = 7,
  kLengthMismatch = 8,
  kNotFound = 9,
  kInternal = 10,
};

const char* error_code_name(ErrorCode code);

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

}  // namespace splatrig
