// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "error.hpp"

namespace splatrig {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kEmptyScene: return "empty_scene";
    case ErrorCode::kDegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::kNoOverlap: return "no_overlap";
    case ErrorCode::kLimit: return "limit";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace splatrig
