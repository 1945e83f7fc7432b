// Copyright 2026 The prefiqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PREFIQA_ERROR_HPP_
#define PREFIQA_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace prefiqa {

enum class ErrorCode {
  kIo,                  // file cannot be opened, read or written
  kMalformedHeader,     // image header cannot be parsed
  kMalformedPayload,    // image data truncated or inconsistent
  kUnsupportedFormat,   // unknown magic / channel count / bit depth
  kInvalidArgument,     // precondition violated by the caller
  kDimensionMismatch,   // two inputs that must agree in size do not
  kImageTooSmall,       // input smaller than a metric window/pyramid
  kDegenerateInput,     // e.g. constant image for NSS statistics
  kShapeMismatch,       // tensor shape disagreement
  kUndefinedCorrelation,
  kMalformedManifest,
  kMalformedCheckpoint,
  kMissingData,         // referenced image or MOS entry not present
};

// All library failures are reported through this exception type; `code()`
// lets callers (and the CLI) distinguish failure classes without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMalformedHeader: return "malformed_header";
    case ErrorCode::kMalformedPayload: return "malformed_payload";
    case ErrorCode::kUnsupportedFormat: return "unsupported_format";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kImageTooSmall: return "image_too_small";
    case ErrorCode::kDegenerateInput: return "degenerate_input";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kUndefinedCorrelation: return "undefined_correlation";
    case ErrorCode::kMalformedManifest: return "malformed_manifest";
    case ErrorCode::kMalformedCheckpoint: return "malformed_checkpoint";
    case ErrorCode::kMissingData: return "missing_data";
  }
  return "unknown";
}

}  // namespace prefiqa

#endif  // PREFIQA_ERROR_HPP_
