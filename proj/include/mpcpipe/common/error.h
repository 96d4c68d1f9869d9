// Copyright 2026 The mpcpipe Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace mpcpipe {

// Raised when a protocol check fails or a peer misbehaves. `code()` is a
// stable short identifier ("open-inconsistent", "auth-failed", ...) that is
// reported to the orchestrator verbatim.
class ProtocolAbort : public std::runtime_error {
 public:
  ProtocolAbort(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}
  explicit ProtocolAbort(std::string code)
      : std::runtime_error(code), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Transport failure (peer unreachable, connection reset, timeout).
class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: wrong sizes, unparsable files, bad arguments.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace abort_code {
inline constexpr const char* kOpenInconsistent = "open-inconsistent";
inline constexpr const char* kInputInconsistent = "input-inconsistent";
inline constexpr const char* kPreprocessingCorrupt = "preprocessing-corrupt";
inline constexpr const char* kMulVerifyFailed = "mul-verify-failed";
inline constexpr const char* kTruncOverflow = "trunc-overflow";
inline constexpr const char* kAuthFailed = "auth-failed";
inline constexpr const char* kTranscriptMismatch = "transcript-mismatch";
inline constexpr const char* kTripleReuse = "triple-reuse";
inline constexpr const char* kPeerAbort = "peer-abort";
inline constexpr const char* kConsentMismatch = "consent-context-mismatch";
inline constexpr const char* kStreamWindow = "stream-window-refused";
}  // namespace abort_code

}  // namespace mpcpipe
