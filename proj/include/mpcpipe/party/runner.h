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

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mpcpipe/common/crypto.h"
#include "mpcpipe/infer/model.h"
#include "mpcpipe/party/job.h"
#include "mpcpipe/rss/session.h"

namespace mpcpipe::party {

namespace failure {
inline constexpr const char* kPeerRefused = "peer-refused";
inline constexpr const char* kUnknownType = "unknown-type";
inline constexpr const char* kKeyshareMissing = "keyshare-missing";
inline constexpr const char* kDataMissing = "data-missing";
inline constexpr const char* kJobMismatch = "job-mismatch";
inline constexpr const char* kNetwork = "network-error";
inline constexpr const char* kFormat = "format-error";
inline constexpr const char* kInternal = "internal-error";
}  // namespace failure

// Orchestrator-facing calls of the job loop. Party indices are 0-based.
class JobSource {
 public:
  virtual ~JobSource() = default;
  // One entry per requested ID, nullopt when the store has no such record.
  virtual std::vector<std::optional<Bytes>> get_data(const std::string& user, const std::vector<uint64_t>& ids) = 0;
  virtual std::optional<Bytes> get_keyshare(const std::string& analysis_id, int party) = 0;
  virtual void submit_result(const std::string& analysis_id, int party, const Bytes& ct) = 0;
  virtual void report_failure(const std::string& analysis_id, int party, const std::string& code) = 0;
};

struct PartyContext {
  int index = 0;
  std::shared_ptr<const crypto::RsaKey> sk;
  std::array<Bytes, 3> pk_moduli;
  std::map<std::string, std::shared_ptr<const infer::SharedModel>> models;  // by analysis type
};

struct AnalysisOutcome {
  std::string id;
  bool ok = false;
  std::string code;  // failure code when !ok
  Bytes result;      // ct || tag when ok
};

struct JobReport {
  std::string job_id;
  std::vector<AnalysisOutcome> analyses;
  uint64_t started_ms = 0;
  uint64_t finished_ms = 0;
};

// Runs one job in `s` and submits every outcome to `src`. Local checks
// (window, key share, data) are agreed with both peers before any secret
// computation, so all parties fail or proceed together per analysis. Results
// are submitted only after the transcript comparison at the end of the
// session. Never throws for protocol or network failures; those become
// failure reports.
JobReport run_job(rss::Session& s, const Job& job, const PartyContext& ctx, JobSource& src, uint64_t now_ms);

}  // namespace mpcpipe::party
