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

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace mpcpipe::party {

enum class Mode { kAdhoc, kStream };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

// One analysis inside a dispatched job. Stream analyses are the micro-batches
// of a stream registration and carry its consent window.
struct AnalysisSpec {
  std::string id;
  std::string user;
  std::string type;
  Mode mode = Mode::kAdhoc;
  std::vector<uint64_t> data_ids;  // timestamps in ms
  uint64_t t_begin = 0;
  uint64_t t_end = 0;

  bool operator==(const AnalysisSpec&) const = default;
};

// Vectorized request: the analyses are processed together in one session.
struct Job {
  std::string job_id;
  std::vector<AnalysisSpec> analyses;
};

nlohmann::json to_json(const AnalysisSpec& a);
nlohmann::json to_json(const Job& j);
// Throws FormatError on missing fields, duplicate data IDs, an empty
// data ID list or an inverted stream window.
AnalysisSpec analysis_from_json(const nlohmann::json& j);
Job job_from_json(const nlohmann::json& j);

}  // namespace mpcpipe::party
