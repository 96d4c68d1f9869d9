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

#include "mpcpipe/party/job.h"

#include <algorithm>

#include "mpcpipe/common/error.h"

namespace mpcpipe::party {

std::string to_string(Mode m) { return m == Mode::kStream ? "stream" : "adhoc"; }

Mode parse_mode(const std::string& s) {
  if (s == "adhoc") return Mode::kAdhoc;
  if (s == "stream") return Mode::kStream;
  throw FormatError("unknown mode: " + s);
}

nlohmann::json to_json(const AnalysisSpec& a) {
  nlohmann::json j{{"id", a.id}, {"user", a.user}, {"type", a.type}, {"mode", to_string(a.mode)}, {"data_ids", a.data_ids}};
  if (a.mode == Mode::kStream) {
    j["t_begin"] = a.t_begin;
    j["t_end"] = a.t_end;
  }
  return j;
}

nlohmann::json to_json(const Job& j) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : j.analyses) arr.push_back(to_json(a));
  return {{"job_id", j.job_id}, {"analyses", arr}};
}

AnalysisSpec analysis_from_json(const nlohmann::json& j) {
  AnalysisSpec a;
  try {
    a.id = j.at("id").get<std::string>();
    a.user = j.at("user").get<std::string>();
    a.type = j.at("type").get<std::string>();
    a.mode = parse_mode(j.value("mode", std::string("adhoc")));
    a.data_ids = j.at("data_ids").get<std::vector<uint64_t>>();
    if (a.mode == Mode::kStream) {
      a.t_begin = j.at("t_begin").get<uint64_t>();
      a.t_end = j.at("t_end").get<uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("analysis: ") + e.what());
  }
  if (a.id.empty() || a.user.empty() || a.type.empty()) throw FormatError("analysis: empty id, user or type");
  if (a.data_ids.empty()) throw FormatError("analysis: no data IDs");
  auto sorted = a.data_ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw FormatError("analysis: duplicate data ID");
  if (a.mode == Mode::kStream && a.t_end < a.t_begin) throw FormatError("analysis: t_end before t_begin");
  return a;
}

Job job_from_json(const nlohmann::json& j) {
  Job job;
  try {
    job.job_id = j.at("job_id").get<std::string>();
    for (const auto& a : j.at("analyses")) job.analyses.push_back(analysis_from_json(a));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("job: ") + e.what());
  }
  if (job.job_id.empty()) throw FormatError("job: empty job_id");
  if (job.analyses.empty()) throw FormatError("job: no analyses");
  return job;
}

}  // namespace mpcpipe::party
