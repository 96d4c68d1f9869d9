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

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpcpipe/client/api.h"

namespace mpcpipe::client {

using Progress = std::function<void(const std::string&)>;

struct AdhocPoint {
  size_t batch = 0;
  std::vector<double> latency_ms;  // stored_ms - submitted_ms per repetition
  size_t failures = 0;
  double mean_ms() const;
};

// For each batch size: `reps` sequential analyses over fresh samples.
std::vector<AdhocPoint> bench_adhoc(const Api& api, DeviceState& st, const std::array<crypto::RsaKey, 3>& pks,
                                    const std::string& type, const std::vector<size_t>& sizes, size_t reps,
                                    const Progress& progress = {});

struct StreamPoint {
  double rate_hz = 0;
  size_t records = 0;
  size_t batches = 0;
  size_t failures = 0;
  // Per batch, the last record sent waits least (min) and the first waits
  // longest (max), both measured to result storage; means over batches.
  double min_ms = 0, max_ms = 0;
  double worst_ms = 0;  // largest single-record latency
};

struct StreamReport {
  size_t batch = 0;
  std::vector<StreamPoint> points;
  double plateau_ms = 0;            // mean min latency over the rates before the knee
  std::optional<double> knee_rate;  // first rate whose min latency leaves the plateau
  double max_sustainable_rate = 0;  // last rate before the knee
};

struct StreamOptions {
  size_t batch = 16;
  std::vector<double> rates{1, 2, 4, 8, 16, 32, 64};
  double seconds_per_rate = 10;
  // A rate departs the plateau when its min latency exceeds knee_factor
  // times the lowest min latency seen at any slower rate. The running
  // minimum, not the first point, is the baseline: at low rates the flush
  // interval rather than the computation dominates.
  double knee_factor = 2.0;
  // Stream window = ingest duration plus this slack.
  std::chrono::milliseconds window_slack{5000};
  std::chrono::seconds drain_limit{600};
};

// Ramps the ingest rate, one stream registration per rate, and stops at the
// first rate past the knee.
StreamReport bench_stream(const Api& api, DeviceState& st, const std::array<crypto::RsaKey, 3>& pks,
                          const std::string& type, const StreamOptions& opt, const Progress& progress = {});

// Knee detection on already measured points; exposed for tests.
void find_knee(StreamReport& r, double knee_factor);

nlohmann::json to_json(const std::vector<AdhocPoint>& pts);
nlohmann::json to_json(const StreamReport& r);

}  // namespace mpcpipe::client
