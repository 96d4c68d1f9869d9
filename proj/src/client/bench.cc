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

#include "mpcpipe/client/bench.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <thread>

#include "mpcpipe/party/context.h"

namespace mpcpipe::client {

using nlohmann::json;

namespace {

std::vector<double> synthetic_sample(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(aesgcm::kSampleValues);
  for (auto& v : x) v = g(rng);
  return x;
}

// Ingest is eventually consistent; a request may race the commit stage.
std::string request_when_visible(const Api& api, const DeviceState& st, const std::array<crypto::RsaKey, 3>& pks,
                                 const std::string& type, const std::vector<uint64_t>& ids) {
  for (int attempt = 0;; ++attempt) {
    try {
      return request_adhoc(api, st, pks, type, ids);
    } catch (const ApiFailure& e) {
      if (e.status() != 404 || attempt > 200) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
}

}  // namespace

double AdhocPoint::mean_ms() const {
  if (latency_ms.empty()) return 0;
  return std::accumulate(latency_ms.begin(), latency_ms.end(), 0.0) / static_cast<double>(latency_ms.size());
}

std::vector<AdhocPoint> bench_adhoc(const Api& api, DeviceState& st, const std::array<crypto::RsaKey, 3>& pks,
                                    const std::string& type, const std::vector<size_t>& sizes, size_t reps,
                                    const Progress& progress) {
  std::mt19937_64 rng(st.counter + 1);
  std::vector<AdhocPoint> out;
  for (size_t b : sizes) {
    AdhocPoint pt;
    pt.batch = b;
    for (size_t r = 0; r < reps; ++r) {
      std::vector<uint64_t> ids;
      for (size_t i = 0; i < b; ++i) ids.push_back(device_send(api, st, synthetic_sample(rng)));
      auto id = request_when_visible(api, st, pks, type, ids);
      auto res = api.wait_result(id, std::chrono::minutes(30));
      if (res.at("state") != "done") {
        ++pt.failures;
        continue;
      }
      double lat = static_cast<double>(res.at("stored_ms").get<uint64_t>() - res.at("submitted_ms").get<uint64_t>());
      pt.latency_ms.push_back(lat);
      if (progress) progress("adhoc batch " + std::to_string(b) + " rep " + std::to_string(r + 1) + ": " +
                             std::to_string(static_cast<long long>(lat)) + " ms");
    }
    out.push_back(std::move(pt));
  }
  return out;
}

void find_knee(StreamReport& r, double knee_factor) {
  r.knee_rate.reset();
  r.plateau_ms = 0;
  r.max_sustainable_rate = 0;
  double best = 0;
  size_t plateau = 0;
  for (size_t i = 0; i < r.points.size(); ++i) {
    const auto& p = r.points[i];
    bool departs = p.failures > 0 || (i > 0 && p.min_ms > knee_factor * best);
    if (departs) {
      r.knee_rate = p.rate_hz;
      break;
    }
    best = i == 0 ? p.min_ms : std::min(best, p.min_ms);
    r.plateau_ms += p.min_ms;
    ++plateau;
    r.max_sustainable_rate = p.rate_hz;
  }
  if (plateau > 0) r.plateau_ms /= static_cast<double>(plateau);
}

StreamReport bench_stream(const Api& api, DeviceState& st, const std::array<crypto::RsaKey, 3>& pks,
                          const std::string& type, const StreamOptions& opt, const Progress& progress) {
  StreamReport rep;
  rep.batch = opt.batch;
  std::mt19937_64 rng(st.counter + 7);
  for (double rate : opt.rates) {
    uint64_t start = party::now_ms();
    // Parties refuse stream batches once the window has closed, so the slack
    // bounds how long a backlog may drain; batches past it count as failures.
    uint64_t window_end = start + static_cast<uint64_t>(opt.seconds_per_rate * 1000) +
                          static_cast<uint64_t>(opt.window_slack.count());
    auto sid = request_stream(api, st, pks, type, start, window_end, opt.batch);
    size_t n = std::max<size_t>(1, static_cast<size_t>(rate * opt.seconds_per_rate));
    std::map<uint64_t, uint64_t> sent;  // data ID -> send time
    auto t0 = std::chrono::steady_clock::now();
    for (size_t i = 0; i < n; ++i) {
      std::this_thread::sleep_until(t0 + std::chrono::microseconds(static_cast<int64_t>(1e6 * i / rate)));
      uint64_t now = party::now_ms();
      uint64_t id = device_send(api, st, synthetic_sample(rng));
      sent[id] = now;
    }
    // Wait until every record is covered by a finished batch.
    StreamPoint pt;
    pt.rate_hz = rate;
    pt.records = n;
    auto deadline = std::chrono::steady_clock::now() + opt.drain_limit;
    std::vector<double> mins, maxs;
    for (;;) {
      auto meta = api.analysis(sid);
      size_t covered = 0;
      bool all_final = true;
      std::vector<json> kids;
      for (const auto& c : meta.at("children")) {
        auto k = api.analysis(c.get<std::string>());
        covered += k.at("data_ids").size();
        if (k.at("state") != "done" && k.at("state") != "failed") all_final = false;
        kids.push_back(k);
      }
      if ((covered >= n && all_final) || std::chrono::steady_clock::now() >= deadline) {
        pt.batches = kids.size();
        for (const auto& k : kids) {
          if (k.at("state") != "done") {
            pt.failures += k.at("data_ids").size();
            continue;
          }
          uint64_t stored = k.at("stored_ms");
          uint64_t first = UINT64_MAX, last = 0;
          for (auto id : k.at("data_ids").get<std::vector<uint64_t>>()) {
            auto it = sent.find(id);
            if (it == sent.end()) continue;
            first = std::min(first, it->second);
            last = std::max(last, it->second);
          }
          if (last == 0) continue;
          mins.push_back(static_cast<double>(stored - last));
          maxs.push_back(static_cast<double>(stored - first));
        }
        pt.failures += n - std::min(n, covered);
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    if (!mins.empty()) {
      auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      };
      pt.min_ms = mean(mins);
      pt.max_ms = mean(maxs);
      pt.worst_ms = *std::max_element(maxs.begin(), maxs.end());
    }
    rep.points.push_back(pt);
    // Windows of consecutive rates must not overlap, or records would be
    // analysed twice.
    while (party::now_ms() <= window_end) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (progress) {
      progress("stream batch " + std::to_string(opt.batch) + " rate " + std::to_string(rate) + " Hz: min " +
               std::to_string(static_cast<long long>(pt.min_ms)) + " ms, max " +
               std::to_string(static_cast<long long>(pt.max_ms)) + " ms");
    }
    find_knee(rep, opt.knee_factor);
    if (rep.knee_rate) break;
  }
  return rep;
}

json to_json(const std::vector<AdhocPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) {
    arr.push_back({{"batch", p.batch}, {"reps", p.latency_ms.size()}, {"failures", p.failures},
                   {"mean_ms", p.mean_ms()}, {"latency_ms", p.latency_ms}});
  }
  return arr;
}

json to_json(const StreamReport& r) {
  json pts = json::array();
  for (const auto& p : r.points) {
    pts.push_back({{"rate_hz", p.rate_hz}, {"records", p.records}, {"batches", p.batches}, {"failures", p.failures},
                   {"min_ms", p.min_ms}, {"max_ms", p.max_ms}, {"worst_ms", p.worst_ms}});
  }
  json j{{"batch", r.batch}, {"points", pts}, {"plateau_ms", r.plateau_ms},
         {"max_sustainable_rate_hz", r.max_sustainable_rate}};
  j["knee_rate_hz"] = r.knee_rate ? json(*r.knee_rate) : json(nullptr);
  return j;
}

}  // namespace mpcpipe::client
