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
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpcpipe/client/client.h"

namespace mpcpipe::client {

// User-side HTTP client for the orchestrator. Non-2xx answers throw
// ApiFailure carrying the status and the server's error text.
class ApiFailure : public std::runtime_error {
 public:
  ApiFailure(int status, const std::string& msg) : std::runtime_error(msg), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class Api {
 public:
  Api(std::string base_url, std::string token);

  void ingest(uint64_t ts, const Bytes& record) const;
  std::vector<uint64_t> samples() const;
  // Public keys of parties 1..3.
  std::array<crypto::RsaKey, 3> party_keys() const;
  std::string request(const nlohmann::json& body) const;
  nlohmann::json analysis(const std::string& id) const;
  nlohmann::json result(const std::string& id) const;
  // Polls until the analysis is done or failed.
  nlohmann::json wait_result(const std::string& id, std::chrono::milliseconds limit) const;

 private:
  nlohmann::json call(const std::string& method, const std::string& path, const std::string& body = "") const;

  std::string base_, token_;
};

// Device send: encrypts the sample, picks a fresh millisecond timestamp and
// ingests it. Returns the timestamp (the data-point ID).
uint64_t device_send(const Api& api, DeviceState& st, const std::vector<double>& sample);

// Builds envelopes for `spec` and submits the request; returns the id.
std::string request_adhoc(const Api& api, const DeviceState& st, const std::array<crypto::RsaKey, 3>& pks,
                          const std::string& type, const std::vector<uint64_t>& ids);
std::string request_stream(const Api& api, const DeviceState& st, const std::array<crypto::RsaKey, 3>& pks,
                           const std::string& type, uint64_t t_begin, uint64_t t_end, uint64_t batch);

// Fetches and decrypts a finished result. nullopt on tag failure.
std::optional<std::vector<std::array<double, aesgcm::kClasses>>> fetch_result(
    const Api& api, const DeviceState& st, const std::array<crypto::RsaKey, 3>& pks, const std::string& id);

}  // namespace mpcpipe::client
