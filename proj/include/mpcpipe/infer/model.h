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
#include <string>
#include <vector>

#include "mpcpipe/rss/matrix.h"

namespace mpcpipe::infer {

enum class Activation : uint8_t { kLinear = 0, kRelu = 1 };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

struct LayerSpec {
  size_t in = 0;
  size_t out = 0;
  Activation act = Activation::kLinear;
  bool operator==(const LayerSpec&) const = default;
};

struct Architecture {
  int frac_bits = kFracBits;
  std::vector<LayerSpec> layers;
  bool operator==(const Architecture&) const = default;

  // Throws std::invalid_argument unless consecutive dims chain.
  void validate() const;
  size_t input_width() const { return layers.empty() ? 0 : layers.front().in; }
  size_t output_width() const { return layers.empty() ? 0 : layers.back().out; }
};

// 187 -> 50 -> 50 -> 50 -> 50 -> 5, ReLU on hidden layers, linear logits.
Architecture reference_architecture();

struct PlainLayer {
  std::vector<double> w;  // in x out, row-major
  std::vector<double> b;  // out
};

struct PlainModel {
  Architecture arch;
  std::vector<PlainLayer> layers;

  // JSON: {"frac_bits":8,"layers":[{"in","out","activation","weights":[[..]..],"bias":[..]}]}
  static PlainModel from_json(const std::string& text);
  std::string to_json() const;
};

// He-uniform weights, U[-1,1] * sqrt(6 / fan-in), biases U[-0.1, 0.1].
// Used for demo clusters and benchmarks when no trained model is supplied.
PlainModel random_model(const Architecture& arch, uint64_t seed);
// Parameters rounded through the fixed-point encoding, i.e. the model the
// parties actually hold.
PlainModel quantize(const PlainModel& m);

// Float forward pass, the reference the fixed-point pipeline approximates.
std::vector<double> forward_float(const PlainModel& m, const std::vector<double>& x, size_t rows);

struct SharedLayer {
  rss::ShareMatrix w;          // in x out
  rss::ShareVec<RingEl64> b;   // out
};

struct SharedModel {
  Architecture arch;
  std::vector<SharedLayer> layers;
};

// Fixed-point encodes and replicates every parameter; element [p] is party p's view.
std::array<SharedModel, 3> share_model(const PlainModel& m);

// Versioned share file: magic, version, party, architecture, per-layer
// share blobs, SHA-256 over everything before it.
Bytes write_model_share(const SharedModel& m, int party);
// Throws FormatError on bad magic, version, checksum or party.
SharedModel read_model_share(ByteSpan file, int expected_party);

}  // namespace mpcpipe::infer
