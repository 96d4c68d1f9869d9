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

#include <map>
#include <optional>
#include <string>

namespace mpcpipe {

// Flat `key = value` configuration, one entry per line. `#` starts a
// comment; values may be wrapped in double quotes. Later keys win.
class KvConfig {
 public:
  static KvConfig parse(const std::string& text);
  static KvConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  // Throws FormatError when the key is missing.
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  // Entries whose key starts with `prefix`, keyed by the remainder.
  std::map<std::string, std::string> with_prefix(const std::string& prefix) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  std::string dump() const;

  // Relative paths in values are resolved against this directory by callers.
  const std::string& base_dir() const { return base_dir_; }
  std::string path(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
  std::string base_dir_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& data);

}  // namespace mpcpipe
