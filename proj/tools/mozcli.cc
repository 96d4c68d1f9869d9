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

// mozcli: device simulator, consent tooling, model sharing, result
// decryption, local clusters and the benchmark harness.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "daemon.h"
#include "json.hpp"
#include "mpcpipe/client/api.h"
#include "mpcpipe/client/bench.h"
#include "mpcpipe/client/client.h"
#include "mpcpipe/cluster/cluster.h"
#include "mpcpipe/common/kvconfig.h"
#include "mpcpipe/infer/model.h"
#include "mpcpipe/party/context.h"

namespace {

using namespace mpcpipe;
using nlohmann::json;

struct Globals {
  std::string url, token;
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? v : fallback;
}

std::vector<uint64_t> parse_ids(const std::string& s) {
  std::vector<uint64_t> ids;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) ids.push_back(std::stoull(tok));
  }
  if (ids.empty()) throw std::invalid_argument("empty ID list");
  return ids;
}

template <typename T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    if constexpr (std::is_floating_point_v<T>) {
      out.push_back(std::stod(tok));
    } else {
      out.push_back(static_cast<T>(std::stoull(tok)));
    }
  }
  return out;
}

client::DeviceState load_state(const std::string& path) { return client::DeviceState::from_kv(read_file(path)); }
void save_state(const std::string& path, const client::DeviceState& st) { write_file(path, st.to_kv()); }

client::Api make_api(const Globals& g) {
  if (g.url.empty()) throw std::invalid_argument("no orchestrator URL (--url or MPCPIPE_URL)");
  return client::Api(g.url, g.token);
}

std::array<crypto::RsaKey, 3> party_keys(const Globals& g, const std::vector<std::string>& pem_files) {
  if (pem_files.empty()) return make_api(g).party_keys();
  if (pem_files.size() != 3) throw std::invalid_argument("--pk needs exactly three PEM files");
  return {crypto::RsaKey::from_public_pem(read_file(pem_files[0])),
          crypto::RsaKey::from_public_pem(read_file(pem_files[1])),
          crypto::RsaKey::from_public_pem(read_file(pem_files[2]))};
}

std::vector<double> random_sample(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(aesgcm::kSampleValues);
  for (auto& v : x) v = g(rng);
  return x;
}

json logits_json(const std::vector<std::array<double, aesgcm::kClasses>>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"logits", r}, {"class", std::string(1, client::kClassLabels[client::argmax(r)])}});
  }
  return out;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"client tooling for the encrypted analysis pipeline"};
  app.require_subcommand(1);
  Globals g{env_or("MPCPIPE_URL", ""), env_or("MPCPIPE_TOKEN", "")};
  app.add_option("--url", g.url, "orchestrator base URL (env MPCPIPE_URL)");
  app.add_option("--token", g.token, "bearer token (env MPCPIPE_TOKEN)");

  // device
  auto* device = app.add_subcommand("device", "simulated sensing device");
  device->require_subcommand(1);
  std::string state_path, user, key_hex;
  auto* dinit = device->add_subcommand("init", "create a device state file with a fresh key");
  dinit->add_option("--state", state_path)->required();
  dinit->add_option("--user", user)->required();
  dinit->add_option("--key", key_hex, "32 hex digits; random when omitted");
  auto* dsend = device->add_subcommand("send", "encrypt and ingest samples");
  std::string csv;
  size_t random_n = 0, first_row = 0, row_count = 1;
  uint64_t seed = 1;
  dsend->add_option("--state", state_path)->required();
  dsend->add_option("--csv", csv, "heartbeat CSV, 187 values plus optional label per row")->check(CLI::ExistingFile);
  dsend->add_option("--row", first_row, "first CSV row to send");
  dsend->add_option("--count", row_count, "number of CSV rows to send");
  dsend->add_option("--random", random_n, "send N synthetic samples instead of CSV rows");
  dsend->add_option("--seed", seed, "seed for synthetic samples");

  // keyshare / request / stream
  std::string type = "ecg", ids_arg;
  std::vector<std::string> pk_files;
  uint64_t t_begin = 0, t_end = 0, batch = 16;
  auto* keyshare = app.add_subcommand("keyshare", "print the three key-share envelopes for a consent context");
  keyshare->add_option("--state", state_path)->required();
  keyshare->add_option("--type", type);
  keyshare->add_option("--ids", ids_arg, "comma-separated data IDs (ad hoc)");
  keyshare->add_option("--begin", t_begin, "stream window start (ms)");
  keyshare->add_option("--end", t_end, "stream window end (ms)");
  keyshare->add_option("--pk", pk_files, "PEM public keys of parties 1..3; fetched from the orchestrator otherwise");
  auto* request = app.add_subcommand("request", "request an ad hoc analysis");
  request->add_option("--state", state_path)->required();
  request->add_option("--type", type);
  request->add_option("--ids", ids_arg, "comma-separated data IDs")->required();
  auto* stream = app.add_subcommand("stream", "register a streaming analysis over a time window");
  stream->add_option("--state", state_path)->required();
  stream->add_option("--type", type);
  stream->add_option("--begin", t_begin)->required();
  stream->add_option("--end", t_end)->required();
  stream->add_option("--batch", batch, "micro-batch size B");

  // result
  std::string analysis_id;
  double wait_s = 0;
  auto* result = app.add_subcommand("result", "fetch and decrypt an analysis result");
  result->add_option("--state", state_path)->required();
  result->add_option("--id", analysis_id)->required();
  result->add_option("--wait", wait_s, "poll up to this many seconds for completion");

  // model-share
  std::string model_path, out_dir;
  bool random_model = false;
  auto* mshare = app.add_subcommand("model-share", "split a plaintext model into three provisioning files");
  mshare->add_option("--model", model_path, "model JSON")->check(CLI::ExistingFile);
  mshare->add_flag("--random", random_model, "He-uniform random model for the reference architecture");
  mshare->add_option("--seed", seed);
  mshare->add_option("--type", type);
  mshare->add_option("--out", out_dir)->required();

  // cluster
  auto* cluster = app.add_subcommand("cluster", "local single-host deployments");
  cluster->require_subcommand(1);
  std::string dir, mode = "sh";
  bool memory = false;
  long long flush_ms = 2000;
  auto* cinit = cluster->add_subcommand("init", "write keys, model shares and configs for four processes");
  cinit->add_option("--dir", dir)->required();
  cinit->add_option("--mode", mode, "sh|mal-lite");
  cinit->add_option("--model", model_path)->check(CLI::ExistingFile);
  cinit->add_option("--seed", seed, "random model seed");
  cinit->add_option("--flush-ms", flush_ms, "stream micro-batch flush interval");
  cinit->add_flag("--memory", memory, "in-memory stores");
  auto* crun = cluster->add_subcommand("run", "run all four services in this process");
  crun->add_option("--dir", dir)->required();

  // bench
  std::string bench_mode = "adhoc", sizes_arg = "1,16,64,256", rates_arg = "1,2,4,8,16,32,64", out_path;
  size_t reps = 10;
  double seconds = 10;
  auto* bench = app.add_subcommand("bench", "latency benchmark (ad hoc batch sizes or stream ingest rates)");
  bench->add_option("--mode", bench_mode, "adhoc|stream")->check(CLI::IsMember({"adhoc", "stream"}));
  bench->add_option("--cluster", dir, "run against an in-process cluster from this directory");
  bench->add_option("--state", state_path, "device state (remote orchestrator only)");
  bench->add_option("--type", type);
  bench->add_option("--sizes", sizes_arg, "ad hoc batch sizes");
  bench->add_option("--reps", reps, "repetitions per batch size");
  bench->add_option("--rates", rates_arg, "stream ingest rates in Hz, ascending");
  bench->add_option("--batch", batch, "stream micro-batch size");
  bench->add_option("--seconds", seconds, "stream ingest duration per rate");
  bench->add_option("--out", out_path, "also write the JSON report here");

  CLI11_PARSE(app, argc, argv);
  tools::setup_logging("mozcli", "", "warn");

  try {
    if (*dinit) {
      client::DeviceState st;
      st.user = user;
      if (key_hex.empty()) {
        crypto::random_bytes(st.key);
      } else {
        auto k = hex_decode(key_hex);
        if (k.size() != 16) throw std::invalid_argument("--key needs 32 hex digits");
        std::copy(k.begin(), k.end(), st.key.begin());
      }
      save_state(state_path, st);
      print({{"user", user}, {"state", state_path}});
    } else if (*dsend) {
      auto st = load_state(state_path);
      auto api = make_api(g);
      std::vector<std::vector<double>> samples;
      json labels = json::array();
      if (!csv.empty()) {
        auto rows = client::parse_ecg_csv(read_file(csv));
        if (first_row + row_count > rows.size()) throw std::out_of_range("CSV has " + std::to_string(rows.size()) + " rows");
        for (size_t i = first_row; i < first_row + row_count; ++i) {
          samples.push_back(rows[i].values);
          labels.push_back(rows[i].label ? json(*rows[i].label) : json(nullptr));
        }
      } else {
        std::mt19937_64 rng(seed);
        for (size_t i = 0; i < random_n; ++i) samples.push_back(random_sample(rng));
      }
      json ids = json::array();
      for (const auto& s : samples) {
        ids.push_back(client::device_send(api, st, s));
        save_state(state_path, st);  // the counter must never be reused, even after a crash
      }
      json out{{"ids", ids}};
      if (!csv.empty()) out["labels"] = labels;
      print(out);
    } else if (*keyshare) {
      auto st = load_state(state_path);
      party::AnalysisSpec a;
      a.user = st.user;
      a.type = type;
      if (!ids_arg.empty()) {
        a.data_ids = parse_ids(ids_arg);
      } else {
        a.mode = party::Mode::kStream;
        a.t_begin = t_begin;
        a.t_end = t_end;
      }
      auto pks = party_keys(g, pk_files);
      auto env = client::make_keyshares(st.key, a, {&pks[0], &pks[1], &pks[2]});
      json e = json::array();
      for (const auto& x : env) e.push_back(base64_encode(x));
      print({{"envelopes", e}});
    } else if (*request) {
      auto st = load_state(state_path);
      auto api = make_api(g);
      print({{"id", client::request_adhoc(api, st, api.party_keys(), type, parse_ids(ids_arg))}});
    } else if (*stream) {
      auto st = load_state(state_path);
      auto api = make_api(g);
      print({{"id", client::request_stream(api, st, api.party_keys(), type, t_begin, t_end, batch)}});
    } else if (*result) {
      auto st = load_state(state_path);
      auto api = make_api(g);
      json meta = wait_s > 0 ? api.wait_result(analysis_id, std::chrono::milliseconds(static_cast<long long>(wait_s * 1000)))
                             : api.result(analysis_id);
      if (meta.at("state") != "done") {
        print({{"id", analysis_id}, {"state", meta.at("state")}, {"code", meta.value("code", "")}});
        return 2;
      }
      auto rows = client::fetch_result(api, st, api.party_keys(), analysis_id);
      if (!rows) {
        std::cerr << "result tag did not verify: the ciphertext or its context was modified\n";
        return 3;
      }
      print({{"id", analysis_id}, {"state", "done"}, {"flags", meta.at("flags")}, {"rows", logits_json(*rows)}});
    } else if (*mshare) {
      if (model_path.empty() == !random_model) throw std::invalid_argument("give exactly one of --model or --random");
      auto m = random_model ? infer::random_model(infer::reference_architecture(), seed)
                            : infer::PlainModel::from_json(read_file(model_path));
      auto shares = infer::share_model(m);
      std::filesystem::create_directories(out_dir);
      json files = json::array();
      for (int i = 0; i < 3; ++i) {
        auto blob = infer::write_model_share(shares[i], i);
        auto path = (std::filesystem::path(out_dir) / (type + ".p" + std::to_string(i + 1) + ".share")).string();
        write_file(path, to_string(blob));
        files.push_back({{"party", i + 1}, {"path", path}, {"sha256", hex_encode(crypto::sha256(blob))}});
      }
      if (random_model) write_file((std::filesystem::path(out_dir) / "model.json").string(), m.to_json());
      print({{"files", files}});
    } else if (*cinit) {
      cluster::ClusterOptions o;
      o.dir = dir;
      o.mode = rss::parse_security_mode(mode);
      o.model_json = model_path;
      o.model_seed = seed;
      o.memory_stores = memory;
      o.flush_ms = flush_ms;
      auto l = cluster::init_cluster(o);
      print({{"dir", l.dir}, {"orchestrator", l.orchestrator_url}, {"tokens", l.user_tokens}});
    } else if (*crun) {
      tools::block_signals();
      cluster::LocalCluster c(cluster::ClusterLayout::load(dir));
      c.start();
      std::cerr << "cluster up at " << c.layout().orchestrator_url << "\n";
      tools::wait_for_signal();
      c.stop();
    } else if (*bench) {
      std::unique_ptr<cluster::LocalCluster> local;
      client::DeviceState st;
      if (!dir.empty()) {
        local = std::make_unique<cluster::LocalCluster>(cluster::ClusterLayout::load(dir));
        local->start();
        auto [u, tok] = *local->layout().user_tokens.begin();
        g.url = local->layout().orchestrator_url;
        g.token = tok;
        st.user = u;
        crypto::random_bytes(st.key);
      } else {
        if (state_path.empty()) throw std::invalid_argument("--state or --cluster is required");
        st = load_state(state_path);
      }
      auto api = make_api(g);
      auto pks = api.party_keys();
      auto progress = [](const std::string& s) { std::cerr << s << "\n"; };
      json report;
      if (bench_mode == "adhoc") {
        report = {{"mode", "adhoc"},
                  {"points", client::to_json(client::bench_adhoc(api, st, pks, type, parse_list<size_t>(sizes_arg), reps,
                                                                 progress))}};
      } else {
        client::StreamOptions so;
        so.batch = batch;
        so.rates = parse_list<double>(rates_arg);
        so.seconds_per_rate = seconds;
        report = client::to_json(client::bench_stream(api, st, pks, type, so, progress));
        report["mode"] = "stream";
      }
      if (!state_path.empty() && dir.empty()) save_state(state_path, st);
      if (!out_path.empty()) write_file(out_path, report.dump(2));
      print(report);
    }
  } catch (const client::ApiFailure& e) {
    std::cerr << "orchestrator answered " << e.status() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
