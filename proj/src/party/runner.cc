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

#include "mpcpipe/party/runner.h"

#include <spdlog/spdlog.h>

#include "mpcpipe/aesgcm/dist.h"
#include "mpcpipe/common/error.h"
#include "mpcpipe/infer/infer.h"
#include "mpcpipe/party/context.h"

namespace mpcpipe::party {
namespace {

using aesgcm::kSampleRecordBytes;
using aesgcm::kSampleValues;

struct Prepared {
  std::string code;  // empty when the local checks passed
  aesgcm::KeySchedule key{};
  std::vector<Bytes> records;
};

Prepared prepare(const AnalysisSpec& a, const PartyContext& ctx, JobSource& src, uint64_t now) {
  Prepared p;
  if (!ctx.models.count(a.type)) {
    p.code = failure::kUnknownType;
    return p;
  }
  if (!check_stream_window(a, now)) {
    p.code = abort_code::kStreamWindow;
    return p;
  }
  auto env = src.get_keyshare(a.id, ctx.index);
  if (!env) {
    p.code = failure::kKeyshareMissing;
    return p;
  }
  auto key = unwrap_key_share(*env, derive_ad(a, ctx.pk_moduli, ctx.index), *ctx.sk);
  if (!key) {
    p.code = abort_code::kConsentMismatch;
    return p;
  }
  p.key = *key;
  auto data = src.get_data(a.user, a.data_ids);
  if (data.size() != a.data_ids.size()) {
    p.code = failure::kDataMissing;
    return p;
  }
  for (auto& d : data) {
    if (!d) {
      p.code = failure::kDataMissing;
      return p;
    }
    if (d->size() != kSampleRecordBytes) {
      p.code = failure::kFormat;
      return p;
    }
    p.records.push_back(std::move(*d));
  }
  return p;
}

// Sends the job digest and the local pass/fail byte per analysis to both
// peers; returns the per-analysis flag that all three parties passed.
std::vector<bool> agree(rss::Session& s, const Job& job, const std::vector<Prepared>& prep) {
  auto digest = crypto::sha256(to_bytes(to_json(job).dump()));
  Bytes msg(digest.begin(), digest.end());
  for (const auto& p : prep) msg.push_back(p.code.empty() ? 0 : 1);
  s.send(rss::Peer::kNext, rss::MsgTag::kControl, msg);
  s.send(rss::Peer::kPrev, rss::MsgTag::kControl, msg);
  std::vector<bool> ok(prep.size());
  for (size_t i = 0; i < prep.size(); ++i) ok[i] = prep[i].code.empty();
  for (auto peer : {rss::Peer::kNext, rss::Peer::kPrev}) {
    Bytes theirs = s.recv(peer, rss::MsgTag::kControl, msg.size());
    if (!std::equal(digest.begin(), digest.end(), theirs.begin())) s.fail(failure::kJobMismatch);
    for (size_t i = 0; i < prep.size(); ++i) ok[i] = ok[i] && theirs[digest.size() + i] == 0;
  }
  return ok;
}

void compute(rss::Session& s, const Job& job, const PartyContext& ctx, std::vector<Prepared>& prep,
             std::vector<AnalysisOutcome>& out) {
  auto ok = agree(s, job, prep);
  const auto& as = job.analyses;
  for (size_t i = 0; i < as.size(); ++i) {
    if (!ok[i]) out[i].code = prep[i].code.empty() ? failure::kPeerRefused : prep[i].code;
  }

  std::vector<size_t> live;
  std::vector<aesgcm::KeySchedule> mine;
  for (size_t i = 0; i < as.size(); ++i) {
    if (!ok[i]) continue;
    live.push_back(i);
    mine.push_back(prep[i].key);
  }
  if (live.empty()) return;
  auto keys = aesgcm::share_key_schedules(s, mine);

  std::vector<aesgcm::DecInput> dec;
  for (size_t k = 0; k < live.size(); ++k) {
    size_t i = live[k];
    for (auto& r : prep[i].records) dec.push_back({std::move(r), as[i].user, k});
  }
  auto plain = aesgcm::dist_dec(s, keys, dec);

  // Authentication results are public, so every party drops the same analyses.
  std::vector<rss::ShareMatrix> x(as.size());
  size_t at = 0;
  std::vector<size_t> decrypted;
  for (size_t i : live) {
    size_t n = as[i].data_ids.size();
    bool good = true;
    rss::ShareMatrix m(n, kSampleValues);
    for (size_t r = 0; r < n; ++r, ++at) {
      if (!plain[at]) {
        good = false;
        continue;
      }
      std::copy(plain[at]->begin(), plain[at]->end(), m.v.begin() + r * kSampleValues);
    }
    if (good) {
      x[i] = std::move(m);
      decrypted.push_back(i);
    } else {
      out[i].code = abort_code::kAuthFailed;
    }
  }

  // One vectorized inference per analysis type.
  std::map<std::string, std::vector<size_t>> by_type;
  for (size_t i : decrypted) by_type[as[i].type].push_back(i);
  std::vector<rss::ShareMatrix> y(as.size());
  for (const auto& [type, members] : by_type) {
    std::vector<rss::ShareMatrix> parts;
    for (size_t i : members) parts.push_back(std::move(x[i]));
    auto [flat, layout] = infer::flatten_batch(parts);
    auto logits = infer::infer(s, flat, *ctx.models.at(type));
    layout.cols = logits.cols;
    auto split = infer::unflatten_batch(logits, layout);
    for (size_t k = 0; k < members.size(); ++k) y[members[k]] = std::move(split[k]);
  }

  std::vector<aesgcm::EncInput> enc;
  for (size_t i : decrypted) {
    size_t key = std::find(live.begin(), live.end(), i) - live.begin();
    enc.push_back({std::move(y[i].v), {as[i].user, ctx.pk_moduli, as[i].id, as[i].type}, key});
  }
  auto cts = aesgcm::dist_enc(s, keys, enc);
  s.finish();
  for (size_t k = 0; k < decrypted.size(); ++k) {
    out[decrypted[k]].ok = true;
    out[decrypted[k]].result = std::move(cts[k]);
  }
}

}  // namespace

JobReport run_job(rss::Session& s, const Job& job, const PartyContext& ctx, JobSource& src, uint64_t now) {
  JobReport rep;
  rep.job_id = job.job_id;
  rep.started_ms = now_ms();
  const auto& as = job.analyses;
  std::vector<Prepared> prep(as.size());
  rep.analyses.resize(as.size());
  size_t samples = 0;
  for (size_t i = 0; i < as.size(); ++i) {
    rep.analyses[i].id = as[i].id;
    try {
      prep[i] = prepare(as[i], ctx, src, now);
    } catch (const NetworkError&) {
      prep[i].code = failure::kNetwork;
    } catch (const FormatError&) {
      prep[i].code = failure::kFormat;
    }
    if (!prep[i].code.empty()) {
      spdlog::warn("party {}: job {} analysis {} refused locally: {}", ctx.index + 1, job.job_id, as[i].id, prep[i].code);
    }
    samples += as[i].data_ids.size();
  }
  spdlog::info("party {}: job {} starts ({} analyses, {} samples)", ctx.index + 1, job.job_id, as.size(), samples);

  std::string abort;
  try {
    compute(s, job, ctx, prep, rep.analyses);
  } catch (const ProtocolAbort& e) {
    abort = e.code();
  } catch (const NetworkError&) {
    abort = failure::kNetwork;
  } catch (const FormatError&) {
    abort = failure::kFormat;
  } catch (const std::exception& e) {
    abort = failure::kInternal;
    spdlog::error("party {}: job {} internal error: {}", ctx.index + 1, job.job_id, e.what());
  }
  if (!abort.empty()) {
    s.notify_abort(abort);
    spdlog::error("party {}: job {} aborted: {}", ctx.index + 1, job.job_id, abort);
    for (auto& o : rep.analyses) {
      o.ok = false;
      o.result.clear();
      if (o.code.empty()) o.code = abort;
    }
  }

  for (const auto& o : rep.analyses) {
    try {
      if (o.ok) {
        src.submit_result(o.id, ctx.index, o.result);
        spdlog::info("party {}: job {} analysis {} submitted ({} bytes)", ctx.index + 1, job.job_id, o.id,
                     o.result.size());
      } else {
        src.report_failure(o.id, ctx.index, o.code);
        spdlog::warn("party {}: job {} analysis {} failed: {}", ctx.index + 1, job.job_id, o.id, o.code);
      }
    } catch (const std::exception& e) {
      spdlog::error("party {}: job {} analysis {} not delivered to orchestrator: {}", ctx.index + 1, job.job_id,
                    o.id, e.what());
    }
  }
  rep.finished_ms = now_ms();
  return rep;
}

}  // namespace mpcpipe::party
