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
#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>

#include "mpcpipe/common/error.h"
#include "mpcpipe/rss/session.h"

namespace mpcpipe::rss {

// Three linked sessions' worth of in-memory links: links[i] = {to_next, to_prev}.
struct LocalLinks {
  std::array<std::shared_ptr<PeerLink>, 3> to_next, to_prev;
};
LocalLinks make_local_links();

template <class R>
struct LocalRun {
  std::array<std::optional<R>, 3> out;
  std::array<std::exception_ptr, 3> err;

  bool ok() const { return !err[0] && !err[1] && !err[2]; }
  // Abort code seen by each party, empty if it finished or failed otherwise.
  std::array<std::string, 3> abort_codes() const {
    std::array<std::string, 3> codes;
    for (int i = 0; i < 3; ++i) {
      if (!err[i]) continue;
      try {
        std::rethrow_exception(err[i]);
      } catch (const ProtocolAbort& e) {
        codes[i] = e.code();
      } catch (...) {
        codes[i] = "error";
      }
    }
    return codes;
  }
  // Rethrows the first party error.
  void check() const {
    for (const auto& e : err) {
      if (e) std::rethrow_exception(e);
    }
  }
};

struct LocalOptions {
  SecurityMode mode = SecurityMode::kSemiHonest;
  uint64_t seed = 1;
  std::string label = "local";
  bool finish = true;  // compare transcripts at the end
};

// Runs fn(Session&) for parties 0..2 on three threads over in-memory links.
template <class F>
auto run_local(const LocalOptions& opt, F&& fn) {
  using Raw = std::invoke_result_t<F&, Session&>;
  using R = std::conditional_t<std::is_void_v<Raw>, bool, Raw>;
  LocalRun<R> run;
  auto links = make_local_links();
  auto seeds = derive_local_seeds(opt.seed);
  auto id = make_session_id(opt.label);
  std::array<std::thread, 3> th;
  for (int p = 0; p < 3; ++p) {
    th[p] = std::thread([&, p] {
      Session s(p, id, opt.mode, seeds[p], links.to_next[p], links.to_prev[p]);
      try {
        if constexpr (std::is_void_v<Raw>) {
          fn(s);
          run.out[p] = true;
        } else {
          run.out[p] = fn(s);
        }
        if (opt.finish) s.finish();
      } catch (const ProtocolAbort& e) {
        s.notify_abort(e.code());
        run.out[p].reset();
        run.err[p] = std::current_exception();
      } catch (...) {
        s.notify_abort("local-error");
        run.out[p].reset();
        run.err[p] = std::current_exception();
      }
    });
  }
  for (auto& t : th) t.join();
  return run;
}

template <class F>
auto run_local(F&& fn) {
  return run_local(LocalOptions{}, std::forward<F>(fn));
}

}  // namespace mpcpipe::rss
