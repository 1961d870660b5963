// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_set>

#include "moviebench/digest.hpp"
#include "moviebench/rpc_server.hpp"

namespace moviebench {

// Central span sink: ingests SpanBatch RPCs, deduplicates by
// (trace_id, span_id, kind) and appends unique spans to an append-only
// span-log file, keeping a trace_id -> span count index in memory.
class CollectorServer {
 public:
  struct Options {
    uint16_t port = 0;
    std::string log_path;
    int workers = 2;
    size_t queue_capacity = 512;
    size_t max_frame = kDefaultMaxFrame;
  };

  struct Totals {
    uint64_t lines = 0;
    uint64_t unique_spans = 0;
    uint64_t duplicates = 0;
    uint64_t malformed = 0;
    uint64_t traces = 0;
    std::map<std::string, uint64_t> per_service;
  };

  static Result<std::unique_ptr<CollectorServer>> start(Options opts);
  ~CollectorServer();

  void stop();  // flushes and closes the log
  uint16_t port() const { return server_->port(); }
  Totals totals() const;
  // Text used by the Stats method; parse_stats_text inverts it.
  std::string stats_text() const;
  static Result<Totals> parse_stats_text(std::string_view text);

  RpcServer* server() { return server_.get(); }

 private:
  CollectorServer() = default;
  Result<std::vector<Field>> handle_batch(const RpcMessage& req);

  struct Key {
    U128 trace;
    uint64_t span;
    uint8_t kind;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      return static_cast<size_t>(mix64(k.trace.lo ^ k.span) ^ (k.trace.hi + k.kind));
    }
  };

  Options opts_;
  std::unique_ptr<RpcServer> server_;
  mutable std::mutex mu_;
  FILE* log_ = nullptr;
  uint64_t last_flush_ns_ = 0;
  std::unordered_set<Key, KeyHash> seen_;
  std::unordered_map<U128, uint64_t, U128Hash> trace_index_;
  Totals totals_;
};

}  // namespace moviebench
