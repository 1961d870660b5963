// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "moviebench/span.hpp"

namespace moviebench {

class Channel;

// Per-process span recorder: a bounded ring the request path appends to, and
// one background flusher shipping SpanBatch RPCs to the collector with
// at-least-once delivery. record() never blocks and never performs I/O.
class Recorder {
 public:
  struct Options {
    std::string service;
    std::string collector;  // host:port; empty disables shipping (record-only)
    size_t buffer_capacity = 65536;
    uint64_t flush_interval_ns = 100000000ull;  // 100 ms
    size_t batch_spans = 1000;
    uint64_t retry_initial_ns = 50000000ull;
    uint64_t retry_max_ns = 1000000000ull;
  };

  struct Counters {
    uint64_t recorded = 0;
    uint64_t dropped = 0;
    uint64_t shipped = 0;
    uint64_t batches = 0;
    uint64_t send_failures = 0;
  };

  explicit Recorder(Options opts);
  ~Recorder();

  // Returns false when the ring was full and the span was dropped.
  bool record(Span s);

  // Ships everything still buffered, retrying until empty or deadline.
  // Spans that cannot be shipped by the deadline are added to the dropped
  // counter so persisted + dropped == recorded stays exact.
  void final_flush(uint64_t deadline_ns);

  void stop();

  Counters counters() const;
  const std::string& service() const { return opts_.service; }

 private:
  void flusher_main();
  // Ships pending_ then drains more; returns false on send failure.
  bool flush_some();
  bool ship_batch(const std::vector<Span>& batch);

  Options opts_;
  SpanBuffer buffer_;
  std::atomic<bool> stopping_{false};
  std::atomic<uint64_t> shipped_{0};
  std::atomic<uint64_t> batches_{0};
  std::atomic<uint64_t> send_failures_{0};
  std::atomic<uint64_t> flush_dropped_{0};

  std::mutex flush_mu_;
  std::vector<Span> pending_;  // un-acked batch retained for retry
  std::unique_ptr<Channel> chan_;
  IdSource ids_;
  std::thread flusher_;
};

}  // namespace moviebench
