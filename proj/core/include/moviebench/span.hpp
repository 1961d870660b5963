// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "moviebench/common.hpp"
#include "moviebench/wire.hpp"

namespace moviebench {

enum class SpanKind : uint8_t { server = 0, client = 1 };
enum class SpanStatus : uint8_t { ok = 0, error = 1, dropped_child = 2 };

const char* span_kind_name(SpanKind k);
const char* span_status_name(SpanStatus s);

// One timed RPC-side record. t_start/t_end are monotonic ns on the recording
// process's clock. net_ns covers request-receive plus response-send time,
// app_ns the handler execution; the remainder of the interval is queue/wait.
struct Span {
  U128 trace_id;
  uint64_t span_id = 0;
  uint64_t parent_span_id = 0;
  std::string service;
  std::string operation;
  SpanKind kind = SpanKind::server;
  uint64_t t_start = 0;
  uint64_t t_end = 0;
  uint64_t net_ns = 0;
  uint64_t app_ns = 0;
  SpanStatus status = SpanStatus::ok;

  uint64_t duration_ns() const { return t_end - t_start; }
  uint64_t wait_ns() const {
    uint64_t d = duration_ns();
    uint64_t busy = net_ns + app_ns;
    return busy > d ? 0 : d - busy;
  }

  friend bool operator==(const Span&, const Span&) = default;
};

// Tab-separated line, the span-log wire and disk format:
// trace_id(hex32) span_id(hex16) parent(hex16) service operation kind
// t_start t_end net_ns app_ns status
std::string span_to_line(const Span& s);
Result<Span> span_from_line(std::string_view line);

// Bounded multi-producer ring (Vyukov-style). record() never blocks and never
// allocates a slot when full: the span is dropped and counted instead.
class SpanBuffer {
 public:
  explicit SpanBuffer(size_t capacity = 65536);

  bool record(Span s);  // false when dropped
  // Single-consumer drain of up to max spans.
  size_t drain(std::vector<Span>& out, size_t max);

  uint64_t recorded() const { return recorded_.load(std::memory_order_relaxed); }
  uint64_t dropped() const { return dropped_.load(std::memory_order_relaxed); }
  size_t capacity() const { return capacity_; }
  size_t approx_size() const;

 private:
  struct Cell {
    std::atomic<uint64_t> seq;
    Span span;
  };

  size_t capacity_;
  size_t mask_;
  std::unique_ptr<Cell[]> cells_;
  alignas(64) std::atomic<uint64_t> head_{0};
  alignas(64) std::atomic<uint64_t> tail_{0};
  std::atomic<uint64_t> recorded_{0};
  std::atomic<uint64_t> dropped_{0};
};

}  // namespace moviebench
