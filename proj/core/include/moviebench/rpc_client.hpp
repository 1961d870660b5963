// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "moviebench/net.hpp"
#include "moviebench/span.hpp"
#include "moviebench/wire.hpp"

namespace moviebench {

class Recorder;

struct CallOptions {
  uint64_t timeout_ns = 1000000000ull;  // 1 s
  size_t max_frame = kDefaultMaxFrame;
};

// One TCP stream to one endpoint, confined to a single logical worker.
// Every attempted call emits exactly one client span (when a recorder is
// attached); the span brackets the full exchange on the caller's clock.
class Channel {
 public:
  Channel(std::string endpoint, std::string caller_service, Recorder* recorder);

  // request.kind must be request and request.context must be fully set by the
  // caller. Transport failures come back as errors (Timeout,
  // ConnectionRefused, ProtocolError); application error responses come back
  // as messages with kind == error.
  Result<RpcMessage> call(const RpcMessage& request, const CallOptions& opts = CallOptions{});

  // Parallel fan-out: phase one writes every request, phase two multiplexes
  // reads as responses arrive. Channels must be distinct. One client span per
  // call, with genuinely overlapping intervals.
  static std::vector<Result<RpcMessage>> call_parallel(const std::vector<Channel*>& channels,
                                                       const std::vector<RpcMessage>& requests,
                                                       const CallOptions& opts = CallOptions{});

  Status ensure_connected(uint64_t timeout_ns);
  void reset() { conn_.close(); }
  bool connected() const { return conn_.valid(); }
  const std::string& endpoint() const { return endpoint_; }

  // True when the most recent call's client span was dropped by the buffer.
  bool last_span_dropped() const { return last_span_dropped_; }

 private:
  friend struct ParallelCallState;

  void emit_span(const RpcMessage& request, uint64_t t_start, uint64_t net_ns, SpanStatus status);

  std::string endpoint_;
  std::string caller_service_;
  Recorder* recorder_;
  TcpConn conn_;
  bool last_span_dropped_ = false;
};

}  // namespace moviebench
