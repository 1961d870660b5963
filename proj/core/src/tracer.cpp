// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/tracer.hpp"

#include <algorithm>

#include "moviebench/rpc_client.hpp"

namespace moviebench {

Recorder::Recorder(Options opts) : opts_(std::move(opts)), buffer_(opts_.buffer_capacity) {
  if (!opts_.collector.empty()) {
    // The shipping channel records no spans of its own.
    chan_ = std::make_unique<Channel>(opts_.collector, opts_.service, nullptr);
    flusher_ = std::thread([this] { flusher_main(); });
  }
}

Recorder::~Recorder() { stop(); }

bool Recorder::record(Span s) { return buffer_.record(std::move(s)); }

bool Recorder::ship_batch(const std::vector<Span>& batch) {
  if (batch.empty()) return true;
  std::string lines;
  lines.reserve(batch.size() * 120);
  for (const auto& s : batch) {
    lines += span_to_line(s);
    lines += '\n';
  }
  RpcMessage req;
  req.kind = MsgKind::request;
  req.method = "SpanBatch";
  req.context = root_context(ids_);
  req.add(0, std::move(lines));

  CallOptions opts;
  opts.timeout_ns = 2000000000ull;
  auto resp = chan_->call(req, opts);
  if (!resp || resp->kind == MsgKind::error) {
    send_failures_.fetch_add(1, std::memory_order_relaxed);
    return false;
  }
  shipped_.fetch_add(batch.size(), std::memory_order_relaxed);
  batches_.fetch_add(1, std::memory_order_relaxed);
  return true;
}

bool Recorder::flush_some() {
  std::lock_guard<std::mutex> lock(flush_mu_);
  if (!pending_.empty()) {
    if (!ship_batch(pending_)) return false;
    pending_.clear();
  }
  while (true) {
    pending_.clear();
    if (buffer_.drain(pending_, opts_.batch_spans) == 0) {
      pending_.clear();
      return true;
    }
    if (!ship_batch(pending_)) return false;  // keep pending_ for retry
    pending_.clear();
  }
}

void Recorder::flusher_main() {
  set_background_thread_priority();
  uint64_t backoff = opts_.retry_initial_ns;
  uint64_t last_flush = mono_now_ns();
  // Tick at half the flush interval: cheap enough that a fleet of recorders
  // on one core does not perturb request scheduling, fine-grained enough to
  // honor the 100 ms / 1000-span shipping contract.
  uint64_t tick = opts_.flush_interval_ns / 2;
  if (tick < 1000000ull) tick = 1000000ull;
  while (!stopping_.load(std::memory_order_relaxed)) {
    sleep_ns(tick);
    uint64_t now = mono_now_ns();
    bool due = (now - last_flush) >= opts_.flush_interval_ns;
    bool pressure = buffer_.approx_size() >= opts_.batch_spans;
    if (!due && !pressure) continue;
    if (flush_some()) {
      backoff = opts_.retry_initial_ns;
      last_flush = now;
    } else {
      // Collector unreachable: back off but keep the batch for retry.
      sleep_ns(backoff);
      backoff = std::min(backoff * 2, opts_.retry_max_ns);
      last_flush = mono_now_ns();
    }
  }
}

void Recorder::final_flush(uint64_t deadline_ns) {
  if (chan_ == nullptr) return;
  while (mono_now_ns() < deadline_ns) {
    if (flush_some()) {
      std::lock_guard<std::mutex> lock(flush_mu_);
      if (pending_.empty() && buffer_.approx_size() == 0) return;
    } else {
      sleep_ns(20000000ull);
    }
  }
  // Deadline passed with spans still on board: account them as dropped.
  std::lock_guard<std::mutex> lock(flush_mu_);
  uint64_t left = pending_.size();
  pending_.clear();
  std::vector<Span> rest;
  left += buffer_.drain(rest, buffer_.capacity());
  flush_dropped_.fetch_add(left, std::memory_order_relaxed);
}

void Recorder::stop() {
  bool expected = false;
  if (stopping_.compare_exchange_strong(expected, true)) {
    if (flusher_.joinable()) flusher_.join();
  }
}

Recorder::Counters Recorder::counters() const {
  Counters c;
  c.recorded = buffer_.recorded();
  c.dropped = buffer_.dropped() + flush_dropped_.load(std::memory_order_relaxed);
  c.shipped = shipped_.load(std::memory_order_relaxed);
  c.batches = batches_.load(std::memory_order_relaxed);
  c.send_failures = send_failures_.load(std::memory_order_relaxed);
  return c;
}

}  // namespace moviebench
