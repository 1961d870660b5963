// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/rpc_server.hpp"

#include <sys/socket.h>

#include "moviebench/tracer.hpp"

namespace moviebench {

namespace {
// Readers park in poll() this long between liveness checks of the stop flag.
constexpr uint64_t kIdleSliceNs = 250000000ull;  // 250 ms
constexpr uint64_t kSendBudgetNs = 10000000000ull;

// Admin plumbing stays out of the span stream (Health is traced: launch
// verifies the collector saw the health-probe spans).
bool untraced_method(const std::string& m) {
  return m == "Stats" || m == "Quit" || m == "Slowdown" || m == "SpanBatch";
}
}  // namespace

RpcServer::RpcServer(Options opts) : opts_(std::move(opts)) {
  register_method("Health", [](HandlerCtx&, const RpcMessage&) -> Result<std::vector<Field>> {
    std::vector<Field> out;
    out.push_back({0, "OK"});
    return out;
  });
}

RpcServer::~RpcServer() {
  stop();
  if (stop_thread_.joinable()) stop_thread_.join();
}

void RpcServer::register_method(const std::string& name, Handler handler) {
  handlers_[name] = std::move(handler);
}

Status RpcServer::start() {
  auto listener = TcpListener::bind_loopback(opts_.port);
  if (!listener) return listener.error();
  listener_ = std::move(*listener);
  {
    std::lock_guard<std::mutex> lock(mu_);
    started_ = true;
    stopping_ = false;
  }
  acceptor_ = std::thread([this] { accept_main(); });
  workers_.reserve(static_cast<size_t>(opts_.workers));
  for (int i = 0; i < opts_.workers; i++) {
    workers_.emplace_back([this, i] { worker_main(i); });
  }
  return ok_status();
}

void RpcServer::accept_main() {
  if (opts_.background) set_background_thread_priority();
  for (;;) {
    auto conn = listener_.accept();
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (stopping_) break;
    }
    if (!conn) break;
    c_conns_.fetch_add(1, std::memory_order_relaxed);
    auto state = std::make_shared<ConnState>();
    state->conn = std::move(*conn);
    {
      std::lock_guard<std::mutex> lock(conns_mu_);
      conns_.push_back(state);
    }
    readers_.fetch_add(1, std::memory_order_relaxed);
    std::thread([this, state] {
      reader_main(state);
      readers_.fetch_sub(1, std::memory_order_relaxed);
    }).detach();
  }
}

void RpcServer::reader_main(std::shared_ptr<ConnState> conn) {
  if (opts_.background) set_background_thread_priority();
  for (;;) {
    auto ready = conn->conn.wait_readable(mono_now_ns() + kIdleSliceNs);
    if (!ready) {
      if (ready.error().code == Errc::timeout) {
        std::lock_guard<std::mutex> lock(mu_);
        if (stopping_) return;
        continue;
      }
      return;
    }
    auto fr = conn->conn.read_frame(opts_.max_frame, mono_now_ns() + kSendBudgetNs);
    if (!fr) {
      return;  // eof, oversize or hard error: drop the connection
    }
    auto msg = decode_frame(fr->frame, opts_.max_frame);
    if (!msg) {
      // Protocol violation; the peer sees the close as ProtocolError.
      c_decode_.fetch_add(1, std::memory_order_relaxed);
      return;
    }
    if (msg->kind != MsgKind::request) return;
    c_requests_.fetch_add(1, std::memory_order_relaxed);

    Pending p;
    p.conn = conn;
    p.t_first = fr->t_first_byte;
    p.recv_ns = fr->active_ns;
    std::string method = msg->method;
    TraceContext ctx = msg->context;
    p.msg = std::move(*msg);

    bool enqueued = false;
    bool draining = false;
    {
      std::lock_guard<std::mutex> lock(mu_);
      draining = stopping_;
      if (!draining && queue_.size() < opts_.queue_capacity) {
        queue_.push_back(std::move(p));
        enqueued = true;
      }
    }
    if (enqueued) {
      queue_cv_.notify_one();
      continue;
    }
    // Immediate load-shed (or drain-phase) error response from the reader.
    c_shed_.fetch_add(1, std::memory_order_relaxed);
    RpcMessage resp = RpcMessage::make_error(
        ctx, Error{Errc::shed, draining ? "draining" : "admission queue full"});
    send_and_record(*conn, resp, fr->t_first_byte, fr->active_ns, 0, method, SpanStatus::error);
  }
}

void RpcServer::send_and_record(ConnState& conn, const RpcMessage& resp, uint64_t t_first,
                                uint64_t recv_ns, uint64_t app_ns, const std::string& operation,
                                SpanStatus status) {
  uint64_t send_ns = 0;
  auto frame = encode_frame(resp, opts_.max_frame);
  if (frame) {
    std::lock_guard<std::mutex> lock(conn.write_mu);
    auto st = conn.conn.send_all(*frame, mono_now_ns() + kSendBudgetNs, &send_ns);
    if (!st) status = SpanStatus::error;
  } else {
    status = SpanStatus::error;
  }
  uint64_t t_end = mono_now_ns();
  if (opts_.recorder != nullptr && !untraced_method(operation)) {
    Span s;
    s.trace_id = resp.context.trace_id;
    s.span_id = resp.context.span_id;
    s.parent_span_id = resp.context.parent_span_id;
    s.service = opts_.service;
    s.operation = operation;
    s.kind = SpanKind::server;
    s.t_start = t_first;
    s.t_end = t_end;
    s.net_ns = recv_ns + send_ns;
    s.app_ns = app_ns;
    s.status = status;
    uint64_t d = s.duration_ns();
    if (s.net_ns + s.app_ns > d) {
      // Clock granularity edge; clamp to keep the span invariant.
      if (s.app_ns > d) s.app_ns = d;
      s.net_ns = d - s.app_ns;
    }
    opts_.recorder->record(std::move(s));
  }
}

void RpcServer::worker_main(int index) {
  if (opts_.background) set_background_thread_priority();
  std::shared_ptr<void> state;
  if (opts_.worker_state_factory) state = opts_.worker_state_factory(index);
  for (;;) {
    Pending p;
    size_t depth = 0;
    {
      std::unique_lock<std::mutex> lock(mu_);
      queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) {
        if (stopping_) return;
        continue;
      }
      p = std::move(queue_.front());
      queue_.pop_front();
      depth = queue_.size();
    }
    uint64_t t_exec0 = mono_now_ns();
    HandlerCtx hctx;
    hctx.context = p.msg.context;
    hctx.worker_state = state.get();
    hctx.worker_index = index;
    hctx.queue_depth = depth;

    RpcMessage resp;
    SpanStatus status = SpanStatus::ok;
    auto it = handlers_.find(p.msg.method);
    if (it == handlers_.end()) {
      resp = RpcMessage::make_error(p.msg.context,
                                    Error{Errc::protocol_error, "unknown method " + p.msg.method});
      status = SpanStatus::error;
      c_errors_.fetch_add(1, std::memory_order_relaxed);
    } else {
      auto result = it->second(hctx, p.msg);
      if (result.ok()) {
        resp.kind = MsgKind::response;
        resp.context = p.msg.context;
        resp.fields = std::move(*result);
        status = hctx.child_dropped ? SpanStatus::dropped_child : SpanStatus::ok;
        c_ok_.fetch_add(1, std::memory_order_relaxed);
      } else {
        resp = RpcMessage::make_error(p.msg.context, result.error());
        status = SpanStatus::error;
        c_errors_.fetch_add(1, std::memory_order_relaxed);
      }
    }
    uint64_t app_ns = mono_now_ns() - t_exec0;
    send_and_record(*p.conn, resp, p.t_first, p.recv_ns, app_ns, p.msg.method, status);
  }
}

void RpcServer::stop() {
  {
    std::unique_lock<std::mutex> lock(mu_);
    if (!started_) return;
    if (stopping_) {
      stopped_cv_.wait(lock, [this] { return stopped_; });
      return;
    }
    stopping_ = true;
  }
  listener_.shutdown();
  // Nudge readers off their sockets so no new work arrives; queued work is
  // still drained by the workers.
  {
    std::lock_guard<std::mutex> lock(conns_mu_);
    for (auto& weak : conns_) {
      if (auto c = weak.lock()) {
        if (c->conn.valid()) ::shutdown(c->conn.fd(), SHUT_RD);
      }
    }
  }
  queue_cv_.notify_all();
  if (acceptor_.joinable()) acceptor_.join();
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  workers_.clear();
  // Readers exit on their next poll slice at the latest.
  for (int i = 0; i < 100 && readers_.load(std::memory_order_relaxed) > 0; i++) {
    sleep_ns(10000000ull);
  }
  {
    std::lock_guard<std::mutex> lock(conns_mu_);
    conns_.clear();
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    stopped_ = true;
  }
  stopped_cv_.notify_all();
}

void RpcServer::request_stop_async() {
  std::lock_guard<std::mutex> lock(conns_mu_);
  if (stop_thread_.joinable()) return;
  stop_thread_ = std::thread([this] {
    sleep_ns(50000000ull);  // let the in-flight response go out first
    stop();
  });
}

bool RpcServer::is_stopped() const {
  std::lock_guard<std::mutex> lock(mu_);
  return stopped_;
}

ServerCounters RpcServer::counters() const {
  ServerCounters c;
  c.requests = c_requests_.load(std::memory_order_relaxed);
  c.ok = c_ok_.load(std::memory_order_relaxed);
  c.errors = c_errors_.load(std::memory_order_relaxed);
  c.shed = c_shed_.load(std::memory_order_relaxed);
  c.decode_failures = c_decode_.load(std::memory_order_relaxed);
  c.connections = c_conns_.load(std::memory_order_relaxed);
  return c;
}

}  // namespace moviebench
