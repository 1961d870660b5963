// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "moviebench/net.hpp"
#include "moviebench/span.hpp"
#include "moviebench/wire.hpp"

namespace moviebench {

class Recorder;

struct HandlerCtx {
  TraceContext context;        // the request's trace context
  bool child_dropped = false;  // set when a downstream client span was dropped
  void* worker_state = nullptr;
  int worker_index = 0;
  size_t queue_depth = 0;  // admission-queue length when this request was picked up
};

struct ServerCounters {
  uint64_t requests = 0;
  uint64_t ok = 0;
  uint64_t errors = 0;
  uint64_t shed = 0;
  uint64_t decode_failures = 0;
  uint64_t connections = 0;
};

// TCP server with `workers` handler threads over a bounded admission queue.
// One reader thread per connection; a full queue is answered immediately with
// a Shed error (load shedding). Every handled request yields one server span.
class RpcServer {
 public:
  using Handler = std::function<Result<std::vector<Field>>(HandlerCtx&, const RpcMessage&)>;

  struct Options {
    std::string service;
    uint16_t port = 0;  // 0 = ephemeral
    int workers = 2;
    size_t queue_capacity = 64;
    size_t max_frame = kDefaultMaxFrame;
    Recorder* recorder = nullptr;  // null = tracing off
    bool background = false;  // run all server threads at background priority
    std::function<std::shared_ptr<void>(int worker_index)> worker_state_factory;
  };

  explicit RpcServer(Options opts);
  ~RpcServer();

  // Must be called before start(). "Health" is pre-registered.
  void register_method(const std::string& name, Handler handler);

  Status start();
  // Graceful stop: stop accepting, drain the admission queue, join threads.
  void stop();
  // Ask for stop from inside a handler; takes effect after the response is
  // sent.
  void request_stop_async();

  uint16_t port() const { return listener_.port(); }
  const std::string& service() const { return opts_.service; }
  ServerCounters counters() const;
  bool is_stopped() const;

 private:
  struct ConnState {
    TcpConn conn;
    std::mutex write_mu;
  };
  struct Pending {
    std::shared_ptr<ConnState> conn;
    RpcMessage msg;
    uint64_t t_first = 0;
    uint64_t recv_ns = 0;
  };

  void accept_main();
  void reader_main(std::shared_ptr<ConnState> conn);
  void worker_main(int index);
  void send_and_record(ConnState& conn, const RpcMessage& resp, uint64_t t_first,
                       uint64_t recv_ns, uint64_t app_ns, const std::string& operation,
                       SpanStatus status);

  Options opts_;
  TcpListener listener_;
  std::unordered_map<std::string, Handler> handlers_;

  mutable std::mutex mu_;
  std::condition_variable queue_cv_;
  std::condition_variable stopped_cv_;
  std::deque<Pending> queue_;
  bool stopping_ = false;
  bool started_ = false;
  bool stopped_ = false;

  std::thread acceptor_;
  std::vector<std::thread> workers_;
  std::thread stop_thread_;
  std::mutex conns_mu_;
  std::vector<std::weak_ptr<ConnState>> conns_;
  std::atomic<int> readers_{0};

  std::atomic<uint64_t> c_requests_{0}, c_ok_{0}, c_errors_{0}, c_shed_{0}, c_decode_{0},
      c_conns_{0};
};

}  // namespace moviebench
