// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "moviebench/app.hpp"
#include "moviebench/rpc_server.hpp"
#include "moviebench/tracer.hpp"

namespace moviebench {

struct HostOptions {
  std::string dataset_dir;
  std::string run_dir;     // per-deployment working directory (store copy, logs)
  std::string collector;   // host:port; empty or tracing=false disables spans
  bool tracing = true;
  uint64_t chunk_bytes = 1ull << 20;
  uint64_t cache_bytes = 16ull << 20;
  size_t span_buffer = 65536;
  uint64_t call_timeout_ns = 1500000000ull;  // internal hop timeout
  size_t max_frame = kDefaultMaxFrame;
};

struct ServiceRuntimeStats {
  uint64_t recorded = 0;
  uint64_t dropped = 0;
  uint64_t shipped = 0;
  uint64_t requests = 0;
  uint64_t ok = 0;
  uint64_t errors = 0;
  uint64_t shed = 0;
};

std::string stats_to_text(const ServiceRuntimeStats& s);
Result<ServiceRuntimeStats> stats_from_text(std::string_view text);

// One microservice: an RpcServer wired to the application dispatcher, with a
// per-worker RPC data plane, a span recorder, and the tier backing (cache or
// store copy) when the role calls for it.
class ServiceHost {
 public:
  static Result<std::unique_ptr<ServiceHost>> start(const ServiceTopology& topo,
                                                    const std::string& service,
                                                    const HostOptions& opts);
  ~ServiceHost();

  void stop();  // graceful: drain server, flush spans
  ServiceRuntimeStats stats() const;
  uint16_t port() const { return server_->port(); }
  const std::string& name() const { return state_.spec.name; }
  RpcServer* server() { return server_.get(); }
  Recorder* recorder() { return recorder_.get(); }
  ServiceState& state() { return state_; }

 private:
  ServiceHost() = default;

  ServiceTopology topo_;
  HostOptions opts_;
  ServiceState state_;
  std::unique_ptr<LruByteCache> cache_;
  std::unique_ptr<LogStore> store_;
  std::unique_ptr<Recorder> recorder_;
  std::unique_ptr<IdSource> ids_;
  std::unique_ptr<RpcServer> server_;
  std::atomic<bool> stopped_{false};
};

// The whole application in one process behind the entry port: the same
// handlers composed by direct function calls. Exactly one server span per
// request; no client spans inside.
class MonolithHost {
 public:
  static Result<std::unique_ptr<MonolithHost>> start(const ServiceTopology& topo,
                                                     const HostOptions& opts);
  ~MonolithHost();

  void stop();
  ServiceRuntimeStats stats() const;
  uint16_t port() const { return server_->port(); }
  RpcServer* server() { return server_.get(); }
  // Set one logical service's slowdown; UnknownService when absent.
  Status set_slowdown(const std::string& service, double factor);

 private:
  MonolithHost() = default;

  ServiceTopology topo_;
  HostOptions opts_;
  std::vector<std::unique_ptr<ServiceState>> states_;
  std::map<std::string, ServiceState*> by_name_;
  std::unique_ptr<LruByteCache> cache_;
  std::unique_ptr<LogStore> store_;
  std::unique_ptr<Recorder> recorder_;
  std::unique_ptr<RpcServer> server_;
  std::atomic<bool> stopped_{false};
};

// Copies the pristine dataset store log into the run dir (once) and opens it,
// so runs never mutate the generated dataset.
Result<LogStore> open_run_store(const std::string& dataset_dir, const std::string& run_dir,
                                const std::string& owner);

}  // namespace moviebench
