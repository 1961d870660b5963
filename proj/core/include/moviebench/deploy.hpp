// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "moviebench/collector.hpp"
#include "moviebench/service_host.hpp"
#include "moviebench/topology.hpp"

namespace moviebench {

// process: one OS child per service (plus one for the collector).
// thread:  a supervised in-process task group, same ports and RPC surface.
enum class DeployMode { process, thread };

struct DeployOptions {
  DeployMode mode = DeployMode::thread;
  bool monolith = false;  // single process hosting all handlers behind the entry port
  std::string dataset_dir;
  std::string run_dir;
  uint16_t collector_port = 0;  // required when tracing
  bool tracing = true;
  uint64_t chunk_bytes = 1ull << 20;
  uint64_t cache_bytes = 16ull << 20;
  std::string serve_exe;  // process mode; defaults to /proc/self/exe
  uint64_t ready_timeout_ns = 10000000000ull;  // 10 s
  uint64_t graceful_ns = 5000000000ull;        // 5 s
  size_t max_frame = kDefaultMaxFrame;
};

struct ShutdownSummary {
  struct PerService {
    std::string name;
    ServiceRuntimeStats stats;
    bool forced_kill = false;
    bool stats_ok = false;
  };
  std::vector<PerService> services;
  bool clean = true;  // no forced kills, all stats collected
};

class Deployment {
 public:
  Deployment(Deployment&&) = default;
  Deployment& operator=(Deployment&&) = default;
  ~Deployment();

  static Result<std::unique_ptr<Deployment>> launch(const ServiceTopology& topo,
                                                    const DeployOptions& opts);

  // Graceful, idempotent: drains services, flushes span buffers, reaps
  // processes; the collector goes down last.
  ShutdownSummary shutdown();

  // Live-updates slowdown factors; validates every name first so a bad
  // profile applies nothing.
  Status apply_slowdown(const std::map<std::string, double>& profile);

  Result<std::map<std::string, ServiceRuntimeStats>> service_stats();
  Result<CollectorServer::Totals> collector_totals();

  std::string entry_addr() const;
  std::string collector_addr() const;
  const std::string& span_log_path() const { return span_log_; }
  const ServiceTopology& topology() const { return topo_; }
  bool monolith() const { return opts_.monolith; }

 private:
  Deployment() = default;

  Status spawn_child(const std::string& name, const std::vector<std::string>& args);
  Status wait_ready();
  void kill_everything();
  std::vector<std::pair<std::string, uint16_t>> stats_endpoints() const;

  ServiceTopology topo_;
  DeployOptions opts_;
  std::string span_log_;
  std::string topology_file_;
  bool shut_down_ = false;
  ShutdownSummary summary_;

  // thread mode
  std::unique_ptr<CollectorServer> collector_;
  std::vector<std::unique_ptr<ServiceHost>> hosts_;
  std::unique_ptr<MonolithHost> monolith_;

  // process mode
  std::vector<std::pair<std::string, pid_t>> children_;  // (service, pid)
  pid_t collector_pid_ = -1;
};

// Blocks until the service on addr answers a Health probe or the deadline
// passes.
Status wait_healthy(const std::string& addr, uint64_t deadline_ns);

}  // namespace moviebench
