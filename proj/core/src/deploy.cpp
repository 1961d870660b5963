// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/deploy.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <string.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>

#include "moviebench/rpc_client.hpp"

extern char** environ;

namespace moviebench {

namespace {

Status probe_once(const std::string& addr) {
  IdSource ids;
  Channel ch(addr, "launcher", nullptr);
  RpcMessage req;
  req.kind = MsgKind::request;
  req.method = "Health";
  req.context = root_context(ids);
  CallOptions opts;
  opts.timeout_ns = 300000000ull;
  auto r = ch.call(req, opts);
  if (!r) return r.error();
  if (r->kind == MsgKind::error) return r->as_error();
  const std::string* v = r->field(0);
  if (v == nullptr || *v != "OK") return Error{Errc::protocol_error, "unexpected health body"};
  return ok_status();
}

Result<RpcMessage> admin_call(const std::string& addr, const std::string& method,
                              std::vector<Field> fields, uint64_t timeout_ns) {
  IdSource ids;
  Channel ch(addr, "launcher", nullptr);
  RpcMessage req;
  req.kind = MsgKind::request;
  req.method = method;
  req.context = root_context(ids);
  req.fields = std::move(fields);
  CallOptions opts;
  opts.timeout_ns = timeout_ns;
  auto r = ch.call(req, opts);
  if (!r) return r.error();
  return r;
}

std::string loopback(uint16_t port) { return "127.0.0.1:" + std::to_string(port); }

}  // namespace

Status wait_healthy(const std::string& addr, uint64_t deadline_ns) {
  for (;;) {
    auto st = probe_once(addr);
    if (st) return st;
    if (mono_now_ns() >= deadline_ns) {
      return Error{Errc::readiness_timeout, addr + ": " + st.error().to_string()};
    }
    sleep_ns(100000000ull);
  }
}

Deployment::~Deployment() {
  if (!shut_down_) shutdown();
}

Status Deployment::spawn_child(const std::string& name, const std::vector<std::string>& args) {
  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  std::string log_path = opts_.run_dir + "/logs/" + name + ".log";
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 1, log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  posix_spawn_file_actions_adddup2(&fa, 1, 2);

  pid_t pid = -1;
  int rc = posix_spawn(&pid, args[0].c_str(), &fa, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) {
    return Error{Errc::spawn_failure, name + ": " + strerror(rc)};
  }
  if (name == "collector") {
    collector_pid_ = pid;
  } else {
    children_.emplace_back(name, pid);
  }
  return ok_status();
}

void Deployment::kill_everything() {
  for (auto& [name, pid] : children_) {
    if (pid > 0) {
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
    }
  }
  children_.clear();
  if (collector_pid_ > 0) {
    kill(collector_pid_, SIGKILL);
    waitpid(collector_pid_, nullptr, 0);
    collector_pid_ = -1;
  }
  hosts_.clear();
  monolith_.reset();
  collector_.reset();
}

Result<std::unique_ptr<Deployment>> Deployment::launch(const ServiceTopology& topo,
                                                       const DeployOptions& opts) {
  auto violations = validate(topo);
  if (!violations.empty()) {
    return Error{violations[0].kind, violations[0].element + ": " + violations[0].message};
  }
  if (opts.dataset_dir.empty() || opts.run_dir.empty()) {
    return Error{Errc::invalid_argument, "dataset_dir and run_dir are required"};
  }
  if (opts.tracing && opts.collector_port == 0) {
    return Error{Errc::invalid_argument, "collector_port required when tracing"};
  }

  std::unique_ptr<Deployment> dep(new Deployment());
  dep->topo_ = topo;
  dep->opts_ = opts;

  std::error_code ec;
  std::filesystem::create_directories(opts.run_dir + "/logs", ec);
  if (ec) return Error{Errc::io_error, "create run dir: " + ec.message()};
  dep->span_log_ = opts.run_dir + "/spans.log";

  // Ports must be free before anything is spawned, so a collision leaves no
  // orphans behind.
  if (opts.tracing && loopback_port_in_use(opts.collector_port)) {
    return Error{Errc::port_in_use, "collector (port " + std::to_string(opts.collector_port) + ")"};
  }
  if (opts.monolith) {
    const ServiceSpec* entry = topo.find(topo.entry);
    if (entry == nullptr) return Error{Errc::unknown_service, topo.entry};
    if (loopback_port_in_use(entry->port)) {
      return Error{Errc::port_in_use,
                   "monolith (port " + std::to_string(entry->port) + ")"};
    }
  } else {
    for (const auto& s : topo.services) {
      if (loopback_port_in_use(s.port)) {
        return Error{Errc::port_in_use, s.name + " (port " + std::to_string(s.port) + ")"};
      }
    }
  }

  HostOptions hopts;
  hopts.dataset_dir = opts.dataset_dir;
  hopts.run_dir = opts.run_dir;
  hopts.collector = opts.tracing ? loopback(opts.collector_port) : "";
  hopts.tracing = opts.tracing;
  hopts.chunk_bytes = opts.chunk_bytes;
  hopts.cache_bytes = opts.cache_bytes;
  hopts.max_frame = opts.max_frame;

  if (opts.mode == DeployMode::thread) {
    if (opts.tracing) {
      CollectorServer::Options copts;
      copts.port = opts.collector_port;
      copts.log_path = dep->span_log_;
      auto collector = CollectorServer::start(copts);
      if (!collector) return collector.error();
      dep->collector_ = std::move(*collector);
    }
    if (opts.monolith) {
      auto host = MonolithHost::start(topo, hopts);
      if (!host) {
        dep->kill_everything();
        return host.error();
      }
      dep->monolith_ = std::move(*host);
    } else {
      for (const auto& s : topo.services) {
        auto host = ServiceHost::start(topo, s.name, hopts);
        if (!host) {
          dep->kill_everything();
          return Error{Errc::spawn_failure, s.name + ": " + host.error().to_string()};
        }
        dep->hosts_.push_back(std::move(*host));
      }
    }
  } else {
    std::string exe = opts.serve_exe.empty() ? "/proc/self/exe" : opts.serve_exe;
    dep->topology_file_ = opts.run_dir + "/topology.conf";
    {
      FILE* f = fopen(dep->topology_file_.c_str(), "wb");
      if (f == nullptr) return Error{Errc::io_error, "write topology file"};
      std::string text = serialize_topology(topo);
      fwrite(text.data(), 1, text.size(), f);
      fclose(f);
    }
    auto common = [&](std::vector<std::string>& args) {
      args.push_back("--topology");
      args.push_back(dep->topology_file_);
      args.push_back("--dataset");
      args.push_back(opts.dataset_dir);
      args.push_back("--run-dir");
      args.push_back(opts.run_dir);
      args.push_back("--collector");
      args.push_back(opts.tracing ? loopback(opts.collector_port) : "");
      args.push_back("--tracing");
      args.push_back(opts.tracing ? "on" : "off");
      args.push_back("--chunk-bytes");
      args.push_back(std::to_string(opts.chunk_bytes));
      args.push_back("--cache-bytes");
      args.push_back(std::to_string(opts.cache_bytes));
    };
    if (opts.tracing) {
      std::vector<std::string> args{exe, "collector", "--port",
                                    std::to_string(opts.collector_port), "--log", dep->span_log_};
      auto st = dep->spawn_child("collector", args);
      if (!st) return st.error();
      auto healthy =
          wait_healthy(loopback(opts.collector_port), mono_now_ns() + opts.ready_timeout_ns);
      if (!healthy) {
        dep->kill_everything();
        return healthy.error();
      }
    }
    if (opts.monolith) {
      std::vector<std::string> args{exe, "monolith"};
      common(args);
      auto st = dep->spawn_child("monolith", args);
      if (!st) {
        dep->kill_everything();
        return st.error();
      }
    } else {
      for (const auto& s : topo.services) {
        std::vector<std::string> args{exe, "serve", "--service", s.name};
        common(args);
        auto st = dep->spawn_child(s.name, args);
        if (!st) {
          dep->kill_everything();
          return st.error();
        }
      }
    }
  }

  auto ready = dep->wait_ready();
  if (!ready) {
    dep->kill_everything();
    return ready.error();
  }
  return dep;
}

Status Deployment::wait_ready() {
  uint64_t deadline = mono_now_ns() + opts_.ready_timeout_ns;
  if (opts_.monolith) {
    const ServiceSpec* entry = topo_.find(topo_.entry);
    auto st = wait_healthy(loopback(entry->port), deadline);
    if (!st) return Error{Errc::readiness_timeout, "monolith: " + st.error().to_string()};
    return ok_status();
  }
  for (const auto& s : topo_.services) {
    auto st = wait_healthy(loopback(s.port), deadline);
    if (!st) return Error{Errc::readiness_timeout, s.name + ": " + st.error().to_string()};
  }
  return ok_status();
}

std::vector<std::pair<std::string, uint16_t>> Deployment::stats_endpoints() const {
  std::vector<std::pair<std::string, uint16_t>> out;
  if (opts_.monolith) {
    const ServiceSpec* entry = topo_.find(topo_.entry);
    out.emplace_back("monolith", entry->port);
    return out;
  }
  for (const auto& s : topo_.services) out.emplace_back(s.name, s.port);
  return out;
}

ShutdownSummary Deployment::shutdown() {
  if (shut_down_) return summary_;
  shut_down_ = true;
  ShutdownSummary sum;

  for (const auto& [name, port] : stats_endpoints()) {
    ShutdownSummary::PerService per;
    per.name = name;
    auto resp = admin_call(loopback(port), "Quit", {}, opts_.graceful_ns);
    if (resp.ok() && resp->kind == MsgKind::response) {
      const std::string* text = resp->field(0);
      if (text != nullptr) {
        auto stats = stats_from_text(*text);
        if (stats.ok()) {
          per.stats = *stats;
          per.stats_ok = true;
        }
      }
    }
    sum.services.push_back(std::move(per));
  }

  // Reap children (process mode) or join hosts (thread mode).
  if (opts_.mode == DeployMode::process) {
    uint64_t deadline = mono_now_ns() + opts_.graceful_ns;
    for (auto& [name, pid] : children_) {
      bool reaped = false;
      while (mono_now_ns() < deadline) {
        int status = 0;
        pid_t rc = waitpid(pid, &status, WNOHANG);
        if (rc == pid) {
          reaped = true;
          break;
        }
        sleep_ns(50000000ull);
      }
      if (!reaped) {
        kill(pid, SIGKILL);
        waitpid(pid, nullptr, 0);
        for (auto& per : sum.services) {
          if (per.name == name) per.forced_kill = true;
        }
        sum.clean = false;
      }
      pid = -1;
    }
    children_.clear();
  } else {
    for (auto& host : hosts_) host->stop();
    if (monolith_) monolith_->stop();
  }

  // Collector last, so final span flushes have somewhere to land.
  if (opts_.tracing) {
    (void)admin_call(loopback(opts_.collector_port), "Quit", {}, opts_.graceful_ns);
    if (opts_.mode == DeployMode::process) {
      if (collector_pid_ > 0) {
        uint64_t deadline = mono_now_ns() + opts_.graceful_ns;
        bool reaped = false;
        while (mono_now_ns() < deadline) {
          if (waitpid(collector_pid_, nullptr, WNOHANG) == collector_pid_) {
            reaped = true;
            break;
          }
          sleep_ns(50000000ull);
        }
        if (!reaped) {
          kill(collector_pid_, SIGKILL);
          waitpid(collector_pid_, nullptr, 0);
          sum.clean = false;
        }
        collector_pid_ = -1;
      }
    } else if (collector_) {
      collector_->stop();
    }
  }
  hosts_.clear();
  monolith_.reset();
  collector_.reset();

  for (const auto& per : sum.services) {
    if (!per.stats_ok) sum.clean = false;
  }
  summary_ = sum;
  return summary_;
}

Status Deployment::apply_slowdown(const std::map<std::string, double>& profile) {
  for (const auto& [name, factor] : profile) {
    if (topo_.find(name) == nullptr) return Error{Errc::unknown_service, name};
    if (factor <= 0) return Error{Errc::invalid_argument, name + ": slowdown must be > 0"};
  }
  for (const auto& [name, factor] : profile) {
    uint16_t port;
    if (opts_.monolith) {
      port = topo_.find(topo_.entry)->port;
    } else {
      port = topo_.find(name)->port;
    }
    std::vector<Field> fields;
    fields.push_back({0, name});
    fields.push_back({1, std::to_string(factor)});
    auto r = admin_call(loopback(port), "Slowdown", std::move(fields), 2000000000ull);
    if (!r.ok()) return r.error();
    if (r->kind == MsgKind::error) return r->as_error();
  }
  return ok_status();
}

Result<std::map<std::string, ServiceRuntimeStats>> Deployment::service_stats() {
  std::map<std::string, ServiceRuntimeStats> out;
  for (const auto& [name, port] : stats_endpoints()) {
    auto resp = admin_call(loopback(port), "Stats", {}, 2000000000ull);
    if (!resp.ok()) return resp.error();
    if (resp->kind == MsgKind::error) return resp->as_error();
    const std::string* text = resp->field(0);
    if (text == nullptr) return Error{Errc::protocol_error, "Stats without body"};
    auto stats = stats_from_text(*text);
    if (!stats.ok()) return stats.error();
    out[name] = *stats;
  }
  return out;
}

Result<CollectorServer::Totals> Deployment::collector_totals() {
  if (!opts_.tracing) return Error{Errc::invalid_argument, "tracing disabled"};
  auto resp = admin_call(loopback(opts_.collector_port), "Stats", {}, 2000000000ull);
  if (!resp.ok()) return resp.error();
  if (resp->kind == MsgKind::error) return resp->as_error();
  const std::string* text = resp->field(0);
  if (text == nullptr) return Error{Errc::protocol_error, "Stats without body"};
  return CollectorServer::parse_stats_text(*text);
}

std::string Deployment::entry_addr() const {
  const ServiceSpec* entry = topo_.find(topo_.entry);
  return loopback(entry != nullptr ? entry->port : 0);
}

std::string Deployment::collector_addr() const { return loopback(opts_.collector_port); }

}  // namespace moviebench
