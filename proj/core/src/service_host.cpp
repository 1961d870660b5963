// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/service_host.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>

#include "moviebench/dataset.hpp"
#include "moviebench/digest.hpp"
#include "moviebench/rpc_client.hpp"

namespace moviebench {

namespace {

class MicroPlane : public DataPlane {
 public:
  MicroPlane(const ServiceTopology* topo, std::string self, Recorder* recorder, IdSource* ids,
             uint64_t timeout_ns, size_t max_frame)
      : topo_(topo),
        self_(std::move(self)),
        recorder_(recorder),
        ids_(ids),
        opts_{timeout_ns, max_frame} {}

  Result<RpcMessage> invoke(RequestScope& scope, const Invocation& inv) override {
    Channel* ch = channel_for(inv.target);
    if (ch == nullptr) return Error{Errc::unknown_service, "no service '" + inv.target + "'"};
    RpcMessage req;
    req.kind = MsgKind::request;
    req.method = inv.method;
    req.fields = inv.fields;
    req.context = child_context(scope.ctx, *ids_);
    auto r = ch->call(req, opts_);
    scope.child_dropped = scope.child_dropped || ch->last_span_dropped();
    return r;
  }

  std::vector<Result<RpcMessage>> invoke_parallel(RequestScope& scope,
                                                  const std::vector<Invocation>& invs) override {
    std::vector<Channel*> chans;
    std::vector<RpcMessage> reqs;
    std::vector<Result<RpcMessage>> out;
    out.reserve(invs.size());
    for (const auto& inv : invs) {
      Channel* ch = channel_for(inv.target);
      if (ch == nullptr) {
        // Unknown target fails fast; the rest still go out in parallel.
        std::vector<Result<RpcMessage>> all;
        for (const auto& i2 : invs) {
          if (channel_for(i2.target) == nullptr) {
            all.emplace_back(Error{Errc::unknown_service, "no service '" + i2.target + "'"});
          } else {
            all.emplace_back(invoke(scope, i2));
          }
        }
        return all;
      }
      RpcMessage req;
      req.kind = MsgKind::request;
      req.method = inv.method;
      req.fields = inv.fields;
      req.context = child_context(scope.ctx, *ids_);
      chans.push_back(ch);
      reqs.push_back(std::move(req));
    }
    auto results = Channel::call_parallel(chans, reqs, opts_);
    for (Channel* ch : chans) {
      scope.child_dropped = scope.child_dropped || ch->last_span_dropped();
    }
    return results;
  }

 private:
  Channel* channel_for(const std::string& target) {
    auto it = channels_.find(target);
    if (it != channels_.end()) return &it->second;
    const ServiceSpec* spec = topo_->find(target);
    if (spec == nullptr) return nullptr;
    auto [pos, inserted] = channels_.emplace(
        target, Channel("127.0.0.1:" + std::to_string(spec->port), self_, recorder_));
    return &pos->second;
  }

  const ServiceTopology* topo_;
  std::string self_;
  Recorder* recorder_;
  IdSource* ids_;
  CallOptions opts_;
  std::map<std::string, Channel> channels_;
};

class MonolithPlane : public DataPlane {
 public:
  explicit MonolithPlane(const std::map<std::string, ServiceState*>* registry)
      : registry_(registry) {}

  Result<RpcMessage> invoke(RequestScope& scope, const Invocation& inv) override {
    auto it = registry_->find(inv.target);
    if (it == registry_->end()) {
      return Error{Errc::unknown_service, "no service '" + inv.target + "'"};
    }
    RpcMessage req;
    req.kind = MsgKind::request;
    req.method = inv.method;
    req.fields = inv.fields;
    req.context = scope.ctx;  // one span per request; no child contexts
    auto result = app_dispatch(*it->second, *this, scope, req);
    RpcMessage resp;
    if (result.ok()) {
      resp.kind = MsgKind::response;
      resp.context = req.context;
      resp.fields = std::move(*result);
    } else {
      resp = RpcMessage::make_error(req.context, result.error());
    }
    return resp;
  }

  std::vector<Result<RpcMessage>> invoke_parallel(RequestScope& scope,
                                                  const std::vector<Invocation>& invs) override {
    // Direct function composition runs fan-out sequentially.
    std::vector<Result<RpcMessage>> out;
    out.reserve(invs.size());
    for (const auto& inv : invs) out.push_back(invoke(scope, inv));
    return out;
  }

 private:
  const std::map<std::string, ServiceState*>* registry_;
};

void init_state(ServiceState& state, const ServiceSpec& spec, const ServiceTopology& topo,
                const HostOptions& opts) {
  state.spec = spec;
  state.routing = build_routing(topo);
  state.dataset_dir = opts.dataset_dir;
  state.chunk_bytes = opts.chunk_bytes;
  state.slowdown.store(spec.slowdown, std::memory_order_relaxed);
  if (spec.name == "compose-review") {
    state.idgen = std::make_unique<UniqueIdGen>(fnv16(spec.name));
  }
}

Result<std::vector<Field>> slowdown_fields(ServiceState& state, const RpcMessage& req) {
  const std::string* name = req.field(0);
  const std::string* factor = req.field(1);
  if (factor == nullptr) return Error{Errc::protocol_error, "Slowdown without factor"};
  if (name != nullptr && !name->empty() && *name != state.spec.name) {
    return Error{Errc::unknown_service, *name};
  }
  double f = strtod(factor->c_str(), nullptr);
  if (f <= 0) return Error{Errc::invalid_argument, "slowdown must be > 0"};
  state.slowdown.store(f, std::memory_order_relaxed);
  std::vector<Field> out;
  out.push_back({0, "OK"});
  return out;
}

}  // namespace

std::string stats_to_text(const ServiceRuntimeStats& s) {
  char buf[256];
  snprintf(buf, sizeof(buf),
           "recorded=%" PRIu64 " dropped=%" PRIu64 " shipped=%" PRIu64 " requests=%" PRIu64
           " ok=%" PRIu64 " errors=%" PRIu64 " shed=%" PRIu64,
           s.recorded, s.dropped, s.shipped, s.requests, s.ok, s.errors, s.shed);
  return buf;
}

Result<ServiceRuntimeStats> stats_from_text(std::string_view text) {
  ServiceRuntimeStats s;
  if (sscanf(std::string(text).c_str(),
             "recorded=%" SCNu64 " dropped=%" SCNu64 " shipped=%" SCNu64 " requests=%" SCNu64
             " ok=%" SCNu64 " errors=%" SCNu64 " shed=%" SCNu64,
             &s.recorded, &s.dropped, &s.shipped, &s.requests, &s.ok, &s.errors, &s.shed) != 7) {
    return Error{Errc::malformed_line, "bad stats text"};
  }
  return s;
}

Result<LogStore> open_run_store(const std::string& dataset_dir, const std::string& run_dir,
                                const std::string& owner) {
  std::error_code ec;
  std::filesystem::create_directories(run_dir, ec);
  if (ec) return Error{Errc::io_error, "create run dir: " + ec.message()};
  std::string dst = run_dir + "/" + owner + ".store.log";
  if (!std::filesystem::exists(dst)) {
    std::string src = dataset_store_log(dataset_dir);
    std::filesystem::copy_file(src, dst, std::filesystem::copy_options::overwrite_existing, ec);
    if (ec) return Error{Errc::io_error, "seed store copy: " + ec.message()};
  }
  return LogStore::open(dst);
}

Result<std::unique_ptr<ServiceHost>> ServiceHost::start(const ServiceTopology& topo,
                                                        const std::string& service,
                                                        const HostOptions& opts) {
  const ServiceSpec* spec = topo.find(service);
  if (spec == nullptr) return Error{Errc::unknown_service, service};

  std::unique_ptr<ServiceHost> host(new ServiceHost());
  host->topo_ = topo;
  host->opts_ = opts;
  init_state(host->state_, *spec, host->topo_, opts);

  if (spec->role == ServiceRole::cache) {
    host->cache_ = std::make_unique<LruByteCache>(opts.cache_bytes);
    host->state_.cache = host->cache_.get();
  }
  if (spec->role == ServiceRole::store) {
    auto store = open_run_store(opts.dataset_dir, opts.run_dir, spec->name);
    if (!store) return store.error();
    host->store_ = std::make_unique<LogStore>(std::move(*store));
    host->state_.store = host->store_.get();
  }
  if (opts.tracing && !opts.collector.empty()) {
    Recorder::Options ropts;
    ropts.service = spec->name;
    ropts.collector = opts.collector;
    ropts.buffer_capacity = opts.span_buffer;
    host->recorder_ = std::make_unique<Recorder>(ropts);
  }
  host->ids_ = std::make_unique<IdSource>();

  RpcServer::Options sopts;
  sopts.service = spec->name;
  sopts.port = spec->port;
  sopts.workers = spec->workers;
  sopts.queue_capacity = static_cast<size_t>(spec->queue_capacity);
  sopts.max_frame = opts.max_frame;
  sopts.recorder = host->recorder_.get();
  ServiceHost* self = host.get();
  sopts.worker_state_factory = [self](int) -> std::shared_ptr<void> {
    return std::make_shared<MicroPlane>(&self->topo_, self->state_.spec.name,
                                        self->recorder_.get(), self->ids_.get(),
                                        self->opts_.call_timeout_ns, self->opts_.max_frame);
  };
  host->server_ = std::make_unique<RpcServer>(sopts);

  for (const auto& method : hosted_methods(*spec)) {
    host->server_->register_method(
        method, [self](HandlerCtx& hctx, const RpcMessage& req) -> Result<std::vector<Field>> {
          RequestScope scope;
          scope.ctx = hctx.context;
          scope.queue_depth = hctx.queue_depth;
          auto* plane = static_cast<MicroPlane*>(hctx.worker_state);
          auto r = app_dispatch(self->state_, *plane, scope, req);
          hctx.child_dropped = scope.child_dropped;
          return r;
        });
  }
  host->server_->register_method(
      methods::kSlowdown, [self](HandlerCtx&, const RpcMessage& req) {
        return slowdown_fields(self->state_, req);
      });
  host->server_->register_method(
      methods::kStats, [self](HandlerCtx&, const RpcMessage&) -> Result<std::vector<Field>> {
        std::vector<Field> out;
        out.push_back({0, stats_to_text(self->stats())});
        return out;
      });
  host->server_->register_method(
      methods::kQuit, [self](HandlerCtx&, const RpcMessage&) -> Result<std::vector<Field>> {
        if (self->recorder_) self->recorder_->final_flush(mono_now_ns() + 4000000000ull);
        std::vector<Field> out;
        out.push_back({0, stats_to_text(self->stats())});
        self->server_->request_stop_async();
        return out;
      });

  auto st = host->server_->start();
  if (!st) return st.error();
  return host;
}

ServiceHost::~ServiceHost() { stop(); }

void ServiceHost::stop() {
  bool expected = false;
  if (!stopped_.compare_exchange_strong(expected, true)) {
    if (server_) server_->stop();
    return;
  }
  if (server_) server_->stop();
  if (recorder_) {
    recorder_->final_flush(mono_now_ns() + 2000000000ull);
    recorder_->stop();
  }
}

ServiceRuntimeStats ServiceHost::stats() const {
  ServiceRuntimeStats s;
  if (recorder_) {
    auto c = recorder_->counters();
    s.recorded = c.recorded;
    s.dropped = c.dropped;
    s.shipped = c.shipped;
  }
  auto c = server_->counters();
  s.requests = c.requests;
  s.ok = c.ok;
  s.errors = c.errors;
  s.shed = c.shed;
  return s;
}

Result<std::unique_ptr<MonolithHost>> MonolithHost::start(const ServiceTopology& topo,
                                                          const HostOptions& opts) {
  const ServiceSpec* entry = topo.find(topo.entry);
  if (entry == nullptr) return Error{Errc::unknown_service, "entry '" + topo.entry + "'"};

  std::unique_ptr<MonolithHost> host(new MonolithHost());
  host->topo_ = topo;
  host->opts_ = opts;

  for (const auto& spec : host->topo_.services) {
    auto state = std::make_unique<ServiceState>();
    init_state(*state, spec, host->topo_, opts);
    if (spec.role == ServiceRole::cache && host->cache_ == nullptr) {
      host->cache_ = std::make_unique<LruByteCache>(opts.cache_bytes);
      state->cache = host->cache_.get();
    }
    if (spec.role == ServiceRole::store && host->store_ == nullptr) {
      auto store = open_run_store(opts.dataset_dir, opts.run_dir, "monolith-" + spec.name);
      if (!store) return store.error();
      host->store_ = std::make_unique<LogStore>(std::move(*store));
      state->store = host->store_.get();
    }
    host->by_name_[spec.name] = state.get();
    host->states_.push_back(std::move(state));
  }

  if (opts.tracing && !opts.collector.empty()) {
    Recorder::Options ropts;
    ropts.service = "monolith";
    ropts.collector = opts.collector;
    ropts.buffer_capacity = opts.span_buffer;
    host->recorder_ = std::make_unique<Recorder>(ropts);
  }

  RpcServer::Options sopts;
  sopts.service = "monolith";
  sopts.port = entry->port;
  sopts.workers = entry->workers;
  sopts.queue_capacity = static_cast<size_t>(entry->queue_capacity);
  sopts.max_frame = opts.max_frame;
  sopts.recorder = host->recorder_.get();
  MonolithHost* self = host.get();
  sopts.worker_state_factory = [self](int) -> std::shared_ptr<void> {
    return std::make_shared<MonolithPlane>(&self->by_name_);
  };
  host->server_ = std::make_unique<RpcServer>(sopts);

  ServiceState* entry_state = host->by_name_[topo.entry];
  for (const auto& method : hosted_methods(*entry)) {
    host->server_->register_method(
        method,
        [self, entry_state](HandlerCtx& hctx, const RpcMessage& req) -> Result<std::vector<Field>> {
          RequestScope scope;
          scope.ctx = hctx.context;
          scope.queue_depth = hctx.queue_depth;
          auto* plane = static_cast<MonolithPlane*>(hctx.worker_state);
          auto r = app_dispatch(*entry_state, *plane, scope, req);
          hctx.child_dropped = scope.child_dropped;
          return r;
        });
  }
  host->server_->register_method(
      methods::kSlowdown, [self](HandlerCtx&, const RpcMessage& req) -> Result<std::vector<Field>> {
        const std::string* name = req.field(0);
        const std::string* factor = req.field(1);
        if (factor == nullptr) return Error{Errc::protocol_error, "Slowdown without factor"};
        double f = strtod(factor->c_str(), nullptr);
        if (f <= 0) return Error{Errc::invalid_argument, "slowdown must be > 0"};
        auto st = self->set_slowdown(name == nullptr ? "" : *name, f);
        if (!st) return st.error();
        std::vector<Field> out;
        out.push_back({0, "OK"});
        return out;
      });
  host->server_->register_method(
      methods::kStats, [self](HandlerCtx&, const RpcMessage&) -> Result<std::vector<Field>> {
        std::vector<Field> out;
        out.push_back({0, stats_to_text(self->stats())});
        return out;
      });
  host->server_->register_method(
      methods::kQuit, [self](HandlerCtx&, const RpcMessage&) -> Result<std::vector<Field>> {
        if (self->recorder_) self->recorder_->final_flush(mono_now_ns() + 4000000000ull);
        std::vector<Field> out;
        out.push_back({0, stats_to_text(self->stats())});
        self->server_->request_stop_async();
        return out;
      });

  auto st = host->server_->start();
  if (!st) return st.error();
  return host;
}

MonolithHost::~MonolithHost() { stop(); }

void MonolithHost::stop() {
  bool expected = false;
  if (!stopped_.compare_exchange_strong(expected, true)) {
    if (server_) server_->stop();
    return;
  }
  if (server_) server_->stop();
  if (recorder_) {
    recorder_->final_flush(mono_now_ns() + 2000000000ull);
    recorder_->stop();
  }
}

Status MonolithHost::set_slowdown(const std::string& service, double factor) {
  if (service.empty()) {
    for (auto& s : states_) s->slowdown.store(factor, std::memory_order_relaxed);
    return ok_status();
  }
  auto it = by_name_.find(service);
  if (it == by_name_.end()) return Error{Errc::unknown_service, service};
  it->second->slowdown.store(factor, std::memory_order_relaxed);
  return ok_status();
}

ServiceRuntimeStats MonolithHost::stats() const {
  ServiceRuntimeStats s;
  if (recorder_) {
    auto c = recorder_->counters();
    s.recorded = c.recorded;
    s.dropped = c.dropped;
    s.shipped = c.shipped;
  }
  auto c = server_->counters();
  s.requests = c.requests;
  s.ok = c.ok;
  s.errors = c.errors;
  s.shed = c.shed;
  return s;
}

}  // namespace moviebench
