// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/collector.hpp"

#include <cinttypes>

#include "moviebench/digest.hpp"

namespace moviebench {

Result<std::unique_ptr<CollectorServer>> CollectorServer::start(Options opts) {
  std::unique_ptr<CollectorServer> c(new CollectorServer());
  c->opts_ = opts;
  c->log_ = fopen(opts.log_path.c_str(), "ab");
  if (c->log_ == nullptr) {
    return Error{Errc::io_error, "cannot open span log '" + opts.log_path + "'"};
  }

  RpcServer::Options sopts;
  sopts.service = "collector";
  sopts.port = opts.port;
  sopts.workers = opts.workers;
  sopts.queue_capacity = opts.queue_capacity;
  sopts.max_frame = opts.max_frame;
  sopts.recorder = nullptr;  // the collector does not trace itself
  sopts.background = true;   // span collection yields to the request path
  c->server_ = std::make_unique<RpcServer>(sopts);

  CollectorServer* self = c.get();
  c->server_->register_method(
      "SpanBatch", [self](HandlerCtx&, const RpcMessage& req) { return self->handle_batch(req); });
  c->server_->register_method(
      "Stats", [self](HandlerCtx&, const RpcMessage&) -> Result<std::vector<Field>> {
        std::vector<Field> out;
        out.push_back({0, self->stats_text()});
        return out;
      });
  c->server_->register_method(
      "Quit", [self](HandlerCtx&, const RpcMessage&) -> Result<std::vector<Field>> {
        {
          std::lock_guard<std::mutex> lock(self->mu_);
          if (self->log_ != nullptr) fflush(self->log_);
        }
        self->server_->request_stop_async();
        std::vector<Field> out;
        out.push_back({0, self->stats_text()});
        return out;
      });

  auto st = c->server_->start();
  if (!st) return st.error();
  return c;
}

CollectorServer::~CollectorServer() { stop(); }

void CollectorServer::stop() {
  if (server_) server_->stop();
  std::lock_guard<std::mutex> lock(mu_);
  if (log_ != nullptr) {
    fflush(log_);
    fclose(log_);
    log_ = nullptr;
  }
}

Result<std::vector<Field>> CollectorServer::handle_batch(const RpcMessage& req) {
  const std::string* lines = req.field(0);
  if (lines == nullptr) return Error{Errc::protocol_error, "SpanBatch without field 0"};

  std::lock_guard<std::mutex> lock(mu_);
  if (log_ == nullptr) return Error{Errc::io_error, "span log closed"};
  size_t pos = 0;
  while (pos < lines->size()) {
    size_t eol = lines->find('\n', pos);
    if (eol == std::string::npos) eol = lines->size();
    std::string_view line(lines->data() + pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    totals_.lines++;
    auto span = span_from_line(line);
    if (!span) {
      totals_.malformed++;
      continue;
    }
    Key key{span->trace_id, span->span_id, static_cast<uint8_t>(span->kind)};
    if (!seen_.insert(key).second) {
      totals_.duplicates++;
      continue;
    }
    fwrite(line.data(), 1, line.size(), log_);
    fputc('\n', log_);
    totals_.unique_spans++;
    totals_.per_service[span->service]++;
    if (++trace_index_[span->trace_id] == 1) totals_.traces++;
  }
  fflush(log_);
  std::vector<Field> out;
  out.push_back({0, std::to_string(totals_.unique_spans)});
  return out;
}

CollectorServer::Totals CollectorServer::totals() const {
  std::lock_guard<std::mutex> lock(mu_);
  return totals_;
}

std::string CollectorServer::stats_text() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::string s;
  char buf[160];
  snprintf(buf, sizeof(buf), "lines=%" PRIu64 " unique=%" PRIu64 " dup=%" PRIu64
           " malformed=%" PRIu64 " traces=%" PRIu64 "\n",
           totals_.lines, totals_.unique_spans, totals_.duplicates, totals_.malformed,
           totals_.traces);
  s += buf;
  for (const auto& [svc, count] : totals_.per_service) {
    s += "service " + svc + " " + std::to_string(count) + "\n";
  }
  return s;
}

Result<CollectorServer::Totals> CollectorServer::parse_stats_text(std::string_view text) {
  Totals t;
  size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty()) continue;
    if (line.rfind("service ", 0) == 0) {
      auto sp = line.rfind(' ');
      if (sp == std::string::npos || sp <= 8) return Error{Errc::malformed_line, line};
      t.per_service[line.substr(8, sp - 8)] = strtoull(line.c_str() + sp + 1, nullptr, 10);
    } else {
      if (sscanf(line.c_str(),
                 "lines=%" SCNu64 " unique=%" SCNu64 " dup=%" SCNu64 " malformed=%" SCNu64
                 " traces=%" SCNu64,
                 &t.lines, &t.unique_spans, &t.duplicates, &t.malformed, &t.traces) != 5) {
        return Error{Errc::malformed_line, line};
      }
      have_header = true;
    }
  }
  if (!have_header) return Error{Errc::malformed_line, "missing totals header"};
  return t;
}

}  // namespace moviebench
