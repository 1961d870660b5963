// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/rpc_client.hpp"

#include <errno.h>
#include <poll.h>

#include "moviebench/tracer.hpp"

namespace moviebench {

Channel::Channel(std::string endpoint, std::string caller_service, Recorder* recorder)
    : endpoint_(std::move(endpoint)),
      caller_service_(std::move(caller_service)),
      recorder_(recorder) {}

Status Channel::ensure_connected(uint64_t timeout_ns) {
  if (conn_.valid()) return ok_status();
  auto conn = TcpConn::connect(endpoint_, timeout_ns);
  if (!conn) return conn.error();
  conn_ = std::move(*conn);
  return ok_status();
}

void Channel::emit_span(const RpcMessage& request, uint64_t t_start, uint64_t net_ns,
                        SpanStatus status) {
  last_span_dropped_ = false;
  if (recorder_ == nullptr) return;
  Span s;
  s.trace_id = request.context.trace_id;
  s.span_id = request.context.span_id;
  s.parent_span_id = request.context.parent_span_id;
  s.service = caller_service_;
  s.operation = request.method;
  s.kind = SpanKind::client;
  s.t_start = t_start;
  s.t_end = mono_now_ns();
  s.net_ns = net_ns;
  s.app_ns = 0;
  s.status = status;
  if (s.net_ns > s.duration_ns()) s.net_ns = s.duration_ns();
  last_span_dropped_ = !recorder_->record(std::move(s));
}

Result<RpcMessage> Channel::call(const RpcMessage& request, const CallOptions& opts) {
  if (request.kind != MsgKind::request) {
    return Error{Errc::invalid_argument, "call requires a request-kind message"};
  }
  auto frame = encode_frame(request, opts.max_frame);
  if (!frame) return frame.error();  // nothing hit the wire, no span

  uint64_t t_start = mono_now_ns();
  uint64_t deadline = t_start + opts.timeout_ns;
  uint64_t net_ns = 0;

  auto fail = [&](Error err) -> Result<RpcMessage> {
    reset();
    emit_span(request, t_start, net_ns, SpanStatus::error);
    return err;
  };

  auto st = ensure_connected(opts.timeout_ns);
  if (!st) return fail(st.error());

  st = conn_.send_all(*frame, deadline, &net_ns);
  if (!st) return fail(st.error());

  auto fr = conn_.read_frame(opts.max_frame, deadline);
  if (!fr) {
    Error err = fr.error();
    if (err.code == Errc::io_error) err = Error{Errc::protocol_error, err.detail};
    return fail(err);
  }
  net_ns += fr->active_ns;

  auto msg = decode_frame(fr->frame, opts.max_frame);
  if (!msg) return fail(Error{Errc::protocol_error, msg.error().to_string()});
  if (msg->context.trace_id != request.context.trace_id ||
      msg->context.span_id != request.context.span_id) {
    return fail(Error{Errc::protocol_error, "response correlation mismatch"});
  }
  emit_span(request, t_start, net_ns,
            msg->kind == MsgKind::error ? SpanStatus::error : SpanStatus::ok);
  return msg;
}

std::vector<Result<RpcMessage>> Channel::call_parallel(const std::vector<Channel*>& channels,
                                                       const std::vector<RpcMessage>& requests,
                                                       const CallOptions& opts) {
  struct PerCall {
    bool done = false;
    uint64_t t_start = 0;
    uint64_t net_ns = 0;
  };
  size_t n = channels.size();
  std::vector<Result<RpcMessage>> results;
  results.reserve(n);
  for (size_t i = 0; i < n; i++) results.emplace_back(Errc::internal);
  std::vector<PerCall> state(n);
  uint64_t deadline = mono_now_ns() + opts.timeout_ns;

  auto finish = [&](size_t i, Result<RpcMessage> r, SpanStatus status) {
    if (!r.ok()) channels[i]->reset();
    channels[i]->emit_span(requests[i], state[i].t_start, state[i].net_ns, status);
    results[i] = std::move(r);
    state[i].done = true;
  };

  // Phase one: connect and write every request.
  for (size_t i = 0; i < n; i++) {
    state[i].t_start = mono_now_ns();
    auto frame = encode_frame(requests[i], opts.max_frame);
    if (!frame) {
      results[i] = frame.error();
      state[i].done = true;  // never hit the wire, no span
      continue;
    }
    auto st = channels[i]->ensure_connected(opts.timeout_ns);
    if (!st) {
      finish(i, st.error(), SpanStatus::error);
      continue;
    }
    st = channels[i]->conn_.send_all(*frame, deadline, &state[i].net_ns);
    if (!st) {
      finish(i, st.error(), SpanStatus::error);
      continue;
    }
  }

  // Phase two: multiplex reads until all done or deadline.
  for (;;) {
    std::vector<pollfd> pfds;
    std::vector<size_t> idx;
    for (size_t i = 0; i < n; i++) {
      if (!state[i].done) {
        pfds.push_back({channels[i]->conn_.fd(), POLLIN, 0});
        idx.push_back(i);
      }
    }
    if (pfds.empty()) break;
    uint64_t now = mono_now_ns();
    if (now >= deadline) {
      for (size_t i : idx) {
        finish(i, Error{Errc::timeout, "parallel call deadline"}, SpanStatus::error);
      }
      break;
    }
    int rc = ::poll(pfds.data(), static_cast<nfds_t>(pfds.size()),
                    static_cast<int>((deadline - now) / 1000000 + 1));
    if (rc < 0) {
      if (errno == EINTR) continue;
      for (size_t i : idx) finish(i, Error{Errc::io_error, "poll"}, SpanStatus::error);
      break;
    }
    if (rc == 0) continue;
    for (size_t k = 0; k < pfds.size(); k++) {
      if ((pfds[k].revents & (POLLIN | POLLERR | POLLHUP)) == 0) continue;
      size_t i = idx[k];
      auto fr = channels[i]->conn_.read_frame(opts.max_frame, deadline);
      if (!fr) {
        Error err = fr.error();
        if (err.code == Errc::io_error) err = Error{Errc::protocol_error, err.detail};
        finish(i, err, SpanStatus::error);
        continue;
      }
      state[i].net_ns += fr->active_ns;
      auto msg = decode_frame(fr->frame, opts.max_frame);
      if (!msg) {
        finish(i, Error{Errc::protocol_error, msg.error().to_string()}, SpanStatus::error);
        continue;
      }
      if (msg->context.trace_id != requests[i].context.trace_id ||
          msg->context.span_id != requests[i].context.span_id) {
        finish(i, Error{Errc::protocol_error, "response correlation mismatch"}, SpanStatus::error);
        continue;
      }
      SpanStatus status = msg->kind == MsgKind::error ? SpanStatus::error : SpanStatus::ok;
      finish(i, std::move(*msg), status);
    }
  }
  return results;
}

}  // namespace moviebench
