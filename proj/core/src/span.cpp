// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/span.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>

namespace moviebench {

const char* span_kind_name(SpanKind k) { return k == SpanKind::server ? "server" : "client"; }

const char* span_status_name(SpanStatus s) {
  switch (s) {
    case SpanStatus::ok:
      return "ok";
    case SpanStatus::error:
      return "error";
    case SpanStatus::dropped_child:
      return "dropped_child";
  }
  return "ok";
}

std::string span_to_line(const Span& s) {
  char buf[256];
  int n = snprintf(buf, sizeof(buf), "%s\t%016" PRIx64 "\t%016" PRIx64 "\t", s.trace_id.hex32().c_str(),
                   s.span_id, s.parent_span_id);
  std::string line(buf, static_cast<size_t>(n));
  line += s.service;
  line += '\t';
  line += s.operation;
  line += '\t';
  line += span_kind_name(s.kind);
  n = snprintf(buf, sizeof(buf), "\t%" PRIu64 "\t%" PRIu64 "\t%" PRIu64 "\t%" PRIu64 "\t", s.t_start,
               s.t_end, s.net_ns, s.app_ns);
  line.append(buf, static_cast<size_t>(n));
  line += span_status_name(s.status);
  return line;
}

namespace {

bool parse_hex16(std::string_view s, uint64_t* out) {
  if (s.size() != 16) return false;
  uint64_t v = 0;
  for (char c : s) {
    uint64_t d;
    if (c >= '0' && c <= '9') {
      d = static_cast<uint64_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      d = static_cast<uint64_t>(c - 'a' + 10);
    } else {
      return false;
    }
    v = (v << 4) | d;
  }
  *out = v;
  return true;
}

bool parse_u64(std::string_view s, uint64_t* out) {
  if (s.empty() || s.size() > 20) return false;
  uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<uint64_t>(c - '0');
  }
  *out = v;
  return true;
}

}  // namespace

Result<Span> span_from_line(std::string_view line) {
  std::string_view parts[11];
  size_t count = 0;
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); i++) {
    if (i == line.size() || line[i] == '\t') {
      if (count >= 11) return Error{Errc::malformed_line, "too many fields"};
      parts[count++] = line.substr(start, i - start);
      start = i + 1;
    }
  }
  if (count != 11) return Error{Errc::malformed_line, "expected 11 fields"};

  Span s;
  if (!U128::parse_hex32(parts[0], &s.trace_id)) return Error{Errc::malformed_line, "trace_id"};
  if (!parse_hex16(parts[1], &s.span_id)) return Error{Errc::malformed_line, "span_id"};
  if (!parse_hex16(parts[2], &s.parent_span_id)) return Error{Errc::malformed_line, "parent"};
  if (parts[3].empty()) return Error{Errc::malformed_line, "service"};
  s.service.assign(parts[3]);
  s.operation.assign(parts[4]);
  if (parts[5] == "server") {
    s.kind = SpanKind::server;
  } else if (parts[5] == "client") {
    s.kind = SpanKind::client;
  } else {
    return Error{Errc::malformed_line, "kind"};
  }
  if (!parse_u64(parts[6], &s.t_start)) return Error{Errc::malformed_line, "t_start"};
  if (!parse_u64(parts[7], &s.t_end)) return Error{Errc::malformed_line, "t_end"};
  if (!parse_u64(parts[8], &s.net_ns)) return Error{Errc::malformed_line, "net_ns"};
  if (!parse_u64(parts[9], &s.app_ns)) return Error{Errc::malformed_line, "app_ns"};
  if (parts[10] == "ok") {
    s.status = SpanStatus::ok;
  } else if (parts[10] == "error") {
    s.status = SpanStatus::error;
  } else if (parts[10] == "dropped_child") {
    s.status = SpanStatus::dropped_child;
  } else {
    return Error{Errc::malformed_line, "status"};
  }
  if (s.t_end < s.t_start) return Error{Errc::malformed_line, "t_end < t_start"};
  return s;
}

namespace {
size_t round_up_pow2(size_t v) {
  size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}
}  // namespace

SpanBuffer::SpanBuffer(size_t capacity)
    : capacity_(round_up_pow2(capacity < 2 ? 2 : capacity)),
      mask_(capacity_ - 1),
      cells_(new Cell[capacity_]) {
  for (size_t i = 0; i < capacity_; i++) cells_[i].seq.store(i, std::memory_order_relaxed);
}

bool SpanBuffer::record(Span s) {
  recorded_.fetch_add(1, std::memory_order_relaxed);
  uint64_t pos = head_.load(std::memory_order_relaxed);
  for (;;) {
    Cell& cell = cells_[pos & mask_];
    uint64_t seq = cell.seq.load(std::memory_order_acquire);
    intptr_t diff = static_cast<intptr_t>(seq) - static_cast<intptr_t>(pos);
    if (diff == 0) {
      if (head_.compare_exchange_weak(pos, pos + 1, std::memory_order_relaxed)) {
        cell.span = std::move(s);
        cell.seq.store(pos + 1, std::memory_order_release);
        return true;
      }
    } else if (diff < 0) {
      dropped_.fetch_add(1, std::memory_order_relaxed);
      return false;
    } else {
      pos = head_.load(std::memory_order_relaxed);
    }
  }
}

size_t SpanBuffer::drain(std::vector<Span>& out, size_t max) {
  size_t n = 0;
  uint64_t pos = tail_.load(std::memory_order_relaxed);
  while (n < max) {
    Cell& cell = cells_[pos & mask_];
    uint64_t seq = cell.seq.load(std::memory_order_acquire);
    if (static_cast<intptr_t>(seq) - static_cast<intptr_t>(pos + 1) != 0) break;
    out.push_back(std::move(cell.span));
    cell.seq.store(pos + capacity_, std::memory_order_release);
    pos++;
    n++;
  }
  tail_.store(pos, std::memory_order_relaxed);
  return n;
}

size_t SpanBuffer::approx_size() const {
  uint64_t h = head_.load(std::memory_order_relaxed);
  uint64_t t = tail_.load(std::memory_order_relaxed);
  return h > t ? static_cast<size_t>(h - t) : 0;
}

}  // namespace moviebench
