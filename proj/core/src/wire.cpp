// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/wire.hpp"

#include <cstdio>
#include <cstring>
#include <random>

#include "moviebench/digest.hpp"

namespace moviebench {

void put_u16_be(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v & 0xff));
}

void put_u32_be(std::string& out, uint32_t v) {
  for (int i = 3; i >= 0; i--) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64_be(std::string& out, uint64_t v) {
  for (int i = 7; i >= 0; i--) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint16_t get_u16_be(const unsigned char* p) {
  return static_cast<uint16_t>((static_cast<uint16_t>(p[0]) << 8) | p[1]);
}

uint32_t get_u32_be(const unsigned char* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; i++) v = (v << 8) | p[i];
  return v;
}

uint64_t get_u64_be(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; i++) v = (v << 8) | p[i];
  return v;
}

std::string U128::hex32() const {
  char buf[33];
  snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(hi),
           static_cast<unsigned long long>(lo));
  return std::string(buf, 32);
}

bool U128::parse_hex32(std::string_view s, U128* out) {
  if (s.size() != 32) return false;
  uint64_t parts[2] = {0, 0};
  for (int half = 0; half < 2; half++) {
    uint64_t v = 0;
    for (int i = 0; i < 16; i++) {
      char c = s[half * 16 + i];
      uint64_t d;
      if (c >= '0' && c <= '9') {
        d = static_cast<uint64_t>(c - '0');
      } else if (c >= 'a' && c <= 'f') {
        d = static_cast<uint64_t>(c - 'a' + 10);
      } else if (c >= 'A' && c <= 'F') {
        d = static_cast<uint64_t>(c - 'A' + 10);
      } else {
        return false;
      }
      v = (v << 4) | d;
    }
    parts[half] = v;
  }
  out->hi = parts[0];
  out->lo = parts[1];
  return true;
}

size_t RpcMessage::encoded_payload_size() const {
  size_t n = kPayloadHeaderLen + method.size() + 2;
  for (const auto& f : fields) n += 1 + 4 + f.value.size();
  return n;
}

RpcMessage RpcMessage::make_error(const TraceContext& ctx, const Error& err) {
  RpcMessage m;
  m.kind = MsgKind::error;
  m.context = ctx;
  m.add(0, errc_name(err.code));
  if (!err.detail.empty()) m.add(1, err.detail);
  return m;
}

Error RpcMessage::as_error() const {
  Error e;
  if (const std::string* name = field(0)) e.code = errc_from_name(*name);
  if (const std::string* detail = field(1)) e.detail = *detail;
  return e;
}

Result<std::string> encode_frame(const RpcMessage& msg, size_t max_frame) {
  if (msg.kind == MsgKind::request && msg.method.empty()) {
    return Error{Errc::invalid_method, "request with empty method"};
  }
  if (msg.method.size() > kMaxMethodLen) {
    return Error{Errc::invalid_method, "method longer than 1024 bytes"};
  }
  if (!msg.context.valid()) {
    return Error{Errc::protocol_error, "zero trace_id or span_id"};
  }
  if (msg.fields.size() > 0xffff) {
    return Error{Errc::protocol_error, "too many fields"};
  }
  {
    bool seen[256] = {false};
    for (const auto& f : msg.fields) {
      if (seen[f.tag]) return Error{Errc::duplicate_tag, "tag " + std::to_string(f.tag)};
      seen[f.tag] = true;
    }
  }
  size_t payload_len = msg.encoded_payload_size();
  if (payload_len > max_frame) {
    return Error{Errc::oversize_frame,
                 std::to_string(payload_len) + " > max_frame " + std::to_string(max_frame)};
  }

  std::string out;
  out.reserve(4 + payload_len);
  put_u32_be(out, static_cast<uint32_t>(payload_len));
  out.push_back(static_cast<char>(msg.version));
  out.push_back(static_cast<char>(msg.kind));
  put_u64_be(out, msg.context.trace_id.hi);
  put_u64_be(out, msg.context.trace_id.lo);
  put_u64_be(out, msg.context.span_id);
  put_u64_be(out, msg.context.parent_span_id);
  put_u16_be(out, static_cast<uint16_t>(msg.method.size()));
  out.append(msg.method);
  put_u16_be(out, static_cast<uint16_t>(msg.fields.size()));
  for (const auto& f : msg.fields) {
    out.push_back(static_cast<char>(f.tag));
    put_u32_be(out, static_cast<uint32_t>(f.value.size()));
    out.append(f.value);
  }
  return out;
}

Result<RpcMessage> decode_payload(std::string_view payload) {
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  size_t n = payload.size();
  if (n < kPayloadHeaderLen) return Error{Errc::truncated, "payload shorter than fixed header"};

  RpcMessage msg;
  msg.version = p[0];
  if (msg.version != kWireVersion) {
    return Error{Errc::bad_version, "version " + std::to_string(p[0])};
  }
  if (p[1] > 2) return Error{Errc::bad_kind, "kind " + std::to_string(p[1])};
  msg.kind = static_cast<MsgKind>(p[1]);
  msg.context.trace_id.hi = get_u64_be(p + 2);
  msg.context.trace_id.lo = get_u64_be(p + 10);
  msg.context.span_id = get_u64_be(p + 18);
  msg.context.parent_span_id = get_u64_be(p + 26);
  uint16_t method_len = get_u16_be(p + 34);
  size_t pos = kPayloadHeaderLen;
  if (method_len > kMaxMethodLen) return Error{Errc::invalid_method, "method too long"};
  if (pos + method_len > n) return Error{Errc::truncated, "method exceeds payload"};
  msg.method.assign(payload.substr(pos, method_len));
  pos += method_len;
  if (msg.kind == MsgKind::request && method_len == 0) {
    return Error{Errc::invalid_method, "request with empty method"};
  }
  if (pos + 2 > n) return Error{Errc::truncated, "missing field count"};
  uint16_t field_count = get_u16_be(p + pos);
  pos += 2;
  msg.fields.reserve(field_count);
  bool seen[256] = {false};
  for (uint16_t i = 0; i < field_count; i++) {
    if (pos + 5 > n) return Error{Errc::truncated, "field header exceeds payload"};
    uint8_t tag = p[pos];
    uint32_t value_len = get_u32_be(p + pos + 1);
    pos += 5;
    if (value_len > n - pos) return Error{Errc::truncated, "field value exceeds payload"};
    if (seen[tag]) return Error{Errc::duplicate_tag, "tag " + std::to_string(tag)};
    seen[tag] = true;
    msg.fields.push_back({tag, std::string(payload.substr(pos, value_len))});
    pos += value_len;
  }
  if (pos != n) {
    return Error{Errc::trailing_bytes, std::to_string(n - pos) + " unconsumed payload bytes"};
  }
  if (!msg.context.valid()) return Error{Errc::protocol_error, "zero trace_id or span_id"};
  return msg;
}

Result<RpcMessage> decode_frame(std::string_view frame, size_t max_frame) {
  if (frame.size() < 4) return Error{Errc::truncated, "missing length prefix"};
  uint32_t payload_len = get_u32_be(reinterpret_cast<const unsigned char*>(frame.data()));
  if (payload_len > max_frame) {
    return Error{Errc::oversize_frame, "declared payload " + std::to_string(payload_len)};
  }
  if (frame.size() < 4ull + payload_len) {
    return Error{Errc::truncated, "payload shorter than length prefix"};
  }
  if (frame.size() > 4ull + payload_len) {
    return Error{Errc::trailing_bytes, "bytes beyond declared frame"};
  }
  return decode_payload(frame.substr(4, payload_len));
}

IdSource::IdSource() {
  std::random_device rd;
  base_ = (static_cast<uint64_t>(rd()) << 32) ^ rd() ^ mono_now_ns();
}

uint64_t IdSource::next_span_id() {
  for (;;) {
    uint64_t id = mix64(base_ + ctr_.fetch_add(1, std::memory_order_relaxed) + 1);
    if (id != 0) return id;
  }
}

U128 IdSource::next_trace_id() {
  U128 id;
  do {
    id.hi = next_span_id();
    id.lo = next_span_id();
  } while (id.is_zero());
  return id;
}

TraceContext root_context(IdSource& ids) {
  TraceContext ctx;
  ctx.trace_id = ids.next_trace_id();
  ctx.span_id = ids.next_span_id();
  ctx.parent_span_id = 0;
  return ctx;
}

TraceContext child_context(const TraceContext& parent, IdSource& ids) {
  TraceContext ctx;
  ctx.trace_id = parent.trace_id;
  ctx.parent_span_id = parent.span_id;
  do {
    ctx.span_id = ids.next_span_id();
  } while (ctx.span_id == parent.span_id);
  return ctx;
}

}  // namespace moviebench
