// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "moviebench/common.hpp"

namespace moviebench {

// Frame layout (all integers big-endian):
//   u32 payload_len
//   payload:
//     u8  version (0x01)
//     u8  kind (0 request, 1 response, 2 error)
//     u128 trace_id
//     u64 span_id
//     u64 parent_span_id
//     u16 method_len, method bytes
//     u16 field_count, then per field: u8 tag, u32 value_len, value bytes

inline constexpr uint8_t kWireVersion = 0x01;
inline constexpr size_t kDefaultMaxFrame = 16ull << 20;
inline constexpr size_t kMaxMethodLen = 1024;
inline constexpr size_t kPayloadHeaderLen = 1 + 1 + 16 + 8 + 8 + 2;

struct U128 {
  uint64_t hi = 0;
  uint64_t lo = 0;

  bool is_zero() const { return hi == 0 && lo == 0; }
  friend bool operator==(const U128&, const U128&) = default;
  friend auto operator<=>(const U128&, const U128&) = default;

  std::string hex32() const;  // 32 lowercase hex chars, zero padded
  static bool parse_hex32(std::string_view s, U128* out);
};

struct U128Hash {
  size_t operator()(const U128& v) const {
    return static_cast<size_t>(v.lo ^ (v.hi * 0x9e3779b97f4a7c15ull));
  }
};

struct TraceContext {
  U128 trace_id;
  uint64_t span_id = 0;
  uint64_t parent_span_id = 0;  // 0 means this span is the trace root

  bool valid() const { return !trace_id.is_zero() && span_id != 0; }
  friend bool operator==(const TraceContext&, const TraceContext&) = default;
};

enum class MsgKind : uint8_t { request = 0, response = 1, error = 2 };

struct Field {
  uint8_t tag = 0;
  std::string value;

  friend bool operator==(const Field&, const Field&) = default;
};

struct RpcMessage {
  uint8_t version = kWireVersion;
  MsgKind kind = MsgKind::request;
  TraceContext context;
  std::string method;
  std::vector<Field> fields;

  friend bool operator==(const RpcMessage&, const RpcMessage&) = default;

  const std::string* field(uint8_t tag) const {
    for (const auto& f : fields) {
      if (f.tag == tag) return &f.value;
    }
    return nullptr;
  }
  void add(uint8_t tag, std::string value) { fields.push_back({tag, std::move(value)}); }

  size_t encoded_payload_size() const;
  bool is_error() const { return kind == MsgKind::error; }

  // Error-response helpers: tag 0 carries the symbolic errc name, tag 1 the
  // detail text.
  static RpcMessage make_error(const TraceContext& ctx, const Error& err);
  Error as_error() const;
};

Result<std::string> encode_frame(const RpcMessage& msg, size_t max_frame = kDefaultMaxFrame);
Result<RpcMessage> decode_frame(std::string_view frame, size_t max_frame = kDefaultMaxFrame);
// Decode the payload after the length prefix has been stripped (stream path).
Result<RpcMessage> decode_payload(std::string_view payload);

// Fresh nonzero ids. next() is collision-free within one source (bijective
// mix over a counter); distinct processes use distinct random bases.
class IdSource {
 public:
  IdSource();  // random base from OS entropy
  explicit IdSource(uint64_t base) : base_(base) {}

  uint64_t next_span_id();
  U128 next_trace_id();

 private:
  uint64_t base_;
  std::atomic<uint64_t> ctr_{0};
};

TraceContext root_context(IdSource& ids);
TraceContext child_context(const TraceContext& parent, IdSource& ids);

// Big-endian append/read helpers shared by codecs.
void put_u16_be(std::string& out, uint16_t v);
void put_u32_be(std::string& out, uint32_t v);
void put_u64_be(std::string& out, uint64_t v);
uint16_t get_u16_be(const unsigned char* p);
uint32_t get_u32_be(const unsigned char* p);
uint64_t get_u64_be(const unsigned char* p);

}  // namespace moviebench
