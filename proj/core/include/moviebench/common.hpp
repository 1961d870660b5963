// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace moviebench {

// One error taxonomy for the whole stack. Error responses on the wire carry
// the symbolic name, so both deployments encode failures identically.
enum class Errc : uint16_t {
  ok = 0,
  // wire / framing
  oversize_frame,
  invalid_method,
  truncated,
  bad_version,
  bad_kind,
  duplicate_tag,
  trailing_bytes,
  // transport
  timeout,
  connection_refused,
  protocol_error,
  shed,
  collector_unreachable,
  entry_unreachable,
  // application
  not_found,
  section_unavailable,
  invalid_stars,
  store_unavailable,
  insufficient_funds,
  oversize_value,
  corruption,
  disk_full,
  invalid_count,
  // topology / orchestration
  syntax_error,
  duplicate_service,
  unknown_role,
  unknown_service,
  port_collision,
  cycle,
  port_in_use,
  spawn_failure,
  readiness_timeout,
  forced_kill,
  // measurement / analysis
  empty_histogram,
  config_mismatch,
  curve_too_short,
  empty_input,
  malformed_tree,
  malformed_line,
  service_set_mismatch,
  // misc
  io_error,
  invalid_argument,
  internal,
};

const char* errc_name(Errc c);
Errc errc_from_name(std::string_view name);  // internal if unknown

struct Error {
  Errc code = Errc::internal;
  std::string detail;

  std::string to_string() const;
};

// Minimal expected-like result. gcc 11 has no std::expected.
template <typename T>
class [[nodiscard]] Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Error err) : v_(std::move(err)) {}
  Result(Errc code, std::string detail = {}) : v_(Error{code, std::move(detail)}) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  T& value() & { return std::get<T>(v_); }
  const T& value() const& { return std::get<T>(v_); }
  T&& value() && { return std::get<T>(std::move(v_)); }

  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

  const Error& error() const { return std::get<Error>(v_); }
  Errc code() const { return ok() ? Errc::ok : error().code; }

 private:
  std::variant<T, Error> v_;
};

using Status = Result<std::monostate>;
inline Status ok_status() { return Status(std::monostate{}); }

// Monotonic nanoseconds (CLOCK_MONOTONIC). Comparable within one process;
// analysis never mixes raw timestamps across processes.
uint64_t mono_now_ns();
// Wall clock nanoseconds since epoch, for stored timestamps only.
uint64_t wall_now_ns();

void sleep_ns(uint64_t ns);

// Marks the calling thread as background work (nice +15 on Linux) so span
// shipping and collection yield the CPU to the request path.
void set_background_thread_priority();

}  // namespace moviebench
