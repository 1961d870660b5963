// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/common.hpp"

#include <sched.h>
#include <sys/resource.h>
#include <sys/syscall.h>
#include <time.h>
#include <unistd.h>

#include <thread>

namespace moviebench {

namespace {

struct ErrcEntry {
  Errc code;
  const char* name;
};

constexpr ErrcEntry kErrcTable[] = {
    {Errc::ok, "Ok"},
    {Errc::oversize_frame, "OversizeFrame"},
    {Errc::invalid_method, "InvalidMethod"},
    {Errc::truncated, "Truncated"},
    {Errc::bad_version, "BadVersion"},
    {Errc::bad_kind, "BadKind"},
    {Errc::duplicate_tag, "DuplicateTag"},
    {Errc::trailing_bytes, "TrailingBytes"},
    {Errc::timeout, "Timeout"},
    {Errc::connection_refused, "ConnectionRefused"},
    {Errc::protocol_error, "ProtocolError"},
    {Errc::shed, "Shed"},
    {Errc::collector_unreachable, "CollectorUnreachable"},
    {Errc::entry_unreachable, "EntryUnreachable"},
    {Errc::not_found, "NotFound"},
    {Errc::section_unavailable, "SectionUnavailable"},
    {Errc::invalid_stars, "InvalidStars"},
    {Errc::store_unavailable, "StoreUnavailable"},
    {Errc::insufficient_funds, "InsufficientFunds"},
    {Errc::oversize_value, "OversizeValue"},
    {Errc::corruption, "Corruption"},
    {Errc::disk_full, "DiskFull"},
    {Errc::invalid_count, "InvalidCount"},
    {Errc::syntax_error, "SyntaxError"},
    {Errc::duplicate_service, "DuplicateService"},
    {Errc::unknown_role, "UnknownRole"},
    {Errc::unknown_service, "UnknownService"},
    {Errc::port_collision, "PortCollision"},
    {Errc::cycle, "Cycle"},
    {Errc::port_in_use, "PortInUse"},
    {Errc::spawn_failure, "SpawnFailure"},
    {Errc::readiness_timeout, "ReadinessTimeout"},
    {Errc::forced_kill, "ForcedKill"},
    {Errc::empty_histogram, "EmptyHistogram"},
    {Errc::config_mismatch, "ConfigMismatch"},
    {Errc::curve_too_short, "CurveTooShort"},
    {Errc::empty_input, "EmptyInput"},
    {Errc::malformed_tree, "MalformedTree"},
    {Errc::malformed_line, "MalformedLine"},
    {Errc::service_set_mismatch, "ServiceSetMismatch"},
    {Errc::io_error, "IoError"},
    {Errc::invalid_argument, "InvalidArgument"},
    {Errc::internal, "Internal"},
};

}  // namespace

const char* errc_name(Errc c) {
  for (const auto& e : kErrcTable) {
    if (e.code == c) return e.name;
  }
  return "Internal";
}

Errc errc_from_name(std::string_view name) {
  for (const auto& e : kErrcTable) {
    if (name == e.name) return e.code;
  }
  return Errc::internal;
}

std::string Error::to_string() const {
  std::string s = errc_name(code);
  if (!detail.empty()) {
    s += ": ";
    s += detail;
  }
  return s;
}

uint64_t mono_now_ns() {
  timespec ts;
  clock_gettime(CLOCK_MONOTONIC, &ts);
  return static_cast<uint64_t>(ts.tv_sec) * 1000000000ull + static_cast<uint64_t>(ts.tv_nsec);
}

uint64_t wall_now_ns() {
  timespec ts;
  clock_gettime(CLOCK_REALTIME, &ts);
  return static_cast<uint64_t>(ts.tv_sec) * 1000000000ull + static_cast<uint64_t>(ts.tv_nsec);
}

void sleep_ns(uint64_t ns) {
  std::this_thread::sleep_for(std::chrono::nanoseconds(ns));
}

void set_background_thread_priority() {
  // SCHED_IDLE keeps span shipping entirely out of the request path's way on
  // small machines; buffers absorb bursts and overflow is counted, so the
  // conservation accounting stays exact even when these threads starve.
  struct sched_param param;
  param.sched_priority = 0;
  pid_t tid = static_cast<pid_t>(syscall(SYS_gettid));
  if (sched_setscheduler(tid, SCHED_IDLE, &param) != 0) {
    setpriority(PRIO_PROCESS, static_cast<id_t>(tid), 15);
  }
}

}  // namespace moviebench
