// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "moviebench/common.hpp"

namespace moviebench {

// Durable key-value store: append-only log plus in-memory index. Recovery
// scans the log, truncating a torn tail record while keeping everything
// before it. Record layout:
//   u32 body_len | u32 crc32c(body) | body = u16 key_len, key, u32 val_len, val
struct RecoveryReport {
  uint64_t records = 0;
  bool truncated_tail = false;
  uint64_t corruption_offset = 0;
};

class LogStore {
 public:
  LogStore() = default;
  ~LogStore();
  LogStore(LogStore&&) noexcept;
  LogStore& operator=(LogStore&&) noexcept;
  LogStore(const LogStore&) = delete;
  LogStore& operator=(const LogStore&) = delete;

  // Opens (creating if absent) and replays the log.
  static Result<LogStore> open(const std::string& path, RecoveryReport* report = nullptr);

  Result<std::optional<std::string>> get(const std::string& key) const;
  Status put(const std::string& key, std::string_view value);

  size_t keys() const;
  uint64_t log_bytes() const;
  const std::string& path() const { return path_; }
  void close();

 private:
  struct Loc {
    uint64_t value_off;
    uint32_t value_len;
  };

  std::string path_;
  int fd_ = -1;
  uint64_t end_off_ = 0;
  mutable std::mutex mu_;
  std::unordered_map<std::string, Loc> index_;
};

}  // namespace moviebench
