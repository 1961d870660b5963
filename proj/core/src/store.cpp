// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/store.hpp"

#include <errno.h>
#include <fcntl.h>
#include <string.h>
#include <sys/stat.h>
#include <unistd.h>

#include "moviebench/digest.hpp"
#include "moviebench/wire.hpp"

namespace moviebench {

namespace {
constexpr size_t kRecordHeader = 8;  // body_len + crc

Error errno_error(Errc code, const char* what) {
  return Error{code, std::string(what) + ": " + strerror(errno)};
}
}  // namespace

LogStore::~LogStore() { close(); }

LogStore::LogStore(LogStore&& other) noexcept {
  std::lock_guard<std::mutex> lock(other.mu_);
  path_ = std::move(other.path_);
  fd_ = other.fd_;
  end_off_ = other.end_off_;
  index_ = std::move(other.index_);
  other.fd_ = -1;
}

LogStore& LogStore::operator=(LogStore&& other) noexcept {
  if (this != &other) {
    close();
    std::lock_guard<std::mutex> lock(other.mu_);
    path_ = std::move(other.path_);
    fd_ = other.fd_;
    end_off_ = other.end_off_;
    index_ = std::move(other.index_);
    other.fd_ = -1;
  }
  return *this;
}

void LogStore::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Result<LogStore> LogStore::open(const std::string& path, RecoveryReport* report) {
  int fd = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
  if (fd < 0) return errno_error(Errc::io_error, "open log");

  LogStore store;
  store.path_ = path;
  store.fd_ = fd;

  struct stat st{};
  if (fstat(fd, &st) != 0) return errno_error(Errc::io_error, "fstat");
  auto file_size = static_cast<uint64_t>(st.st_size);

  RecoveryReport local;
  uint64_t off = 0;
  std::string body;
  while (off + kRecordHeader <= file_size) {
    unsigned char hdr[kRecordHeader];
    if (pread(fd, hdr, kRecordHeader, static_cast<off_t>(off)) != kRecordHeader) break;
    uint32_t body_len = get_u32_be(hdr);
    uint32_t crc = get_u32_be(hdr + 4);
    if (body_len < 2 + 4 || off + kRecordHeader + body_len > file_size) {
      local.truncated_tail = true;
      local.corruption_offset = off;
      break;
    }
    body.resize(body_len);
    if (pread(fd, body.data(), body_len, static_cast<off_t>(off + kRecordHeader)) !=
        static_cast<ssize_t>(body_len)) {
      local.truncated_tail = true;
      local.corruption_offset = off;
      break;
    }
    if (crc32c(static_cast<const void*>(body.data()), body_len) != crc) {
      local.truncated_tail = true;
      local.corruption_offset = off;
      break;
    }
    const auto* p = reinterpret_cast<const unsigned char*>(body.data());
    uint16_t key_len = get_u16_be(p);
    if (2u + key_len + 4u > body_len) {
      local.truncated_tail = true;
      local.corruption_offset = off;
      break;
    }
    uint32_t val_len = get_u32_be(p + 2 + key_len);
    if (2u + key_len + 4u + val_len != body_len) {
      local.truncated_tail = true;
      local.corruption_offset = off;
      break;
    }
    std::string key(body.data() + 2, key_len);
    store.index_[key] = Loc{off + kRecordHeader + 2 + key_len + 4, val_len};
    off += kRecordHeader + body_len;
    local.records++;
  }
  if (!local.truncated_tail && off != file_size && file_size > 0) {
    // Partial header at the tail counts as a torn record too.
    local.truncated_tail = true;
    local.corruption_offset = off;
  }
  if (local.truncated_tail) {
    if (ftruncate(fd, static_cast<off_t>(off)) != 0) {
      return errno_error(Errc::io_error, "truncate torn tail");
    }
  }
  store.end_off_ = off;
  if (lseek(fd, static_cast<off_t>(off), SEEK_SET) < 0) return errno_error(Errc::io_error, "seek");
  if (report) *report = local;
  return store;
}

Result<std::optional<std::string>> LogStore::get(const std::string& key) const {
  Loc loc{};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = index_.find(key);
    if (it == index_.end()) return std::optional<std::string>{};
    loc = it->second;
  }
  std::string value(loc.value_len, '\0');
  ssize_t n = pread(fd_, value.data(), loc.value_len, static_cast<off_t>(loc.value_off));
  if (n != static_cast<ssize_t>(loc.value_len)) {
    return Error{Errc::corruption, "short read at offset " + std::to_string(loc.value_off)};
  }
  return std::optional<std::string>(std::move(value));
}

Status LogStore::put(const std::string& key, std::string_view value) {
  if (key.size() > 0xffff) return Error{Errc::invalid_argument, "key too long"};
  std::string body;
  body.reserve(2 + key.size() + 4 + value.size());
  put_u16_be(body, static_cast<uint16_t>(key.size()));
  body.append(key);
  put_u32_be(body, static_cast<uint32_t>(value.size()));
  body.append(value);

  std::string rec;
  rec.reserve(kRecordHeader + body.size());
  put_u32_be(rec, static_cast<uint32_t>(body.size()));
  put_u32_be(rec, crc32c(static_cast<const void*>(body.data()), body.size()));
  rec.append(body);

  std::lock_guard<std::mutex> lock(mu_);
  size_t off = 0;
  while (off < rec.size()) {
    ssize_t n = ::write(fd_, rec.data() + off, rec.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      Errc code = (errno == ENOSPC) ? Errc::disk_full : Errc::io_error;
      return errno_error(code, "append");
    }
    off += static_cast<size_t>(n);
  }
  index_[key] = Loc{end_off_ + kRecordHeader + 2 + key.size() + 4,
                    static_cast<uint32_t>(value.size())};
  end_off_ += rec.size();
  return ok_status();
}

size_t LogStore::keys() const {
  std::lock_guard<std::mutex> lock(mu_);
  return index_.size();
}

uint64_t LogStore::log_bytes() const {
  std::lock_guard<std::mutex> lock(mu_);
  return end_off_;
}

}  // namespace moviebench
