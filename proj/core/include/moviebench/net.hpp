// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "moviebench/common.hpp"

namespace moviebench {

// Thin RAII wrappers over IPv4 TCP sockets. All timing-sensitive reads and
// writes report the time spent inside syscalls so spans can separate network
// time from idle waiting.

struct FrameRead {
  std::string frame;       // length prefix + payload
  uint64_t t_first_byte;   // mono ns when the first byte became readable
  uint64_t active_ns;      // ns spent inside recv syscalls
};

class TcpConn {
 public:
  TcpConn() = default;
  explicit TcpConn(int fd) : fd_(fd) {}
  ~TcpConn();
  TcpConn(TcpConn&& other) noexcept;
  TcpConn& operator=(TcpConn&& other) noexcept;
  TcpConn(const TcpConn&) = delete;
  TcpConn& operator=(const TcpConn&) = delete;

  static Result<TcpConn> connect(const std::string& host_port, uint64_t timeout_ns);

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();

  // Blocks until all bytes are written or deadline passes. active_ns, if
  // non-null, accumulates time spent inside send syscalls.
  Status send_all(std::string_view data, uint64_t deadline_ns, uint64_t* active_ns = nullptr);

  // Waits for readability. Errc::timeout on deadline.
  Status wait_readable(uint64_t deadline_ns) const;

  // Reads one length-prefixed frame. Errors: timeout, oversize_frame,
  // io_error ("eof" detail when the peer closed between frames).
  Result<FrameRead> read_frame(size_t max_frame, uint64_t deadline_ns) const;

 private:
  Status recv_exact(char* buf, size_t len, uint64_t deadline_ns, uint64_t* active_ns,
                    bool* clean_eof) const;

  int fd_ = -1;
};

class TcpListener {
 public:
  TcpListener() = default;
  ~TcpListener();
  TcpListener(TcpListener&& other) noexcept;
  TcpListener& operator=(TcpListener&& other) noexcept;
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  static Result<TcpListener> bind_loopback(uint16_t port);

  Result<TcpConn> accept() const;  // blocking, io_error after shutdown()
  void shutdown();                 // unblocks accept
  bool valid() const { return fd_ >= 0; }
  uint16_t port() const { return port_; }

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

// "127.0.0.1:9100" -> (ip, port). Host defaults to loopback when omitted.
Result<std::pair<std::string, uint16_t>> split_host_port(const std::string& addr);

// True if something is already listening on the loopback port.
bool loopback_port_in_use(uint16_t port);

}  // namespace moviebench
