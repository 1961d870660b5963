// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/net.hpp"

#include <arpa/inet.h>
#include <errno.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <string.h>
#include <sys/socket.h>
#include <unistd.h>

#include "moviebench/wire.hpp"

namespace moviebench {

namespace {

Error errno_error(Errc code, const char* what) {
  return Error{code, std::string(what) + ": " + strerror(errno)};
}

Status poll_fd(int fd, short events, uint64_t deadline_ns) {
  for (;;) {
    uint64_t now = mono_now_ns();
    if (now >= deadline_ns) return Error{Errc::timeout, "poll deadline"};
    uint64_t budget_ms = (deadline_ns - now + 999999) / 1000000;
    if (budget_ms > 60000) budget_ms = 60000;
    pollfd pfd{fd, events, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(budget_ms));
    if (rc > 0) return ok_status();
    if (rc == 0) continue;
    if (errno == EINTR) continue;
    return errno_error(Errc::io_error, "poll");
  }
}

}  // namespace

TcpConn::~TcpConn() { close(); }

TcpConn::TcpConn(TcpConn&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

TcpConn& TcpConn::operator=(TcpConn&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void TcpConn::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Result<std::pair<std::string, uint16_t>> split_host_port(const std::string& addr) {
  auto colon = addr.rfind(':');
  std::string host = "127.0.0.1";
  std::string port_str;
  if (colon == std::string::npos) {
    port_str = addr;
  } else {
    if (colon > 0) host = addr.substr(0, colon);
    port_str = addr.substr(colon + 1);
  }
  char* end = nullptr;
  long port = strtol(port_str.c_str(), &end, 10);
  if (end == nullptr || *end != '\0' || port <= 0 || port > 65535) {
    return Error{Errc::invalid_argument, "bad address '" + addr + "'"};
  }
  return std::make_pair(host, static_cast<uint16_t>(port));
}

Result<TcpConn> TcpConn::connect(const std::string& host_port, uint64_t timeout_ns) {
  auto parsed = split_host_port(host_port);
  if (!parsed) return parsed.error();
  const auto& [host, port] = *parsed;

  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_NONBLOCK, 0);
  if (fd < 0) return errno_error(Errc::io_error, "socket");

  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
    ::close(fd);
    return Error{Errc::invalid_argument, "bad host '" + host + "'"};
  }

  uint64_t deadline = mono_now_ns() + timeout_ns;
  int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa));
  if (rc != 0 && errno != EINPROGRESS) {
    Errc code = (errno == ECONNREFUSED) ? Errc::connection_refused : Errc::io_error;
    auto err = errno_error(code, "connect");
    ::close(fd);
    return err;
  }
  if (rc != 0) {
    for (;;) {
      uint64_t now = mono_now_ns();
      if (now >= deadline) {
        ::close(fd);
        return Error{Errc::timeout, "connect timeout"};
      }
      pollfd pfd{fd, POLLOUT, 0};
      int prc = ::poll(&pfd, 1, static_cast<int>((deadline - now) / 1000000 + 1));
      if (prc < 0 && errno == EINTR) continue;
      if (prc <= 0) continue;
      int err = 0;
      socklen_t len = sizeof(err);
      getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      if (err != 0) {
        ::close(fd);
        Errc code = (err == ECONNREFUSED) ? Errc::connection_refused : Errc::io_error;
        return Error{code, std::string("connect: ") + strerror(err)};
      }
      break;
    }
  }
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return TcpConn(fd);
}

Status TcpConn::send_all(std::string_view data, uint64_t deadline_ns, uint64_t* active_ns) {
  size_t off = 0;
  while (off < data.size()) {
    uint64_t t0 = mono_now_ns();
    ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    uint64_t t1 = mono_now_ns();
    if (active_ns) *active_ns += t1 - t0;
    if (n > 0) {
      off += static_cast<size_t>(n);
      continue;
    }
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      auto st = poll_fd(fd_, POLLOUT, deadline_ns);
      if (!st) return st;
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    return errno_error(Errc::io_error, "send");
  }
  return ok_status();
}

Status TcpConn::wait_readable(uint64_t deadline_ns) const {
  return poll_fd(fd_, POLLIN, deadline_ns);
}

Status TcpConn::recv_exact(char* buf, size_t len, uint64_t deadline_ns, uint64_t* active_ns,
                           bool* clean_eof) const {
  size_t off = 0;
  while (off < len) {
    uint64_t t0 = mono_now_ns();
    ssize_t n = ::recv(fd_, buf + off, len - off, 0);
    uint64_t t1 = mono_now_ns();
    if (active_ns) *active_ns += t1 - t0;
    if (n > 0) {
      off += static_cast<size_t>(n);
      continue;
    }
    if (n == 0) {
      if (clean_eof && off == 0) *clean_eof = true;
      return Error{Errc::io_error, "eof"};
    }
    if (errno == EAGAIN || errno == EWOULDBLOCK) {
      auto st = poll_fd(fd_, POLLIN, deadline_ns);
      if (!st) return st;
      continue;
    }
    if (errno == EINTR) continue;
    return errno_error(Errc::io_error, "recv");
  }
  return ok_status();
}

Result<FrameRead> TcpConn::read_frame(size_t max_frame, uint64_t deadline_ns) const {
  auto st = wait_readable(deadline_ns);
  if (!st) return st.error();

  FrameRead out;
  out.t_first_byte = mono_now_ns();
  out.active_ns = 0;

  char prefix[4];
  bool clean_eof = false;
  st = recv_exact(prefix, 4, deadline_ns, &out.active_ns, &clean_eof);
  if (!st) {
    if (clean_eof) return Error{Errc::io_error, "eof"};
    return st.error();
  }
  uint32_t payload_len = get_u32_be(reinterpret_cast<const unsigned char*>(prefix));
  if (payload_len > max_frame) {
    return Error{Errc::oversize_frame, "declared payload " + std::to_string(payload_len)};
  }
  out.frame.assign(prefix, 4);
  out.frame.resize(4ull + payload_len);
  if (payload_len > 0) {
    st = recv_exact(out.frame.data() + 4, payload_len, deadline_ns, &out.active_ns, nullptr);
    if (!st) return st.error();
  }
  return out;
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

TcpListener::TcpListener(TcpListener&& other) noexcept : fd_(other.fd_), port_(other.port_) {
  other.fd_ = -1;
}

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    port_ = other.port_;
    other.fd_ = -1;
  }
  return *this;
}

Result<TcpListener> TcpListener::bind_loopback(uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) return errno_error(Errc::io_error, "socket");
  int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
    Errc code = (errno == EADDRINUSE) ? Errc::port_in_use : Errc::io_error;
    auto err = errno_error(code, "bind");
    ::close(fd);
    return err;
  }
  if (::listen(fd, 256) != 0) {
    auto err = errno_error(Errc::io_error, "listen");
    ::close(fd);
    return err;
  }
  TcpListener l;
  l.fd_ = fd;
  if (port == 0) {
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    l.port_ = ntohs(bound.sin_port);
  } else {
    l.port_ = port;
  }
  return l;
}

Result<TcpConn> TcpListener::accept() const {
  for (;;) {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      int one = 1;
      setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return TcpConn(fd);
    }
    if (errno == EINTR) continue;
    return errno_error(Errc::io_error, "accept");
  }
}

void TcpListener::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

bool loopback_port_in_use(uint16_t port) {
  auto l = TcpListener::bind_loopback(port);
  return !l.ok();
}

}  // namespace moviebench
