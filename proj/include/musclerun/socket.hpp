// Copyright 2026 The musclerun Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "musclerun/common.hpp"

namespace musclerun::net {

class NetError : public Error {
 public:
  using Error::Error;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;
};

// "host:port"; a bare port means 127.0.0.1.
inline Endpoint parse_endpoint(std::string_view text) {
  Endpoint ep;
  const auto colon = text.rfind(':');
  const std::string_view port = colon == std::string_view::npos ? text : text.substr(colon + 1);
  if (colon != std::string_view::npos && colon > 0) ep.host = std::string(text.substr(0, colon));
  try {
    std::size_t used = 0;
    ep.port = std::stoi(std::string(port), &used);
    if (used != port.size() || ep.port < 0 || ep.port > 65535) throw std::invalid_argument("port");
  } catch (const std::exception&) {
    throw NetError("invalid address '" + std::string(text) + "', expected host:port");
  }
  return ep;
}

// Owning file descriptor of a stream socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)), buffer_(std::move(o.buffer_)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
      buffer_ = std::move(o.buffer_);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }

  void close() noexcept {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

  void shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

  void send_all(std::string_view data) {
    while (!data.empty()) {
      const ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw NetError(std::string("send failed: ") + std::strerror(errno));
      }
      data.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  void send_line(std::string_view line) {
    std::string buf(line);
    buf.push_back('\n');
    send_all(buf);
  }

  enum class ReadStatus { line, closed, timeout };

  // Reads one '\n'-terminated line (terminator stripped). `timeout` bounds the
  // idle time between received bytes.
  ReadStatus read_line(std::string& line, std::chrono::milliseconds timeout) {
    while (true) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return ReadStatus::line;
      }
      pollfd p{fd_, POLLIN, 0};
      const int ready = ::poll(&p, 1, static_cast<int>(timeout.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw NetError(std::string("poll failed: ") + std::strerror(errno));
      }
      if (ready == 0) return ReadStatus::timeout;
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        return ReadStatus::closed;
      }
      if (n == 0) return ReadStatus::closed;
      buffer_.append(chunk, static_cast<std::size_t>(n));
      if (buffer_.size() > (1u << 20)) throw NetError("line exceeds 1 MiB");
    }
  }

 private:
  int fd_ = -1;
  std::string buffer_;
};

inline Socket listen_on(const Endpoint& ep, int backlog = 64) {
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) throw NetError(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(ep.port));
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1) {
    throw NetError("bind address must be an IPv4 literal, got '" + ep.host + "'");
  }
  if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw NetError("bind " + ep.host + ":" + std::to_string(ep.port) + ": " + std::strerror(errno));
  }
  if (::listen(s.fd(), backlog) != 0) throw NetError(std::string("listen: ") + std::strerror(errno));
  return s;
}

inline int local_port(const Socket& s) {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

// Waits up to `timeout` for a connection; nullopt on timeout.
inline std::optional<Socket> accept_for(const Socket& listener, std::chrono::milliseconds timeout) {
  pollfd p{listener.fd(), POLLIN, 0};
  const int ready = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (ready <= 0) return std::nullopt;
  const int fd = ::accept(listener.fd(), nullptr, nullptr);
  if (fd < 0) return std::nullopt;
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return Socket(fd);
}

inline Socket connect_to(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  if (const int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw NetError("resolve " + ep.host + ": " + ::gai_strerror(rc));
  }
  Socket s;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket attempt(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!attempt.valid()) continue;
    if (::connect(attempt.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      s = std::move(attempt);
      break;
    }
  }
  ::freeaddrinfo(res);
  if (!s.valid()) {
    throw NetError("connect " + ep.host + ":" + port + ": " + std::strerror(errno));
  }
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return s;
}

}  // namespace musclerun::net
