#include "net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace emoc::net {

std::optional<HostPort> parse_host_port(std::string_view text, const std::string& default_host) {
  HostPort hp;
  hp.host = default_host;
  std::string_view port_part = text;
  const size_t colon = text.rfind(':');
  if (colon != std::string_view::npos) {
    hp.host = std::string(text.substr(0, colon));
    port_part = text.substr(colon + 1);
  }
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(port_part.data(), port_part.data() + port_part.size(), value);
  if (ec != std::errc() || ptr != port_part.data() + port_part.size() || value > 65535) {
    return std::nullopt;
  }
  hp.port = static_cast<uint16_t>(value);
  if (hp.host.empty()) hp.host = default_host;
  return hp;
}

namespace {

int resolve_and(const std::string& host, uint16_t port, bool listen_mode, std::string& error) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (listen_mode) hints.ai_flags = AI_PASSIVE;

  addrinfo* info = nullptr;
  const std::string port_str = std::to_string(port);
  if (int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), port_str.c_str(), &hints, &info);
      rc != 0) {
    error = std::string("getaddrinfo: ") + gai_strerror(rc);
    return -1;
  }

  int fd = -1;
  for (addrinfo* ai = info; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (listen_mode) {
      int one = 1;
      ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
      if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) break;
    } else {
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    }
    error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(info);
  if (fd < 0 && error.empty()) error = "no usable address";
  return fd;
}

}  // namespace

int tcp_listen(const std::string& host, uint16_t port, std::string& error) {
  return resolve_and(host, port, /*listen_mode=*/true, error);
}

int tcp_connect(const std::string& host, uint16_t port, std::string& error) {
  return resolve_and(host, port, /*listen_mode=*/false, error);
}

std::optional<uint16_t> bound_port(int fd) {
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return std::nullopt;
  if (addr.ss_family == AF_INET) {
    return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  }
  if (addr.ss_family == AF_INET6) {
    return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }
  return std::nullopt;
}

bool send_all(int fd, std::string_view data) {
  size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      return false;
    }
    sent += static_cast<size_t>(n);
  }
  return true;
}

}  // namespace emoc::net
