#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace emoc::net {

struct HostPort {
  std::string host;
  uint16_t port = 0;
};

// "host:port" or bare "port"; returns nullopt on malformed input.
std::optional<HostPort> parse_host_port(std::string_view text, const std::string& default_host);

// Both return a connected/listening fd, or -1 with `error` filled in.
int tcp_listen(const std::string& host, uint16_t port, std::string& error);
int tcp_connect(const std::string& host, uint16_t port, std::string& error);

// Port actually bound (after listening on port 0).
std::optional<uint16_t> bound_port(int fd);

// Sends the whole buffer; false on error.
bool send_all(int fd, std::string_view data);

}  // namespace emoc::net
