#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <list>
#include <mutex>
#include <string>
#include <thread>

#include "dsm/connectors.hpp"
#include "dsm/service.hpp"

namespace dsm {

// Glucometer line protocol over plain TCP. Each connection is one
// glucometer_session; accepted readings go through app::add_reading.
class device_listener {
 public:
  explicit device_listener(app& a) : app_(a) {}
  device_listener(const device_listener&) = delete;
  device_listener& operator=(const device_listener&) = delete;
  ~device_listener() { stop(); }

  // Port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw error(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) throw validation_error("bad listen address " + host);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 16) != 0) {
      auto msg = std::string(std::strerror(errno));
      ::close(fd_);
      fd_ = -1;
      throw error("cannot listen on " + host + ":" + std::to_string(port) + ": " + msg);
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
    return ntohs(addr.sin_port);
  }

  void stop() {
    if (!running_.exchange(false)) return;
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    if (acceptor_.joinable()) acceptor_.join();
    {
      std::lock_guard lock(mu_);
      for (auto& c : conns_)
        if (c.fd >= 0) ::shutdown(c.fd, SHUT_RDWR);
    }
    for (auto& c : conns_)
      if (c.worker.joinable()) c.worker.join();
    conns_.clear();
  }

 private:
  struct connection {
    int fd = -1;
    std::thread worker;
  };

  void accept_loop() {
    while (running_) {
      int c = ::accept(fd_, nullptr, nullptr);
      if (c < 0) {
        if (!running_) return;
        continue;
      }
      std::lock_guard lock(mu_);
      auto& conn = conns_.emplace_back();
      conn.fd = c;
      conn.worker = std::thread([this, c] { serve(c); });
    }
  }

  void serve(int fd) {
    glucometer_session session(
        [this](std::string_view token) -> std::optional<user_id> {
          try {
            return app_.authenticate(std::string(token));
          } catch (const unauthorized&) {
            return std::nullopt;
          }
        },
        [this](const glucose_reading& r) { app_.add_reading(r.user, r.value_mg_dl, r.context, r.taken_at); });
    std::string buf;
    char chunk[512];
    for (;;) {
      auto n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n <= 0) break;
      buf.append(chunk, static_cast<std::size_t>(n));
      std::size_t pos;
      while ((pos = buf.find('\n')) != std::string::npos) {
        auto line = buf.substr(0, pos);
        buf.erase(0, pos + 1);
        if (detail::trim(line).empty()) continue;
        std::string reply(session.handle_line(line));
        reply += '\n';
        ::send(fd, reply.data(), reply.size(), MSG_NOSIGNAL);
      }
    }
    std::lock_guard lock(mu_);
    for (auto& c : conns_)
      if (c.fd == fd) c.fd = -1;
    ::close(fd);
  }

  app& app_;
  int fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::list<connection> conns_;
};

}  // namespace dsm
