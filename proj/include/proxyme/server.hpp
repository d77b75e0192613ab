#pragma once

#include <memory>
#include <string>

#include "proxyme/gateway.hpp"

namespace proxyme {

/// WebSocket transport for a Gateway, plus a plain HTTP GET /health probe on
/// the same port. One I/O thread handles sockets; a pump thread advances
/// sessions every tick.
class Server {
 public:
  Server(Gateway& gateway, std::string host, int port, Millis tick_ms = 10);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving. Port 0 picks a free port. Returns the bound
  /// port; throws BindError when the address is unavailable.
  int start();
  void stop();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace proxyme
