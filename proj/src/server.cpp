#include "proxyme/server.hpp"

#include <atomic>
#include <deque>
#include <map>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace proxyme {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

class WsSession;

struct Server::Impl {
  Impl(Gateway& g, std::string h, int p, Millis t) : gateway(g), host(std::move(h)), port(p), tick_ms(t) {}

  Gateway& gateway;
  std::string host;
  int port;
  Millis tick_ms;

  net::io_context ioc{1};
  std::optional<tcp::acceptor> acceptor;
  std::map<ConnectionId, std::weak_ptr<WsSession>> sockets;  // io thread only
  std::thread io_thread;
  std::thread pump_thread;
  std::atomic<bool> running{false};

  void accept();
  void deliver(std::vector<Outbound> out);
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, Server::Impl& server)
      : ws_(std::move(socket)), server_(server), id_(server.gateway.connect()) {}

  ConnectionId id() const { return id_; }

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->close();
      self->server_.sockets[self->id_] = self;
      self->read();
    });
  }

  /// Writes envelopes in seq order even when handler and pump output race.
  void enqueue(const protocol::Envelope& env) {
    pending_.emplace(env.seq, protocol::encode(env));
    while (!pending_.empty() && pending_.begin()->first == next_seq_) {
      queue_.push_back(std::move(pending_.begin()->second));
      pending_.erase(pending_.begin());
      ++next_seq_;
    }
    if (!writing_ && !queue_.empty()) write();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      std::string frame = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->server_.deliver(self->server_.gateway.handle_frame(self->id_, frame));
      self->read();
    });
  }

  void write() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return self->close();
                      self->queue_.pop_front();
                      if (self->queue_.empty()) {
                        self->writing_ = false;
                      } else {
                        self->write();
                      }
                    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    server_.sockets.erase(id_);
    server_.gateway.disconnect(id_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  Server::Impl& server_;
  ConnectionId id_;
  std::map<std::int64_t, std::string> pending_;
  std::int64_t next_seq_ = 0;
  std::deque<std::string> queue_;
  bool writing_ = false;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, Server::Impl& server)
      : stream_(std::move(socket)), server_(server) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (!ec) self->dispatch();
                     });
  }

 private:
  void dispatch() {
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), server_)->run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    res->set(http::field::content_type, "application/json");
    if (req_.method() == http::verb::get && req_.target() == "/health") {
      res->result(http::status::ok);
      res->body() = "{\"status\":\"ok\",\"sessions\":" +
                    std::to_string(server_.gateway.session_ids().size()) + "}";
    } else {
      res->result(http::status::not_found);
      res->body() = "{\"error\":\"not found\"}";
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Server::Impl& server_;
};

void Server::Impl::accept() {
  acceptor->async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<HttpSession>(std::move(socket), *this)->run();
    accept();
  });
}

void Server::Impl::deliver(std::vector<Outbound> out) {
  if (out.empty()) return;
  net::post(ioc, [this, out = std::move(out)] {
    for (const auto& ob : out) {
      auto it = sockets.find(ob.to);
      if (it == sockets.end()) continue;
      if (auto s = it->second.lock()) s->enqueue(ob.envelope);
    }
  });
}

Server::Server(Gateway& gateway, std::string host, int port, Millis tick_ms)
    : impl_(std::make_unique<Impl>(gateway, std::move(host), port, tick_ms)) {}

Server::~Server() { stop(); }

int Server::start() {
  Impl& s = *impl_;
  beast::error_code ec;
  const auto address = net::ip::make_address(s.host, ec);
  if (ec) throw BindError("invalid host '" + s.host + "': " + ec.message());
  const tcp::endpoint endpoint(address, static_cast<unsigned short>(s.port));
  s.acceptor.emplace(s.ioc);
  s.acceptor->open(endpoint.protocol(), ec);
  if (!ec) s.acceptor->set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) s.acceptor->bind(endpoint, ec);
  if (!ec) s.acceptor->listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    s.acceptor.reset();
    throw BindError(s.host + ":" + std::to_string(s.port) + ": " + ec.message());
  }
  const int bound = s.acceptor->local_endpoint().port();
  s.running = true;
  s.accept();
  s.io_thread = std::thread([&s] { s.ioc.run(); });
  s.pump_thread = std::thread([&s] {
    while (s.running) {
      s.deliver(s.gateway.pump());
      std::this_thread::sleep_for(std::chrono::milliseconds(s.tick_ms));
    }
  });
  return bound;
}

void Server::stop() {
  Impl& s = *impl_;
  if (!s.running.exchange(false)) return;
  if (s.pump_thread.joinable()) s.pump_thread.join();
  s.ioc.stop();
  if (s.io_thread.joinable()) s.io_thread.join();
}

}  // namespace proxyme
