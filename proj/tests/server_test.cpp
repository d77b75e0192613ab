#include <doctest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>
#include <thread>

#include "helpers.hpp"
#include "proxyme/adapters.hpp"
#include "proxyme/errors.hpp"
#include "proxyme/server.hpp"

using namespace proxyme;
using namespace proxyme::protocol;
namespace beast = boost::beast;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

namespace {

LatencyProfile quick_profile() {
  LatencyProfile p;
  p.stt_ms = Distribution::fixed(20);
  p.llm_ms = Distribution::fixed(30);
  p.tts_total_ms = Distribution::fixed(40);
  p.tts_first_chunk_ms = Distribution::fixed(10);
  return p;
}

struct Live {
  SteadyClock clock;
  ProvenanceLedger ledger;
  Gateway gw;
  Server server;
  int port = 0;

  Live()
      : gw(
            [] {
              GatewayConfig c;
              c.words_per_minute = 6000;
              return c;
            }(),
            test::make_pool(), std::nullopt,
            [](int p) { return make_mock_adapters(quick_profile(), static_cast<std::uint64_t>(p), 6000); },
            clock, ledger),
        server(gw, "127.0.0.1", 0, 5) {
    port = server.start();
  }
  ~Live() { server.stop(); }
};

struct WsClient {
  asio::io_context io;
  beast::websocket::stream<tcp::socket> ws{io};
  std::int64_t seq = 0;

  explicit WsClient(int port) {
    tcp::resolver resolver(io);
    asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("127.0.0.1", "/");
  }

  void send(const Payload& p, const std::string& sid = "") {
    ws.text(true);
    ws.write(asio::buffer(encode(Envelope{sid, seq++, p})));
  }

  void send_raw(const std::string& frame) { ws.write(asio::buffer(frame)); }

  Envelope next() {
    beast::flat_buffer buf;
    ws.read(buf);
    return decode(beast::buffers_to_string(buf.data()));
  }

  /// Reads until a message of type T arrives; returns everything read.
  template <class T>
  std::vector<Envelope> until() {
    std::vector<Envelope> seen;
    for (int i = 0; i < 200; ++i) {
      seen.push_back(next());
      if (std::holds_alternative<T>(seen.back().payload)) return seen;
    }
    FAIL("message never arrived");
    return seen;
  }
};

std::string http_get(int port, const std::string& target) {
  asio::io_context io;
  tcp::socket sock(io);
  tcp::resolver resolver(io);
  asio::connect(sock, resolver.resolve("127.0.0.1", std::to_string(port)));
  beast::http::request<beast::http::empty_body> req{beast::http::verb::get, target, 11};
  req.set(beast::http::field::host, "127.0.0.1");
  beast::http::write(sock, req);
  beast::flat_buffer buf;
  beast::http::response<beast::http::string_body> res;
  beast::http::read(sock, buf, res);
  return std::to_string(res.result_int()) + " " + res.body();
}

}  // namespace

TEST_CASE("health probe and unknown paths") {
  Live live;
  CHECK(live.port > 0);
  const std::string health = http_get(live.port, "/health");
  REQUIRE(health.rfind("200 ", 0) == 0);
  const auto body = nlohmann::json::parse(health.substr(4));
  CHECK(body["status"] == "ok");
  CHECK(body["sessions"] == 0);
  CHECK(http_get(live.port, "/nope").rfind("404", 0) == 0);
}

TEST_CASE("a websocket participant and operator run one trial") {
  Live live;
  WsClient participant(live.port);
  participant.send(JoinSession{Role::Participant, 0});
  const Envelope assign = participant.next();
  REQUIRE(std::holds_alternative<AssignCondition>(assign.payload));
  CHECK(assign.session_id == "session-p000");
  CHECK(assign.seq == 0);
  CHECK(std::holds_alternative<AgentPrompt>(participant.next().payload));

  WsClient op(live.port);
  op.send(JoinSession{Role::Operator, std::nullopt}, "session-p000");
  CHECK(std::holds_alternative<AssignCondition>(op.next().payload));

  participant.send(Control{ControlAction::Pause, std::nullopt});
  const auto refused = participant.until<ProtocolError>();
  CHECK(std::get<ProtocolError>(refused.back().payload).code == "UnauthorizedRole");

  participant.send_raw("garbage");
  CHECK(std::get<ProtocolError>(participant.until<ProtocolError>().back().payload).code == "Malformed");

  // wait out the one-second opening prompt, then answer
  for (int i = 0; i < 400 && live.gw.session_state("session-p000")->phase != Phase::ListeningInitial; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  REQUIRE(live.gw.session_state("session-p000")->phase == Phase::ListeningInitial);
  participant.send(UserUtterance{std::string("I would give it back"), std::nullopt, true});

  std::vector<Envelope> got;
  for (int i = 0; i < 200; ++i) {
    got.push_back(participant.next());
    if (const auto* c = std::get_if<AudioChunkMsg>(&got.back().payload); c && c->is_final) break;
  }
  REQUIRE(std::holds_alternative<AudioChunkMsg>(got.back().payload));
  std::int64_t expect = got.front().seq;
  for (const auto& e : got) CHECK(e.seq == expect++);

  const auto op_msgs = op.until<LatencyReport>();
  const auto& trace = std::get<LatencyReport>(op_msgs.back().payload).trace;
  CHECK(trace.end_to_end_ms == 90);

  const std::string health = http_get(live.port, "/health");
  CHECK(nlohmann::json::parse(health.substr(4))["sessions"] == 1);
}

TEST_CASE("binding a taken port fails") {
  Live live;
  ProvenanceLedger ledger;
  SteadyClock clock;
  Gateway gw({}, test::make_pool(), std::nullopt,
             [](int p) { return make_mock_adapters({}, static_cast<std::uint64_t>(p)); }, clock, ledger);
  Server second(gw, "127.0.0.1", live.port);
  CHECK_THROWS_AS(second.start(), BindError);
}
