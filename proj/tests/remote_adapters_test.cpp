#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <thread>

#include "proxyme/errors.hpp"
#include "proxyme/pipeline.hpp"
#include "proxyme/remote_adapters.hpp"
#include "proxyme/util.hpp"

using namespace proxyme;
using nlohmann::json;

namespace {

/// A local HTTP server standing in for the three model services.
class EchoFixture {
 public:
  EchoFixture() {
    server_.Post("/v1/transcribe", [](const httplib::Request& req, httplib::Response& res) {
      const json in = json::parse(req.body);
      std::string text = in.contains("text") ? in["text"].get<std::string>() : "from audio";
      res.set_content(json{{"text", text}}.dump(), "application/json");
    });
    server_.Post("/v1/modify", [](const httplib::Request& req, httplib::Response& res) {
      const json in = json::parse(req.body);
      res.set_content(json{{"text", in["mode"].get<std::string>() + ": " + in["text"].get<std::string>()}}.dump(),
                      "application/json");
    });
    server_.Post("/v1/synthesize", [](const httplib::Request& req, httplib::Response& res) {
      const json in = json::parse(req.body);
      const int n = in["streaming"].get<bool>() ? 3 : 1;
      std::string body;
      for (int k = 0; k < n; ++k) {
        const std::vector<std::uint8_t> pcm(64, static_cast<std::uint8_t>(k));
        body += json{{"seq", k}, {"pcm_b64", base64_encode(pcm)}, {"duration_ms", 2},
                     {"is_final", k + 1 == n}}
                    .dump() +
                "\n";
      }
      res.set_content(body, "application/x-ndjson");
    });
    server_.Post("/missing", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"transcript":"wrong field"})", "application/json");
    });
    server_.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json", "text/plain");
    });
    server_.Post("/down", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    server_.Post("/bad-request", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
    server_.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(400));
      res.set_content(R"({"text":"late"})", "application/json");
    });
    server_.Post("/count", [this](const httplib::Request&, httplib::Response& res) {
      const int now = ++in_flight_;
      int prev = peak_.load();
      while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(40));
      --in_flight_;
      res.set_content(R"({"text":"ok"})", "application/json");
    });
    server_.Post("/tts-no-final", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"seq":0,"pcm_b64":"AAA=","duration_ms":1,"is_final":false})" "\n",
                      "application/x-ndjson");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~EchoFixture() {
    server_.stop();
    thread_.join();
  }

  EndpointConfig endpoint(StageKind stage, std::string path = {}, Millis timeout_ms = 2000) const {
    return {stage, "http://127.0.0.1:" + std::to_string(port_), std::move(path), timeout_ms, 4};
  }
  int peak() const { return peak_.load(); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
};

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const StageError& e) {
    return e.code();
  }
  return "none";
}

}  // namespace

TEST_CASE("healthy endpoints return results with measured latency") {
  EchoFixture fx;
  RemoteStt stt(fx.endpoint(StageKind::Stt));
  const auto t = stt.transcribe(SttInput::passthrough("hello there"));
  CHECK(t.text == "hello there");
  CHECK(t.stage_latency_ms > 0);
  CHECK(stt.transcribe(SttInput::from_audio({1, 2})).text == "from audio");

  RemoteModifier mod(fx.endpoint(StageKind::Llm));
  const auto m = mod.modify("hi", ContentMode::Enhancement, "tpl");
  CHECK(m.text == "Enhancement: hi");
  CHECK(m.stage_latency_ms > 0);

  RemoteTts tts(fx.endpoint(StageKind::Tts));
  SynthesisRequest req{"say it", VoiceMode::Cloned, std::string("clip.wav"), true, 1000, "st"};
  const auto s = tts.synthesize(req);
  REQUIRE(s.chunks.size() == 3);
  CHECK(s.chunks[2].is_final);
  CHECK(s.chunks[1].payload == std::vector<std::uint8_t>(64, 1));
  CHECK(s.chunks[0].stream_id == "st");
  CHECK(s.timing.total_ms > 0);
}

TEST_CASE("remote failures map to stage error codes") {
  EchoFixture fx;
  CHECK(code_of([&] {
          RemoteStt({StageKind::Stt, "http://127.0.0.1:1", "", 500, 1})
              .transcribe(SttInput::passthrough("x"));
        }) == "StageUnavailable");
  CHECK(code_of([&] {
          RemoteStt(fx.endpoint(StageKind::Stt, "/missing")).transcribe(SttInput::passthrough("x"));
        }) == "MalformedResponse");
  CHECK(code_of([&] {
          RemoteModifier(fx.endpoint(StageKind::Llm, "/garbage"))
              .modify("x", ContentMode::Repetition, "");
        }) == "MalformedResponse");
  CHECK(code_of([&] {
          RemoteStt(fx.endpoint(StageKind::Stt, "/down")).transcribe(SttInput::passthrough("x"));
        }) == "StageUnavailable");
  CHECK(code_of([&] {
          RemoteStt(fx.endpoint(StageKind::Stt, "/bad-request"))
              .transcribe(SttInput::passthrough("x"));
        }) == "MalformedResponse");
  CHECK(code_of([&] {
          RemoteStt(fx.endpoint(StageKind::Stt, "/slow", 100)).transcribe(SttInput::passthrough("x"));
        }) == "StageTimeout");
  CHECK(code_of([&] {
          RemoteTts(fx.endpoint(StageKind::Tts, "/tts-no-final"))
              .synthesize({"x", VoiceMode::Robotic, std::nullopt, false, 1000, "s"});
        }) == "MalformedResponse");
  try {
    RemoteStt(fx.endpoint(StageKind::Stt, "/down")).transcribe(SttInput::passthrough("x"));
  } catch (const StageError& e) {
    CHECK(e.stage() == StageKind::Stt);
  }
}

TEST_CASE("max_in_flight bounds concurrent requests") {
  EchoFixture fx;
  auto cfg = fx.endpoint(StageKind::Stt, "/count");
  cfg.max_in_flight = 2;
  RemoteStt stt(cfg);
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] { stt.transcribe(SttInput::passthrough("x")); });
  }
  for (auto& t : threads) t.join();
  CHECK(fx.peak() >= 1);
  CHECK(fx.peak() <= 2);
}

TEST_CASE("a mediation run works end to end over remote adapters") {
  EchoFixture fx;
  AdapterSet set{std::make_shared<RemoteStt>(fx.endpoint(StageKind::Stt)),
                 std::make_shared<RemoteModifier>(fx.endpoint(StageKind::Llm)),
                 std::make_shared<RemoteTts>(fx.endpoint(StageKind::Tts))};
  MediationRequest req;
  req.source_utterance = {"u1", "s", SpeakerOrigin::Participant, "I will help", std::nullopt, 0};
  req.condition = {VoiceMode::Robotic, ContentMode::CounteredConclusion};
  req.prompt_template = "tpl";
  req.streaming = true;
  const auto resp = run_mediation(req, set);
  CHECK(resp.modified_text == "CounteredConclusion: I will help");
  CHECK(resp.chunks.size() == 3);
  CHECK(trace_is_consistent(resp.trace));
  CHECK(resp.trace.stt_ms > 0);
}
