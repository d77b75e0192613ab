#include "proxyme/remote_adapters.hpp"

#include <httplib.h>

#include <chrono>
#include <json.hpp>
#include <sstream>

#include "proxyme/util.hpp"

namespace proxyme {

using nlohmann::json;

namespace {

struct SlotGuard {
  std::counting_semaphore<1024>& sem;
  explicit SlotGuard(std::counting_semaphore<1024>& s) : sem(s) { sem.acquire(); }
  ~SlotGuard() { sem.release(); }
};

std::string stage_name(StageKind s) { return std::string(to_string(s)); }

[[noreturn]] void malformed(StageKind stage, const std::string& why) {
  throw StageError("MalformedResponse", stage, stage_name(stage) + ": " + why);
}

json parse_object(StageKind stage, std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) malformed(stage, "response is not a JSON object");
  return j;
}

std::string text_field(StageKind stage, const json& j) {
  auto it = j.find("text");
  if (it == j.end() || !it->is_string()) malformed(stage, "response missing 'text'");
  std::string text = it->get<std::string>();
  if (text.empty()) malformed(stage, "response 'text' is empty");
  return text;
}

}  // namespace

std::string default_path(StageKind stage) {
  switch (stage) {
    case StageKind::Stt:
      return "/v1/transcribe";
    case StageKind::Llm:
      return "/v1/modify";
    case StageKind::Tts:
      return "/v1/synthesize";
  }
  return "/";
}

RemoteEndpoint::RemoteEndpoint(EndpointConfig config)
    : config_(std::move(config)), slots_(std::max(1, config_.max_in_flight)) {
  if (config_.path.empty()) config_.path = default_path(config_.stage);
}

RemoteEndpoint::Reply RemoteEndpoint::post(const std::string& json_body) {
  SlotGuard slot(slots_);
  const auto start = std::chrono::steady_clock::now();

  httplib::Client client(config_.base_url);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  auto res = client.Post(config_.path, json_body, "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - start;
  const Millis elapsed_ms =
      (std::chrono::duration_cast<std::chrono::microseconds>(elapsed).count() + 999) / 1000;
  const StageKind stage = config_.stage;

  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout || elapsed_ms >= config_.timeout_ms) {
      throw StageError("StageTimeout", stage,
                       stage_name(stage) + " exceeded " +
                           std::to_string(config_.timeout_ms) + " ms");
    }
    throw StageError("StageUnavailable", stage,
                     stage_name(stage) + " unreachable at " + config_.base_url + ": " +
                         httplib::to_string(err));
  }
  if (res->status >= 500) {
    throw StageError("StageUnavailable", stage,
                     stage_name(stage) + " returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    malformed(stage, "unexpected HTTP " + std::to_string(res->status));
  }
  return {res->body, std::max<Millis>(1, elapsed_ms)};
}

RemoteStt::RemoteStt(EndpointConfig config) : endpoint_(std::move(config)) {}

TranscriptResult RemoteStt::transcribe(const SttInput& input) {
  json req = json::object();
  if (input.text) req["text"] = *input.text;
  if (input.audio) req["audio_b64"] = base64_encode(*input.audio);
  auto reply = endpoint_.post(req.dump());
  return {text_field(StageKind::Stt, parse_object(StageKind::Stt, reply.body)),
          reply.elapsed_ms};
}

RemoteModifier::RemoteModifier(EndpointConfig config) : endpoint_(std::move(config)) {}

ModifiedResult RemoteModifier::modify(std::string_view text, ContentMode mode,
                                      std::string_view prompt_template) {
  json req = {{"text", text}, {"mode", to_string(mode)}, {"template", prompt_template}};
  auto reply = endpoint_.post(req.dump());
  return {text_field(StageKind::Llm, parse_object(StageKind::Llm, reply.body)),
          reply.elapsed_ms};
}

RemoteTts::RemoteTts(EndpointConfig config) : endpoint_(std::move(config)) {}

SynthesisResult RemoteTts::synthesize(const SynthesisRequest& request) {
  if (request.text.empty()) throw EmptyText("nothing to synthesize");
  json req = {{"text", request.text},
              {"voice", to_string(request.voice)},
              {"streaming", request.streaming},
              {"chunk_ms", request.chunk_ms}};
  if (request.voice_sample_ref) req["voice_sample_ref"] = *request.voice_sample_ref;
  auto reply = endpoint_.post(req.dump());

  SynthesisResult result;
  std::istringstream lines(reply.body);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = parse_object(StageKind::Tts, line);
    AudioChunk chunk;
    chunk.stream_id = request.stream_id;
    try {
      chunk.seq = j.at("seq").get<std::int64_t>();
      chunk.duration_ms = j.at("duration_ms").get<Millis>();
      chunk.is_final = j.at("is_final").get<bool>();
      chunk.payload = base64_decode(j.at("pcm_b64").get<std::string>());
    } catch (const std::exception& e) {
      malformed(StageKind::Tts, std::string("bad chunk: ") + e.what());
    }
    if (chunk.seq != static_cast<std::int64_t>(result.chunks.size()) ||
        chunk.duration_ms <= 0) {
      malformed(StageKind::Tts, "chunk sequence or duration invalid");
    }
    result.chunks.push_back(std::move(chunk));
    result.produced_at_ms.push_back(reply.elapsed_ms);
  }
  if (result.chunks.empty() || !result.chunks.back().is_final) {
    malformed(StageKind::Tts, "stream ended without a final chunk");
  }
  for (std::size_t i = 0; i + 1 < result.chunks.size(); ++i) {
    if (result.chunks[i].is_final) malformed(StageKind::Tts, "final flag before last chunk");
  }
  result.timing = {reply.elapsed_ms, reply.elapsed_ms};
  return result;
}

}  // namespace proxyme
