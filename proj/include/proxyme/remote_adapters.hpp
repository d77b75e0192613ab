#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include "proxyme/adapters.hpp"

namespace proxyme {

/// Where one stage's service lives. base_url is "http://host:port".
struct EndpointConfig {
  StageKind stage = StageKind::Stt;
  std::string base_url;
  std::string path;  // empty: the stage's default path
  Millis timeout_ms = 30000;
  int max_in_flight = 4;
};

std::string default_path(StageKind stage);

/// One HTTP endpoint with a bound on concurrent in-flight requests; callers
/// beyond the bound wait for a slot.
class RemoteEndpoint {
 public:
  explicit RemoteEndpoint(EndpointConfig config);

  struct Reply {
    std::string body;
    Millis elapsed_ms = 0;
  };

  /// POSTs a JSON body. Throws StageError with code StageTimeout,
  /// StageUnavailable or MalformedResponse.
  Reply post(const std::string& json_body);

  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
  std::counting_semaphore<1024> slots_;
};

/// Request: {"text"} or {"audio_b64"}. Response: {"text"}.
class RemoteStt final : public SttAdapter {
 public:
  explicit RemoteStt(EndpointConfig config);
  TranscriptResult transcribe(const SttInput& input) override;

 private:
  RemoteEndpoint endpoint_;
};

/// Request: {"text","mode","template"}. Response: {"text"}.
class RemoteModifier final : public ContentModifier {
 public:
  explicit RemoteModifier(EndpointConfig config);
  ModifiedResult modify(std::string_view text, ContentMode mode,
                        std::string_view prompt_template) override;

 private:
  RemoteEndpoint endpoint_;
};

/// Request: {"text","voice","voice_sample_ref"?,"streaming","chunk_ms"}.
/// Response: newline-delimited {"seq","pcm_b64","duration_ms","is_final"}.
class RemoteTts final : public TtsAdapter {
 public:
  explicit RemoteTts(EndpointConfig config);
  SynthesisResult synthesize(const SynthesisRequest& request) override;

 private:
  RemoteEndpoint endpoint_;
};

}  // namespace proxyme
