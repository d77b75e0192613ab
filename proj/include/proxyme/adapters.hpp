#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proxyme/latency.hpp"
#include "proxyme/types.hpp"

namespace proxyme {

/// Either a finished transcript passed straight through, or audio bytes.
struct SttInput {
  std::optional<std::string> text;
  std::optional<std::vector<std::uint8_t>> audio;

  static SttInput passthrough(std::string t) { return {std::move(t), std::nullopt}; }
  static SttInput from_audio(std::vector<std::uint8_t> a) {
    return {std::nullopt, std::move(a)};
  }
};

struct TranscriptResult {
  std::string text;
  Millis stage_latency_ms = 0;
};

struct ModifiedResult {
  std::string text;
  Millis stage_latency_ms = 0;
};

struct SynthesisRequest {
  std::string text;
  VoiceMode voice = VoiceMode::Cloned;
  std::optional<std::string> voice_sample_ref;
  bool streaming = false;
  Millis chunk_ms = 1000;
  std::string stream_id;
};

struct SynthesisTiming {
  Millis first_chunk_ms = 0;
  Millis total_ms = 0;
};

struct SynthesisResult {
  std::vector<AudioChunk> chunks;
  /// Offset from stage start at which each chunk became available.
  std::vector<Millis> produced_at_ms;
  SynthesisTiming timing;
};

class SttAdapter {
 public:
  virtual ~SttAdapter() = default;
  virtual TranscriptResult transcribe(const SttInput& input) = 0;
};

class ContentModifier {
 public:
  virtual ~ContentModifier() = default;
  virtual ModifiedResult modify(std::string_view text, ContentMode mode,
                                std::string_view prompt_template) = 0;
};

class TtsAdapter {
 public:
  virtual ~TtsAdapter() = default;
  virtual SynthesisResult synthesize(const SynthesisRequest& request) = 0;
};

/// The three stage backends a mediation run needs.
struct AdapterSet {
  std::shared_ptr<SttAdapter> stt;
  std::shared_ptr<ContentModifier> modifier;
  std::shared_ptr<TtsAdapter> tts;
};

// --- audio stubs -----------------------------------------------------------

/// An audio payload that carries its own transcript, for desk-scale runs.
std::vector<std::uint8_t> make_audio_stub(std::string_view transcript);
/// Throws MalformedAudioStub if the bytes are not a stub with a transcript.
std::string read_audio_stub(const std::vector<std::uint8_t>& bytes);

// --- mocks -----------------------------------------------------------------

inline constexpr int kDefaultWordsPerMinute = 150;

/// Whole seconds of speech for `text` at `wpm`, in ms: ceil(words*60/wpm)*1000.
Millis speech_duration_ms(std::string_view text, int wpm = kDefaultWordsPerMinute);

/// Deterministic PCM for a span of text in a voice; voices never collide.
std::vector<std::uint8_t> render_pcm(std::string_view text, VoiceMode voice,
                                     Millis duration_ms);

class MockStt final : public SttAdapter {
 public:
  explicit MockStt(std::shared_ptr<LatencySampler> latency)
      : latency_(std::move(latency)) {}
  TranscriptResult transcribe(const SttInput& input) override;

 private:
  std::shared_ptr<LatencySampler> latency_;
};

class MockModifier final : public ContentModifier {
 public:
  explicit MockModifier(std::shared_ptr<LatencySampler> latency)
      : latency_(std::move(latency)) {}
  ModifiedResult modify(std::string_view text, ContentMode mode,
                        std::string_view prompt_template) override;

 private:
  std::shared_ptr<LatencySampler> latency_;
};

class MockTts final : public TtsAdapter {
 public:
  explicit MockTts(std::shared_ptr<LatencySampler> latency,
                   int words_per_minute = kDefaultWordsPerMinute)
      : latency_(std::move(latency)), wpm_(words_per_minute) {}
  SynthesisResult synthesize(const SynthesisRequest& request) override;

 private:
  std::shared_ptr<LatencySampler> latency_;
  int wpm_;
};

/// Mock STT/modifier/TTS sharing one seeded latency stream.
AdapterSet make_mock_adapters(const LatencyProfile& profile, std::uint64_t seed,
                              int words_per_minute = kDefaultWordsPerMinute);

}  // namespace proxyme
