#include "proxyme/adapters.hpp"

#include <algorithm>

#include "proxyme/content.hpp"
#include "proxyme/util.hpp"

namespace proxyme {

namespace {

constexpr std::string_view kStubMagic = "PXSTUB1\n";

}  // namespace

std::vector<std::uint8_t> make_audio_stub(std::string_view transcript) {
  std::vector<std::uint8_t> out(kStubMagic.begin(), kStubMagic.end());
  out.insert(out.end(), transcript.begin(), transcript.end());
  return out;
}

std::string read_audio_stub(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kStubMagic.size() ||
      !std::equal(kStubMagic.begin(), kStubMagic.end(), bytes.begin())) {
    throw MalformedAudioStub("audio payload is not a transcript-tagged stub");
  }
  std::string text(bytes.begin() + kStubMagic.size(), bytes.end());
  if (split_words(text).empty()) {
    throw MalformedAudioStub("audio stub carries no transcript");
  }
  return text;
}

Millis speech_duration_ms(std::string_view text, int wpm) {
  const auto words = static_cast<Millis>(count_words(text));
  const Millis seconds = (words * 60 + wpm - 1) / wpm;
  return seconds * 1000;
}

std::vector<std::uint8_t> render_pcm(std::string_view text, VoiceMode voice,
                                     Millis duration_ms) {
  const std::uint64_t h =
      fnv1a64(text, voice == VoiceMode::Cloned ? 0x636c6f6eULL : 0x726f626fULL);
  const std::size_t samples = static_cast<std::size_t>(duration_ms) * kSampleRateHz / 1000;
  std::vector<std::uint8_t> pcm(samples * 2);
  // Cloned: triangle wave near speaking pitch. Robotic: flat square wave.
  const std::uint32_t period = voice == VoiceMode::Cloned
                                   ? 70 + static_cast<std::uint32_t>(h % 60)
                                   : 80;
  const std::int32_t amplitude = 4000 + static_cast<std::int32_t>((h >> 8) % 2000);
  for (std::size_t i = 0; i < samples; ++i) {
    const std::uint32_t phase = static_cast<std::uint32_t>((i + (h >> 20)) % period);
    std::int32_t v;
    if (voice == VoiceMode::Cloned) {
      const std::int32_t half = static_cast<std::int32_t>(period / 2);
      const std::int32_t p = static_cast<std::int32_t>(phase);
      v = (p < half ? p : period - p) * 2 * amplitude / half - amplitude;
    } else {
      v = phase < period / 2 ? amplitude : -amplitude;
    }
    const auto s = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
    pcm[2 * i] = static_cast<std::uint8_t>(s & 0xff);
    pcm[2 * i + 1] = static_cast<std::uint8_t>(s >> 8);
  }
  return pcm;
}

TranscriptResult MockStt::transcribe(const SttInput& input) {
  std::string text;
  if (input.text) {
    text = *input.text;
  } else if (input.audio) {
    text = read_audio_stub(*input.audio);
  } else {
    throw MalformedAudioStub("transcription input carries neither text nor audio");
  }
  if (text.empty()) throw EmptyText("nothing to transcribe");
  return {std::move(text), latency_->stt()};
}

ModifiedResult MockModifier::modify(std::string_view text, ContentMode mode,
                                    std::string_view /*prompt_template*/) {
  if (text.empty()) throw EmptyText("nothing to modify");
  std::string out = apply_content_mode(text, mode);
  return {std::move(out), latency_->llm()};
}

SynthesisResult MockTts::synthesize(const SynthesisRequest& request) {
  if (split_words(request.text).empty()) throw EmptyText("nothing to synthesize");
  if (request.streaming && request.chunk_ms <= 0) {
    throw ValidationError("chunk_ms must be > 0 when streaming");
  }
  const Millis duration = speech_duration_ms(request.text, wpm_);
  const std::vector<std::string> words = split_words(request.text);

  SynthesisResult result;
  const Millis n = request.streaming ? (duration + request.chunk_ms - 1) / request.chunk_ms : 1;
  const Millis total = latency_->tts_total();
  const Millis first = request.streaming ? latency_->tts_first_chunk() : total;
  result.timing.first_chunk_ms = first;
  result.timing.total_ms = request.streaming ? first + (n - 1) * request.chunk_ms : total;

  const auto word_count = static_cast<Millis>(words.size());
  for (Millis k = 0; k < n; ++k) {
    std::string slice;
    for (Millis w = k * word_count / n; w < (k + 1) * word_count / n; ++w) {
      if (!slice.empty()) slice += ' ';
      slice += words[static_cast<std::size_t>(w)];
    }
    AudioChunk chunk;
    chunk.stream_id = request.stream_id;
    chunk.seq = k;
    chunk.duration_ms = request.streaming
                            ? std::min(request.chunk_ms, duration - k * request.chunk_ms)
                            : duration;
    chunk.is_final = k + 1 == n;
    chunk.payload = render_pcm(slice + "#" + std::to_string(k), request.voice,
                               chunk.duration_ms);
    result.chunks.push_back(std::move(chunk));
    result.produced_at_ms.push_back(first + k * (request.streaming ? request.chunk_ms : 0));
  }
  return result;
}

AdapterSet make_mock_adapters(const LatencyProfile& profile, std::uint64_t seed,
                              int words_per_minute) {
  auto sampler = std::make_shared<LatencySampler>(profile, seed);
  return {std::make_shared<MockStt>(sampler), std::make_shared<MockModifier>(sampler),
          std::make_shared<MockTts>(sampler, words_per_minute)};
}

}  // namespace proxyme
