#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proxyme/errors.hpp"

namespace proxyme {

/// Session-local monotonic milliseconds.
using Millis = std::int64_t;

enum class SpeakerOrigin { Participant, AvatarExtension, Agent };

enum class VoiceMode { Cloned, Robotic };

enum class ContentMode { Repetition, Enhancement, CounteredConclusion };

enum class AutonomyLevel { PreviewBeforeSpeak, AutoSpeak };

inline constexpr std::array<VoiceMode, 2> kVoiceModes{VoiceMode::Cloned,
                                                      VoiceMode::Robotic};
inline constexpr std::array<ContentMode, 3> kContentModes{
    ContentMode::Repetition, ContentMode::Enhancement,
    ContentMode::CounteredConclusion};

struct Condition {
  VoiceMode voice = VoiceMode::Cloned;
  ContentMode content = ContentMode::Repetition;

  friend bool operator==(const Condition&, const Condition&) = default;
};

/// Position of a condition in the canonical voice-major order, 0..5.
constexpr int condition_index(const Condition& c) {
  return static_cast<int>(c.voice) * 3 + static_cast<int>(c.content);
}

struct Utterance {
  std::string utterance_id;
  std::string session_id;
  SpeakerOrigin origin = SpeakerOrigin::Participant;
  std::string text;
  std::optional<std::string> audio_ref;
  Millis created_at = 0;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

/// 16-bit signed little-endian PCM, 16 kHz, mono.
inline constexpr int kSampleRateHz = 16000;
inline constexpr int kBytesPerMs = kSampleRateHz / 1000 * 2;

struct AudioChunk {
  std::string stream_id;
  std::int64_t seq = 0;
  std::vector<std::uint8_t> payload;
  Millis duration_ms = 0;
  bool is_final = false;

  friend bool operator==(const AudioChunk&, const AudioChunk&) = default;
};

struct LatencyTrace {
  Millis stt_ms = 0;
  Millis llm_ms = 0;
  Millis tts_first_chunk_ms = 0;
  Millis tts_total_ms = 0;
  Millis end_to_end_ms = 0;
  Millis time_to_first_audio_ms = 0;

  friend bool operator==(const LatencyTrace&, const LatencyTrace&) = default;
};

/// Builds a trace whose derived fields follow from sequential stages.
inline LatencyTrace make_trace(Millis stt, Millis llm, Millis tts_first,
                               Millis tts_total) {
  return LatencyTrace{stt,       llm, tts_first, tts_total,
                      stt + llm + tts_total, stt + llm + tts_first};
}

/// True iff the additivity and ordering invariants hold.
inline bool trace_is_consistent(const LatencyTrace& t) {
  return t.stt_ms >= 0 && t.llm_ms >= 0 && t.tts_first_chunk_ms >= 0 &&
         t.tts_total_ms >= 0 &&
         t.end_to_end_ms == t.stt_ms + t.llm_ms + t.tts_total_ms &&
         t.time_to_first_audio_ms ==
             t.stt_ms + t.llm_ms + t.tts_first_chunk_ms &&
         t.time_to_first_audio_ms <= t.end_to_end_ms;
}

std::string_view to_string(SpeakerOrigin v);
std::string_view to_string(VoiceMode v);
std::string_view to_string(ContentMode v);
std::string_view to_string(AutonomyLevel v);
std::string_view to_string(StageKind v);
std::string to_string(const Condition& c);

// Parsers throw ParseError on unknown names (UnknownMode for ContentMode).
SpeakerOrigin parse_speaker_origin(std::string_view s);
VoiceMode parse_voice_mode(std::string_view s);
ContentMode parse_content_mode(std::string_view s);
AutonomyLevel parse_autonomy(std::string_view s);
StageKind parse_stage_kind(std::string_view s);

}  // namespace proxyme
