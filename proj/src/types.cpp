#include "proxyme/types.hpp"

namespace proxyme {

std::string_view to_string(SpeakerOrigin v) {
  switch (v) {
    case SpeakerOrigin::Participant:
      return "Participant";
    case SpeakerOrigin::AvatarExtension:
      return "AvatarExtension";
    case SpeakerOrigin::Agent:
      return "Agent";
  }
  return "?";
}

std::string_view to_string(VoiceMode v) {
  return v == VoiceMode::Cloned ? "Cloned" : "Robotic";
}

std::string_view to_string(ContentMode v) {
  switch (v) {
    case ContentMode::Repetition:
      return "Repetition";
    case ContentMode::Enhancement:
      return "Enhancement";
    case ContentMode::CounteredConclusion:
      return "CounteredConclusion";
  }
  return "?";
}

std::string_view to_string(AutonomyLevel v) {
  return v == AutonomyLevel::AutoSpeak ? "AutoSpeak" : "PreviewBeforeSpeak";
}

std::string_view to_string(StageKind v) {
  switch (v) {
    case StageKind::Stt:
      return "Stt";
    case StageKind::Llm:
      return "Llm";
    case StageKind::Tts:
      return "Tts";
  }
  return "?";
}

std::string to_string(const Condition& c) {
  return std::string(to_string(c.voice)) + "/" +
         std::string(to_string(c.content));
}

SpeakerOrigin parse_speaker_origin(std::string_view s) {
  if (s == "Participant") return SpeakerOrigin::Participant;
  if (s == "AvatarExtension") return SpeakerOrigin::AvatarExtension;
  if (s == "Agent") return SpeakerOrigin::Agent;
  throw ParseError("unknown speaker origin '" + std::string(s) + "'");
}

VoiceMode parse_voice_mode(std::string_view s) {
  if (s == "Cloned") return VoiceMode::Cloned;
  if (s == "Robotic") return VoiceMode::Robotic;
  throw ParseError("unknown voice mode '" + std::string(s) + "'");
}

ContentMode parse_content_mode(std::string_view s) {
  if (s == "Repetition") return ContentMode::Repetition;
  if (s == "Enhancement") return ContentMode::Enhancement;
  if (s == "CounteredConclusion") return ContentMode::CounteredConclusion;
  throw UnknownMode("unknown content mode '" + std::string(s) + "'");
}

AutonomyLevel parse_autonomy(std::string_view s) {
  if (s == "AutoSpeak") return AutonomyLevel::AutoSpeak;
  if (s == "PreviewBeforeSpeak") return AutonomyLevel::PreviewBeforeSpeak;
  throw ParseError("unknown autonomy level '" + std::string(s) + "'");
}

StageKind parse_stage_kind(std::string_view s) {
  if (s == "Stt") return StageKind::Stt;
  if (s == "Llm") return StageKind::Llm;
  if (s == "Tts") return StageKind::Tts;
  throw ParseError("unknown stage '" + std::string(s) + "'");
}

}  // namespace proxyme
