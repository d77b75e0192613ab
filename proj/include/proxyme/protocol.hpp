#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "proxyme/experiment.hpp"
#include "proxyme/provenance.hpp"
#include "proxyme/types.hpp"

namespace proxyme::protocol {

enum class Role { Participant, Operator, Observer };
enum class StageState { Started, Finished };
enum class ControlAction { Pause, Resume, Restart, SetAutonomy };

std::string_view to_string(Role r);
std::string_view to_string(StageState s);
std::string_view to_string(ControlAction a);

struct JoinSession {
  Role role = Role::Participant;
  std::optional<int> participant_index;
  friend bool operator==(const JoinSession&, const JoinSession&) = default;
};

/// server -> client
struct AssignCondition {
  int trial_index = 0;
  Condition condition;
  friend bool operator==(const AssignCondition&, const AssignCondition&) = default;
};

/// server -> client
struct AgentPrompt {
  std::string scenario_id;
  std::string text;
  std::optional<std::string> audio_ref;
  friend bool operator==(const AgentPrompt&, const AgentPrompt&) = default;
};

/// Carries text, audio, or both.
struct UserUtterance {
  std::optional<std::string> text;
  std::optional<std::string> audio_b64;
  bool is_final = false;
  friend bool operator==(const UserUtterance&, const UserUtterance&) = default;
};

/// server -> client
struct MediationStatus {
  StageKind stage = StageKind::Stt;
  StageState state = StageState::Started;
  Millis elapsed_ms = 0;
  friend bool operator==(const MediationStatus&, const MediationStatus&) = default;
};

/// server -> participant
struct AudioChunkMsg {
  std::string stream_id;
  std::int64_t seq = 0;
  std::string pcm_b64;
  Millis duration_ms = 0;
  bool is_final = false;
  friend bool operator==(const AudioChunkMsg&, const AudioChunkMsg&) = default;
};

/// operator -> server
struct Control {
  ControlAction action = ControlAction::Pause;
  std::optional<AutonomyLevel> autonomy;
  friend bool operator==(const Control&, const Control&) = default;
};

/// operator -> server
struct ReleasePreview {
  std::string stream_id;
  friend bool operator==(const ReleasePreview&, const ReleasePreview&) = default;
};

/// participant -> server
struct SelfReportSubmit {
  std::vector<SelfReportItem> items;
  std::optional<std::string> free_text;
  friend bool operator==(const SelfReportSubmit&, const SelfReportSubmit&) = default;
};

/// server -> client
struct LatencyReport {
  LatencyTrace trace;
  Millis masking_window_ms = 0;
  Millis perceived_gap_ms = 0;
  friend bool operator==(const LatencyReport&, const LatencyReport&) = default;
};

/// server -> client
struct ProtocolError {
  std::string code;
  std::string detail;
  std::optional<std::int64_t> offending_seq;
  friend bool operator==(const ProtocolError&, const ProtocolError&) = default;
};

/// server -> operator/observer: the mediated text of a run with its
/// provenance, shown for preview before release when autonomy requires it.
struct MediatedText {
  std::string stream_id;
  std::string source_text;
  std::string text;
  std::string provenance_id;
  EditScript edit_script;
  bool preview = false;
  friend bool operator==(const MediatedText&, const MediatedText&) = default;
};

using Payload = std::variant<JoinSession, AssignCondition, AgentPrompt, UserUtterance,
                             MediationStatus, AudioChunkMsg, Control, ReleasePreview,
                             SelfReportSubmit, LatencyReport, ProtocolError, MediatedText>;

struct Envelope {
  std::string session_id;
  std::int64_t seq = 0;
  Payload payload;

  std::string_view type() const;

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

/// Every message type name, in Payload order.
const std::vector<std::string_view>& message_types();

enum class DecodeCode { UnknownType, MissingField, BadSeq, Malformed };

std::string_view to_string(DecodeCode c);

class DecodeError : public Error {
 public:
  DecodeError(DecodeCode code, const std::string& detail,
              std::optional<std::int64_t> offending_seq = std::nullopt)
      : Error(std::string(to_string(code)), detail),
        decode_code_(code),
        offending_seq_(offending_seq) {}

  DecodeCode decode_code() const { return decode_code_; }
  std::optional<std::int64_t> offending_seq() const { return offending_seq_; }

 private:
  DecodeCode decode_code_;
  std::optional<std::int64_t> offending_seq_;
};

/// One UTF-8 JSON object per frame: {"type","session_id","seq","payload"}.
/// Throws ValidationError if the envelope breaks its schema (negative seq,
/// UserUtterance without text or audio, SetAutonomy without a level).
std::string encode(const Envelope& envelope);

/// Total over arbitrary bytes: returns an envelope or throws DecodeError.
Envelope decode(std::string_view frame);

}  // namespace proxyme::protocol
