#include "proxyme/protocol.hpp"

#include <algorithm>
#include <json.hpp>

#include "proxyme/json_io.hpp"

namespace proxyme::protocol {

using nlohmann::json;

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Participant:
      return "Participant";
    case Role::Operator:
      return "Operator";
    case Role::Observer:
      return "Observer";
  }
  return "?";
}

std::string_view to_string(StageState s) {
  return s == StageState::Started ? "Started" : "Finished";
}

std::string_view to_string(ControlAction a) {
  switch (a) {
    case ControlAction::Pause:
      return "Pause";
    case ControlAction::Resume:
      return "Resume";
    case ControlAction::Restart:
      return "Restart";
    case ControlAction::SetAutonomy:
      return "SetAutonomy";
  }
  return "?";
}

std::string_view to_string(DecodeCode c) {
  switch (c) {
    case DecodeCode::UnknownType:
      return "UnknownType";
    case DecodeCode::MissingField:
      return "MissingField";
    case DecodeCode::BadSeq:
      return "BadSeq";
    case DecodeCode::Malformed:
      return "Malformed";
  }
  return "?";
}

namespace {

constexpr std::string_view kTypeNames[] = {
    "JoinSession",  "AssignCondition", "AgentPrompt",     "UserUtterance",
    "MediationStatus", "AudioChunkMsg", "Control",        "ReleasePreview",
    "SelfReportSubmit", "LatencyReport", "ProtocolError", "MediatedText",
};
static_assert(std::size(kTypeNames) == std::variant_size_v<Payload>);

// --- decoding helpers ------------------------------------------------------

struct Reader {
  const json& obj;
  std::string where;
  std::optional<std::int64_t> seq;

  [[noreturn]] void fail(DecodeCode code, const std::string& what) const {
    throw DecodeError(code, where + ": " + what, seq);
  }

  const json* find(const char* name) const {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
  }
  const json& need(const char* name) const {
    const json* v = find(name);
    if (!v) fail(DecodeCode::MissingField, std::string("missing field '") + name + "'");
    return *v;
  }
  std::string str(const char* name) const {
    const json& v = need(name);
    if (!v.is_string()) fail(DecodeCode::Malformed, std::string("'") + name + "' must be a string");
    return v.get<std::string>();
  }
  std::optional<std::string> opt_str(const char* name) const {
    if (!find(name)) return std::nullopt;
    return str(name);
  }
  std::int64_t integer(const char* name) const {
    const json& v = need(name);
    if (!v.is_number_integer()) {
      fail(DecodeCode::Malformed, std::string("'") + name + "' must be an integer");
    }
    return v.get<std::int64_t>();
  }
  std::optional<std::int64_t> opt_integer(const char* name) const {
    if (!find(name)) return std::nullopt;
    return integer(name);
  }
  bool boolean(const char* name) const {
    const json& v = need(name);
    if (!v.is_boolean()) fail(DecodeCode::Malformed, std::string("'") + name + "' must be a boolean");
    return v.get<bool>();
  }
  template <class T, class Parse>
  T enumeration(const char* name, Parse parse) const {
    const std::string s = str(name);
    try {
      return parse(s);
    } catch (const Error&) {
      fail(DecodeCode::Malformed, std::string("'") + name + "' has unknown value '" + s + "'");
    }
  }
};

Role parse_role(std::string_view s) {
  if (s == "Participant") return Role::Participant;
  if (s == "Operator") return Role::Operator;
  if (s == "Observer") return Role::Observer;
  throw ParseError("role");
}

StageState parse_stage_state(std::string_view s) {
  if (s == "Started") return StageState::Started;
  if (s == "Finished") return StageState::Finished;
  throw ParseError("stage state");
}

ControlAction parse_action(std::string_view s) {
  if (s == "Pause") return ControlAction::Pause;
  if (s == "Resume") return ControlAction::Resume;
  if (s == "Restart") return ControlAction::Restart;
  if (s == "SetAutonomy") return ControlAction::SetAutonomy;
  throw ParseError("control action");
}

Condition read_condition(const Reader& r, const char* name) {
  const json& c = r.need(name);
  if (!c.is_object()) r.fail(DecodeCode::Malformed, std::string("'") + name + "' must be an object");
  Reader cr{c, r.where + "." + name, r.seq};
  return {cr.enumeration<VoiceMode>("voice", parse_voice_mode),
          cr.enumeration<ContentMode>("content", parse_content_mode)};
}

Payload read_payload(std::string_view type, const Reader& r) {
  if (type == "JoinSession") {
    JoinSession p;
    p.role = r.enumeration<Role>("role", parse_role);
    if (auto idx = r.opt_integer("participant_index")) {
      if (*idx < 0 || *idx > INT32_MAX) r.fail(DecodeCode::Malformed, "participant_index out of range");
      p.participant_index = static_cast<int>(*idx);
    }
    return p;
  }
  if (type == "AssignCondition") {
    const auto idx = r.integer("trial_index");
    if (idx < 0 || idx > INT32_MAX) r.fail(DecodeCode::Malformed, "trial_index out of range");
    return AssignCondition{static_cast<int>(idx), read_condition(r, "condition")};
  }
  if (type == "AgentPrompt") {
    return AgentPrompt{r.str("scenario_id"), r.str("text"), r.opt_str("audio_ref")};
  }
  if (type == "UserUtterance") {
    UserUtterance p{r.opt_str("text"), r.opt_str("audio_b64"), r.boolean("is_final")};
    if (!p.text && !p.audio_b64) r.fail(DecodeCode::MissingField, "needs 'text' or 'audio_b64'");
    return p;
  }
  if (type == "MediationStatus") {
    return MediationStatus{r.enumeration<StageKind>("stage", parse_stage_kind),
                           r.enumeration<StageState>("state", parse_stage_state),
                           r.integer("elapsed_ms")};
  }
  if (type == "AudioChunkMsg") {
    return AudioChunkMsg{r.str("stream_id"), r.integer("seq"), r.str("pcm_b64"),
                         r.integer("duration_ms"), r.boolean("is_final")};
  }
  if (type == "Control") {
    Control p;
    p.action = r.enumeration<ControlAction>("action", parse_action);
    if (r.find("autonomy")) p.autonomy = r.enumeration<AutonomyLevel>("autonomy", parse_autonomy);
    if (p.action == ControlAction::SetAutonomy && !p.autonomy) {
      r.fail(DecodeCode::MissingField, "SetAutonomy needs 'autonomy'");
    }
    return p;
  }
  if (type == "ReleasePreview") return ReleasePreview{r.str("stream_id")};
  if (type == "SelfReportSubmit") {
    SelfReportSubmit p;
    const json& items = r.need("items");
    if (!items.is_array()) r.fail(DecodeCode::Malformed, "'items' must be an array");
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!items[i].is_object()) r.fail(DecodeCode::Malformed, "items must be objects");
      Reader ir{items[i], r.where + ".items[" + std::to_string(i) + "]", r.seq};
      SelfReportItem item;
      item.item_id = ir.str("item_id");
      item.construct = ir.enumeration<Construct>("construct", parse_construct);
      const auto lo = ir.integer("scale_min");
      const auto hi = ir.integer("scale_max");
      const auto resp = ir.integer("response");
      for (auto v : {lo, hi, resp}) {
        if (v < INT32_MIN || v > INT32_MAX) ir.fail(DecodeCode::Malformed, "scale value out of range");
      }
      item.scale_min = static_cast<int>(lo);
      item.scale_max = static_cast<int>(hi);
      item.response = static_cast<int>(resp);
      p.items.push_back(std::move(item));
    }
    p.free_text = r.opt_str("free_text");
    return p;
  }
  if (type == "LatencyReport") {
    const json& t = r.need("trace");
    if (!t.is_object()) r.fail(DecodeCode::Malformed, "'trace' must be an object");
    Reader tr{t, r.where + ".trace", r.seq};
    LatencyTrace trace{tr.integer("stt_ms"),        tr.integer("llm_ms"),
                       tr.integer("tts_first_chunk_ms"), tr.integer("tts_total_ms"),
                       tr.integer("end_to_end_ms"), tr.integer("time_to_first_audio_ms")};
    return LatencyReport{trace, r.integer("masking_window_ms"), r.integer("perceived_gap_ms")};
  }
  if (type == "ProtocolError") {
    return ProtocolError{r.str("code"), r.str("detail"), r.opt_integer("offending_seq")};
  }
  if (type == "MediatedText") {
    MediatedText p{r.str("stream_id"), r.str("source_text"), r.str("text"),
                   r.str("provenance_id"), {}, r.boolean("preview")};
    const json& script = r.need("edit_script");
    if (!script.is_array()) r.fail(DecodeCode::Malformed, "'edit_script' must be an array");
    for (std::size_t i = 0; i < script.size(); ++i) {
      if (!script[i].is_object()) r.fail(DecodeCode::Malformed, "edit ops must be objects");
      Reader er{script[i], r.where + ".edit_script[" + std::to_string(i) + "]", r.seq};
      const std::string op = er.str("op");
      if (op == "Insert") {
        p.edit_script.push_back(EditOp::insert(er.str("text")));
      } else if (op == "Keep" || op == "Delete") {
        const auto n = er.integer("count");
        if (n < 0) er.fail(DecodeCode::Malformed, "'count' must be >= 0");
        const auto count = static_cast<std::size_t>(n);
        p.edit_script.push_back(op == "Keep" ? EditOp::keep(count) : EditOp::erase(count));
      } else {
        er.fail(DecodeCode::Malformed, "unknown edit op '" + op + "'");
      }
    }
    return p;
  }
  r.fail(DecodeCode::UnknownType, "unknown message type '" + std::string(type) + "'");
}

// --- encoding --------------------------------------------------------------

json condition_json(const Condition& c) {
  return json{{"voice", to_string(c.voice)}, {"content", to_string(c.content)}};
}

struct PayloadWriter {
  json operator()(const JoinSession& p) const {
    json j{{"role", to_string(p.role)}};
    if (p.participant_index) {
      if (*p.participant_index < 0) throw ValidationError("participant_index must be >= 0");
      j["participant_index"] = *p.participant_index;
    }
    return j;
  }
  json operator()(const AssignCondition& p) const {
    if (p.trial_index < 0) throw ValidationError("trial_index must be >= 0");
    return json{{"trial_index", p.trial_index}, {"condition", condition_json(p.condition)}};
  }
  json operator()(const AgentPrompt& p) const {
    json j{{"scenario_id", p.scenario_id}, {"text", p.text}};
    if (p.audio_ref) j["audio_ref"] = *p.audio_ref;
    return j;
  }
  json operator()(const UserUtterance& p) const {
    if (!p.text && !p.audio_b64) throw ValidationError("UserUtterance needs text or audio");
    json j{{"is_final", p.is_final}};
    if (p.text) j["text"] = *p.text;
    if (p.audio_b64) j["audio_b64"] = *p.audio_b64;
    return j;
  }
  json operator()(const MediationStatus& p) const {
    return json{{"stage", to_string(p.stage)},
                {"state", to_string(p.state)},
                {"elapsed_ms", p.elapsed_ms}};
  }
  json operator()(const AudioChunkMsg& p) const {
    return json{{"stream_id", p.stream_id},
                {"seq", p.seq},
                {"pcm_b64", p.pcm_b64},
                {"duration_ms", p.duration_ms},
                {"is_final", p.is_final}};
  }
  json operator()(const Control& p) const {
    if (p.action == ControlAction::SetAutonomy && !p.autonomy) {
      throw ValidationError("SetAutonomy needs an autonomy level");
    }
    json j{{"action", to_string(p.action)}};
    if (p.autonomy) j["autonomy"] = to_string(*p.autonomy);
    return j;
  }
  json operator()(const ReleasePreview& p) const { return json{{"stream_id", p.stream_id}}; }
  json operator()(const SelfReportSubmit& p) const {
    json j{{"items", p.items}};
    if (p.free_text) j["free_text"] = *p.free_text;
    return j;
  }
  json operator()(const LatencyReport& p) const {
    return json{{"trace", p.trace},
                {"masking_window_ms", p.masking_window_ms},
                {"perceived_gap_ms", p.perceived_gap_ms}};
  }
  json operator()(const ProtocolError& p) const {
    json j{{"code", p.code}, {"detail", p.detail}};
    if (p.offending_seq) j["offending_seq"] = *p.offending_seq;
    return j;
  }
  json operator()(const MediatedText& p) const {
    return json{{"stream_id", p.stream_id},       {"source_text", p.source_text},
                {"text", p.text},                 {"provenance_id", p.provenance_id},
                {"edit_script", p.edit_script},   {"preview", p.preview}};
  }
};

}  // namespace

std::string_view Envelope::type() const { return kTypeNames[payload.index()]; }

const std::vector<std::string_view>& message_types() {
  static const std::vector<std::string_view> types(std::begin(kTypeNames), std::end(kTypeNames));
  return types;
}

std::string encode(const Envelope& envelope) {
  if (envelope.seq < 0) throw ValidationError("envelope seq must be >= 0");
  json j{{"type", envelope.type()},
         {"session_id", envelope.session_id},
         {"seq", envelope.seq},
         {"payload", std::visit(PayloadWriter{}, envelope.payload)}};
  try {
    return j.dump();
  } catch (const json::type_error& e) {
    throw ValidationError(std::string("envelope is not valid UTF-8: ") + e.what());
  }
}

Envelope decode(std::string_view frame) {
  const json j = json::parse(frame, nullptr, false);
  if (j.is_discarded()) throw DecodeError(DecodeCode::Malformed, "frame is not valid JSON");
  if (!j.is_object()) throw DecodeError(DecodeCode::Malformed, "frame is not a JSON object");
  try {
    Reader top{j, "envelope", std::nullopt};
    const json& seq = top.need("seq");
    if (!seq.is_number_integer() || (seq.is_number_integer() && !seq.is_number_unsigned() &&
                                     seq.get<std::int64_t>() < 0)) {
      top.fail(DecodeCode::BadSeq, "'seq' must be a non-negative integer");
    }
    if (seq.is_number_unsigned() && seq.get<std::uint64_t>() > INT64_MAX) {
      top.fail(DecodeCode::BadSeq, "'seq' out of range");
    }
    top.seq = seq.get<std::int64_t>();
    const std::string type = top.str("type");
    if (std::find(std::begin(kTypeNames), std::end(kTypeNames), type) == std::end(kTypeNames)) {
      top.fail(DecodeCode::UnknownType, "unknown message type '" + type + "'");
    }
    Envelope env;
    env.seq = *top.seq;
    env.session_id = top.str("session_id");
    const json& payload = top.need("payload");
    if (!payload.is_object()) top.fail(DecodeCode::Malformed, "'payload' must be an object");
    env.payload = read_payload(type, Reader{payload, type, top.seq});
    return env;
  } catch (const DecodeError&) {
    throw;
  } catch (const std::exception& e) {
    throw DecodeError(DecodeCode::Malformed, e.what());
  }
}

}  // namespace proxyme::protocol
