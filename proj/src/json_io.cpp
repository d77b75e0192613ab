#include "proxyme/json_io.hpp"

namespace proxyme {

using nlohmann::json;

void to_json(json& j, const Condition& c) {
  j = json{{"voice", to_string(c.voice)}, {"content", to_string(c.content)}};
}

void from_json(const json& j, Condition& c) {
  c.voice = parse_voice_mode(j.at("voice").get<std::string>());
  c.content = parse_content_mode(j.at("content").get<std::string>());
}

void to_json(json& j, const LatencyTrace& t) {
  j = json{{"stt_ms", t.stt_ms},
           {"llm_ms", t.llm_ms},
           {"tts_first_chunk_ms", t.tts_first_chunk_ms},
           {"tts_total_ms", t.tts_total_ms},
           {"end_to_end_ms", t.end_to_end_ms},
           {"time_to_first_audio_ms", t.time_to_first_audio_ms}};
}

void from_json(const json& j, LatencyTrace& t) {
  j.at("stt_ms").get_to(t.stt_ms);
  j.at("llm_ms").get_to(t.llm_ms);
  j.at("tts_first_chunk_ms").get_to(t.tts_first_chunk_ms);
  j.at("tts_total_ms").get_to(t.tts_total_ms);
  j.at("end_to_end_ms").get_to(t.end_to_end_ms);
  j.at("time_to_first_audio_ms").get_to(t.time_to_first_audio_ms);
}

void to_json(json& j, const EditOp& op) {
  switch (op.kind) {
    case EditOp::Kind::Keep:
      j = json{{"op", "Keep"}, {"count", op.count}};
      break;
    case EditOp::Kind::Delete:
      j = json{{"op", "Delete"}, {"count", op.count}};
      break;
    case EditOp::Kind::Insert:
      j = json{{"op", "Insert"}, {"text", op.text}};
      break;
  }
}

void from_json(const json& j, EditOp& op) {
  const auto kind = j.at("op").get<std::string>();
  if (kind == "Keep") {
    op = EditOp::keep(j.at("count").get<std::size_t>());
  } else if (kind == "Delete") {
    op = EditOp::erase(j.at("count").get<std::size_t>());
  } else if (kind == "Insert") {
    op = EditOp::insert(j.at("text").get<std::string>());
  } else {
    throw ParseError("unknown edit op '" + kind + "'");
  }
}

void to_json(json& j, const ProvenanceRecord& r) {
  j = json{{"provenance_id", r.provenance_id},
           {"session_id", r.session_id},
           {"source_utterance_id", r.source_utterance_id},
           {"derived_utterance_id", r.derived_utterance_id},
           {"derived_origin", to_string(r.derived_origin)},
           {"source_text", r.source_text},
           {"derived_text", r.derived_text},
           {"condition", r.condition},
           {"edit_script", r.edit_script},
           {"aborted", r.aborted},
           {"created_at", r.created_at}};
}

void from_json(const json& j, ProvenanceRecord& r) {
  j.at("provenance_id").get_to(r.provenance_id);
  j.at("session_id").get_to(r.session_id);
  j.at("source_utterance_id").get_to(r.source_utterance_id);
  j.at("derived_utterance_id").get_to(r.derived_utterance_id);
  r.derived_origin = parse_speaker_origin(j.at("derived_origin").get<std::string>());
  j.at("source_text").get_to(r.source_text);
  j.at("derived_text").get_to(r.derived_text);
  j.at("condition").get_to(r.condition);
  j.at("edit_script").get_to(r.edit_script);
  j.at("aborted").get_to(r.aborted);
  j.at("created_at").get_to(r.created_at);
}

void to_json(json& j, const SelfReportItem& i) {
  j = json{{"item_id", i.item_id},
           {"construct", to_string(i.construct)},
           {"scale_min", i.scale_min},
           {"scale_max", i.scale_max},
           {"response", i.response}};
}

void from_json(const json& j, SelfReportItem& i) {
  j.at("item_id").get_to(i.item_id);
  i.construct = parse_construct(j.at("construct").get<std::string>());
  j.at("scale_min").get_to(i.scale_min);
  j.at("scale_max").get_to(i.scale_max);
  j.at("response").get_to(i.response);
}

void to_json(json& j, const SelfReport& r) {
  j = json{{"trial_ref", r.trial_ref}, {"items", r.items}};
  if (r.free_text) j["free_text"] = *r.free_text;
}

void from_json(const json& j, SelfReport& r) {
  r.trial_ref = j.value("trial_ref", std::string());
  j.at("items").get_to(r.items);
  if (auto it = j.find("free_text"); it != j.end() && !it->is_null()) {
    r.free_text = it->get<std::string>();
  } else {
    r.free_text.reset();
  }
}

void to_json(json& j, const TrialLogEntry& e) {
  j = json{{"session_id", e.session_id},
           {"participant_index", e.participant_index},
           {"trial_index", e.trial_index},
           {"condition", e.condition},
           {"scenario_id", e.scenario_id},
           {"initial_utterance_id", e.initial_utterance_id},
           {"initial_text", e.initial_text},
           {"response_utterance_id", e.response_utterance_id},
           {"mediated_text", e.mediated_text},
           {"streaming", e.streaming},
           {"chunk_ms", e.chunk_ms},
           {"trace", e.trace},
           {"provenance_id", e.provenance_id},
           {"masking_window_ms", e.masking_window_ms},
           {"perceived_gap_ms", e.perceived_gap_ms},
           {"aborted_runs", e.aborted_runs},
           {"autonomy", to_string(e.autonomy)},
           {"self_report", e.self_report},
           {"completed_at", e.completed_at}};
}

void from_json(const json& j, TrialLogEntry& e) {
  j.at("session_id").get_to(e.session_id);
  j.at("participant_index").get_to(e.participant_index);
  j.at("trial_index").get_to(e.trial_index);
  j.at("condition").get_to(e.condition);
  j.at("scenario_id").get_to(e.scenario_id);
  j.at("initial_utterance_id").get_to(e.initial_utterance_id);
  j.at("initial_text").get_to(e.initial_text);
  j.at("response_utterance_id").get_to(e.response_utterance_id);
  j.at("mediated_text").get_to(e.mediated_text);
  j.at("streaming").get_to(e.streaming);
  j.at("chunk_ms").get_to(e.chunk_ms);
  j.at("trace").get_to(e.trace);
  j.at("provenance_id").get_to(e.provenance_id);
  j.at("masking_window_ms").get_to(e.masking_window_ms);
  j.at("perceived_gap_ms").get_to(e.perceived_gap_ms);
  j.at("aborted_runs").get_to(e.aborted_runs);
  e.autonomy = parse_autonomy(j.at("autonomy").get<std::string>());
  j.at("self_report").get_to(e.self_report);
  j.at("completed_at").get_to(e.completed_at);
}

void to_json(json& j, const Distribution& d) {
  if (d.kind == Distribution::Kind::Fixed) {
    j = json{{"type", "fixed"}, {"value", d.mean}};
  } else {
    j = json{{"type", "normal"}, {"mean", d.mean}, {"stddev", d.stddev}};
  }
}

void from_json(const json& j, Distribution& d) {
  if (j.is_number()) {
    d = Distribution::fixed(j.get<double>());
    return;
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "fixed") {
    d = Distribution::fixed(j.at("value").get<double>());
  } else if (type == "normal") {
    d = Distribution::normal(j.at("mean").get<double>(), j.at("stddev").get<double>());
  } else {
    throw ConfigError("unknown distribution type '" + type + "'");
  }
}

void to_json(json& j, const LatencyProfile& p) {
  j = json{{"stt_ms", p.stt_ms},
           {"llm_ms", p.llm_ms},
           {"tts_total_ms", p.tts_total_ms},
           {"tts_first_chunk_ms", p.tts_first_chunk_ms}};
}

void from_json(const json& j, LatencyProfile& p) {
  p = LatencyProfile{};
  if (j.contains("stt_ms")) j.at("stt_ms").get_to(p.stt_ms);
  if (j.contains("llm_ms")) j.at("llm_ms").get_to(p.llm_ms);
  if (j.contains("tts_total_ms")) j.at("tts_total_ms").get_to(p.tts_total_ms);
  if (j.contains("tts_first_chunk_ms")) j.at("tts_first_chunk_ms").get_to(p.tts_first_chunk_ms);
}

}  // namespace proxyme
