#include "proxyme/pipeline.hpp"

#include <algorithm>

namespace proxyme {

void validate_request(const MediationRequest& request) {
  const Utterance& src = request.source_utterance;
  if (src.origin != SpeakerOrigin::Participant) {
    throw ValidationError("mediation source must be a Participant utterance");
  }
  if (src.text.empty() && !request.source_audio) {
    throw ValidationError("mediation source utterance is not finalized");
  }
  if (request.streaming && request.chunk_ms <= 0) {
    throw ValidationError("chunk_ms must be > 0 when streaming");
  }
}

MediationRun::MediationRun(MediationRequest request, AdapterSet adapters,
                           std::string stream_id)
    : request_(std::move(request)),
      adapters_(std::move(adapters)),
      stream_id_(std::move(stream_id)) {
  validate_request(request_);
  if (!adapters_.stt || !adapters_.modifier || !adapters_.tts) {
    throw ValidationError("mediation needs all three stage adapters");
  }
}

std::optional<StageKind> MediationRun::next_stage() const {
  if (!transcript_) return StageKind::Stt;
  if (!modified_) return StageKind::Llm;
  if (!synthesis_) return StageKind::Tts;
  return std::nullopt;
}

StageReport MediationRun::step() {
  const auto stage = next_stage();
  if (!stage) throw ValidationError("mediation run already complete");
  try {
    switch (*stage) {
      case StageKind::Stt: {
        SttInput input = request_.source_audio
                             ? SttInput::from_audio(*request_.source_audio)
                             : SttInput::passthrough(request_.source_utterance.text);
        transcript_ = adapters_.stt->transcribe(input);
        if (request_.source_utterance.text.empty()) {
          request_.source_utterance.text = transcript_->text;
        }
        return {*stage, transcript_->stage_latency_ms};
      }
      case StageKind::Llm:
        modified_ = adapters_.modifier->modify(transcript_->text, request_.condition.content,
                                               request_.prompt_template);
        return {*stage, modified_->stage_latency_ms};
      case StageKind::Tts: {
        SynthesisRequest tts;
        tts.text = modified_->text;
        tts.voice = request_.condition.voice;
        if (request_.condition.voice == VoiceMode::Cloned) {
          tts.voice_sample_ref = request_.voice_sample_ref;
        }
        tts.streaming = request_.streaming;
        tts.chunk_ms = request_.chunk_ms;
        tts.stream_id = stream_id_;
        synthesis_ = adapters_.tts->synthesize(tts);
        return {*stage, synthesis_->timing.total_ms};
      }
    }
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(e.code(), *stage, std::string(to_string(*stage)) + ": " + e.what());
  } catch (const std::exception& e) {
    throw StageError("StageFailed", *stage, std::string(to_string(*stage)) + ": " + e.what());
  }
  return {*stage, 0};
}

LatencyTrace MediationRun::trace() const {
  if (!done()) throw ValidationError("trace requested before the run finished");
  return make_trace(transcript_->stage_latency_ms, modified_->stage_latency_ms,
                    synthesis_->timing.first_chunk_ms, synthesis_->timing.total_ms);
}

ProvenanceRecord make_provenance_record(const MediationRequest& request,
                                        std::string provenance_id,
                                        std::string derived_utterance_id,
                                        std::string derived_text, bool aborted,
                                        Millis created_at) {
  ProvenanceRecord r;
  r.provenance_id = std::move(provenance_id);
  r.session_id = request.source_utterance.session_id;
  r.source_utterance_id = request.source_utterance.utterance_id;
  r.derived_utterance_id = std::move(derived_utterance_id);
  r.derived_origin = SpeakerOrigin::AvatarExtension;
  r.source_text = request.source_utterance.text;
  r.derived_text = std::move(derived_text);
  r.condition = request.condition;
  r.edit_script = derive_edit_script(r.source_text, r.derived_text);
  r.aborted = aborted;
  r.created_at = created_at;
  return r;
}

MediatedResponse run_mediation(const MediationRequest& request, const AdapterSet& adapters,
                               const MediationOptions& options) {
  const std::string& source_id = request.source_utterance.utterance_id;
  const std::string stream_id = options.stream_id.empty() ? source_id + "/s0" : options.stream_id;
  const std::string response_id =
      options.response_utterance_id.empty() ? source_id + "/x" : options.response_utterance_id;
  const std::string provenance_id =
      options.provenance_id.empty() ? "prov:" + response_id : options.provenance_id;

  const auto check_cancel = [&] {
    if (options.cancel && options.cancel->cancelled()) {
      throw MediationAborted("restart requested during mediation of " + source_id);
    }
  };

  MediationRun run(request, adapters, stream_id);
  while (auto stage = run.next_stage()) {
    check_cancel();
    if (options.on_stage) options.on_stage(*stage, false, 0);
    const StageReport report = run.step();
    if (options.on_stage) options.on_stage(report.stage, true, report.latency_ms);
  }

  MediatedResponse response;
  response.transcript = run.transcript()->text;
  response.modified_text = run.modified()->text;
  for (const AudioChunk& chunk : run.synthesis()->chunks) {
    check_cancel();
    response.chunks.push_back(chunk);
  }
  response.trace = run.trace();
  response.provenance_id = provenance_id;
  response.response_utterance = Utterance{response_id,
                                          request.source_utterance.session_id,
                                          SpeakerOrigin::AvatarExtension,
                                          response.modified_text,
                                          stream_id,
                                          options.created_at};
  if (options.ledger) {
    options.ledger->append(make_provenance_record(run.request(), provenance_id, response_id,
                                                  response.modified_text, false,
                                                  options.created_at));
  }
  return response;
}

Millis compute_perceived_gap(const LatencyTrace& trace, Millis masking_window_ms) {
  return std::max<Millis>(0, trace.time_to_first_audio_ms - masking_window_ms);
}

}  // namespace proxyme
