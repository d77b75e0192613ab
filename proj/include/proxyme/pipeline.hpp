#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "proxyme/adapters.hpp"
#include "proxyme/provenance.hpp"
#include "proxyme/types.hpp"

namespace proxyme {

struct MediationRequest {
  Utterance source_utterance;
  Condition condition;
  std::string scenario_id;
  std::string prompt_template;
  bool streaming = false;
  Millis chunk_ms = 1000;
  /// Reference clip for the cloned voice; ignored for Robotic.
  std::optional<std::string> voice_sample_ref;
  /// Raw audio for the STT stage; without it the utterance text passes through.
  std::optional<std::vector<std::uint8_t>> source_audio;
};

/// Throws ValidationError unless the source is a finalized Participant
/// utterance and chunk_ms is positive when streaming.
void validate_request(const MediationRequest& request);

struct MediatedResponse {
  Utterance response_utterance;
  std::string transcript;
  std::string modified_text;
  std::vector<AudioChunk> chunks;
  LatencyTrace trace;
  std::string provenance_id;
};

class CancelToken {
 public:
  void cancel() { cancelled_.store(true); }
  bool cancelled() const { return cancelled_.load(); }

 private:
  std::atomic<bool> cancelled_{false};
};

struct StageReport {
  StageKind stage;
  Millis latency_ms = 0;
};

/// One mediation run, executed a stage at a time. A driver may
/// pause, restart or advance the clock between stages.
class MediationRun {
 public:
  MediationRun(MediationRequest request, AdapterSet adapters, std::string stream_id);

  /// Next stage to execute, or nullopt once synthesis finished.
  std::optional<StageKind> next_stage() const;
  bool done() const { return !next_stage(); }

  /// Executes the next stage. Adapter failures come out as StageError tagged
  /// with the failing stage.
  StageReport step();

  const MediationRequest& request() const { return request_; }
  /// Replaces the source utterance, e.g. once an audio-only utterance has
  /// been transcribed and registered with its session.
  void bind_source(Utterance source) { request_.source_utterance = std::move(source); }
  const std::string& stream_id() const { return stream_id_; }
  const std::optional<TranscriptResult>& transcript() const { return transcript_; }
  const std::optional<ModifiedResult>& modified() const { return modified_; }
  const std::optional<SynthesisResult>& synthesis() const { return synthesis_; }

  /// Requires done().
  LatencyTrace trace() const;

 private:
  MediationRequest request_;
  AdapterSet adapters_;
  std::string stream_id_;
  std::optional<TranscriptResult> transcript_;
  std::optional<ModifiedResult> modified_;
  std::optional<SynthesisResult> synthesis_;
};

using StageCallback = std::function<void(StageKind stage, bool finished, Millis elapsed_ms)>;

struct MediationOptions {
  /// Receives the provenance record when set.
  ProvenanceLedger* ledger = nullptr;
  const CancelToken* cancel = nullptr;
  StageCallback on_stage;
  std::string stream_id;              // default: <source id>/s0
  std::string response_utterance_id;  // default: <source id>/x
  std::string provenance_id;          // default: prov:<response id>
  Millis created_at = 0;
};

/// Transcribe, modify, synthesize, strictly in that order, each stage fed
/// by the previous one. Throws MediationAborted when the cancel token fires
/// between stages or between chunk hand-offs.
MediatedResponse run_mediation(const MediationRequest& request, const AdapterSet& adapters,
                               const MediationOptions& options = {});

/// Provenance linking a (possibly partial) mediated text to its source.
ProvenanceRecord make_provenance_record(const MediationRequest& request,
                                        std::string provenance_id,
                                        std::string derived_utterance_id,
                                        std::string derived_text, bool aborted,
                                        Millis created_at);

/// Silence left after a masking window: max(0, time_to_first_audio - window).
Millis compute_perceived_gap(const LatencyTrace& trace, Millis masking_window_ms);

}  // namespace proxyme
