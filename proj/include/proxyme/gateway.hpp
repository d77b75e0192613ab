#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "proxyme/clock.hpp"
#include "proxyme/experiment.hpp"
#include "proxyme/pipeline.hpp"
#include "proxyme/protocol.hpp"
#include "proxyme/provenance.hpp"
#include "proxyme/scheduler.hpp"
#include "proxyme/session.hpp"

namespace proxyme {

struct GatewayConfig {
  bool streaming = false;
  Millis chunk_ms = 1000;
  int buffer_depth = 1;
  Millis masking_window_ms = 3000;
  int words_per_minute = kDefaultWordsPerMinute;
  /// Where session logs go; nullopt keeps them in memory.
  std::optional<std::filesystem::path> data_dir;
  /// Session ids are <prefix>-p<NNN>.
  std::string session_prefix = "session";
  /// Reference clip handed to TTS for the Cloned voice.
  std::optional<std::string> voice_sample_ref;
};

using ConnectionId = std::uint64_t;

struct Outbound {
  ConnectionId to = 0;
  protocol::Envelope envelope;
};

/// Builds the stage adapters for one participant's session.
using AdapterFactory = std::function<AdapterSet(int participant_index)>;

/// Bookkeeping of one mediation run, kept after it ends.
struct RunSummary {
  std::string stream_id;
  int trial_index = 0;
  bool aborted = false;
  bool completed = false;
  std::vector<std::int64_t> played_seqs;
};

/// The service's message router and per-session engine.
///
/// Transport-agnostic: a transport feeds frames in with handle_frame(),
/// calls pump() whenever time may have passed, and delivers the returned
/// Outbound envelopes. Work is time-driven against the injected Clock:
/// stage completions, audio pacing and agent-prompt playback become due at
/// computed instants, and next_deadline() tells a virtual-clock driver where
/// to jump. Adapter calls run outside the state lock.
class Gateway {
 public:
  Gateway(GatewayConfig config, ScenarioPool scenarios, std::optional<Questionnaire> questionnaire,
          AdapterFactory adapters, const Clock& clock, ProvenanceLedger& ledger);
  ~Gateway();

  ConnectionId connect();
  void disconnect(ConnectionId id);

  /// Decodes and routes one frame; decode failures become a ProtocolError
  /// reply and the connection stays usable.
  std::vector<Outbound> handle_frame(ConnectionId from, std::string_view frame);
  std::vector<Outbound> handle(ConnectionId from, const protocol::Envelope& envelope);

  /// Advances every session to clock.now().
  std::vector<Outbound> pump();

  /// Earliest instant at which pump() has work, if any is scheduled.
  std::optional<Millis> next_deadline() const;

  // Introspection.
  std::vector<std::string> session_ids() const;
  std::optional<SessionState> session_state(const std::string& session_id) const;
  std::optional<int> trial_index(const std::string& session_id) const;
  bool session_finished(const std::string& session_id) const;
  std::vector<TrialLogEntry> trial_log(const std::string& session_id) const;
  std::vector<RunSummary> runs(const std::string& session_id) const;
  std::vector<Utterance> utterances(const std::string& session_id) const;
  std::optional<std::string> session_of(ConnectionId id) const;
  const GatewayConfig& config() const { return config_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  GatewayConfig config_;
};

}  // namespace proxyme
