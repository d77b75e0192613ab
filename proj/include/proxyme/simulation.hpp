#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxyme/experiment.hpp"
#include "proxyme/gateway.hpp"
#include "proxyme/latency.hpp"
#include "proxyme/provenance.hpp"

namespace proxyme {

struct SimulationOptions {
  ScenarioPool scenarios;
  std::optional<Questionnaire> questionnaire;
  int participants = 1;
  /// Caps the total number of completed trials; the last session stops early.
  std::optional<int> max_trials;
  std::uint64_t seed = 0;
  LatencyProfile profile;
  bool streaming = false;
  Millis chunk_ms = 1000;
  int buffer_depth = 1;
  Millis masking_window_ms = 3000;
  int words_per_minute = kDefaultWordsPerMinute;
  /// Send the first utterance as an audio stub instead of text.
  bool audio_input = false;
  /// Wall-clock pacing instead of the virtual clock.
  bool realtime = false;
  std::optional<std::filesystem::path> out_dir;
};

/// One client frame the simulated participant sent, at session-local time.
struct ReplayMessage {
  Millis at_ms = 0;
  std::string frame;

  friend bool operator==(const ReplayMessage&, const ReplayMessage&) = default;
};

struct ReplayScript {
  int participant_index = 0;
  std::vector<ReplayMessage> messages;
  /// True when the session was cut short rather than run to its last trial.
  bool explicit_stop = false;

  friend bool operator==(const ReplayScript&, const ReplayScript&) = default;
};

nlohmann::json to_json(const ReplayScript& script);
ReplayScript replay_script_from_json(const nlohmann::json& j);
/// Throws ValidationError when times decrease.
void validate_replay_script(const ReplayScript& script);

struct StageStats {
  std::size_t n = 0;
  double mean = 0;
  double stddev = 0;
  Millis p50 = 0;
  Millis p95 = 0;
};

/// Sample statistics; p50/p95 by nearest rank.
StageStats stage_stats(std::vector<Millis> values);

struct LatencySummary {
  StageStats stt, llm, tts_first_chunk, tts_total, end_to_end, time_to_first_audio;
};

LatencySummary summarize(const std::vector<TrialLogEntry>& entries);
nlohmann::json to_json(const LatencySummary& summary);
std::string summary_markdown(const LatencySummary& summary);

struct SimulationResult {
  std::vector<std::string> session_ids;
  std::vector<TrialLogEntry> entries;      // by participant, then trial
  std::vector<ProvenanceRecord> records;   // by participant, then append order
  std::vector<std::vector<Utterance>> utterances;  // per session
  std::vector<ReplayScript> scripts;
  std::vector<std::string> violations;
  LatencySummary summary;
};

/// Runs each participant's session against mock adapters with a reactive
/// simulated participant, then writes logs, ledgers, replay scripts and the
/// latency summary into out_dir when set.
SimulationResult run_simulation(const SimulationOptions& options);

/// Feeds recorded scripts back through fresh gateways.
SimulationResult replay(const std::vector<ReplayScript>& scripts, const SimulationOptions& options);

/// Session-id prefix for a seed and mode, e.g. "s7-streaming".
std::string simulation_prefix(std::uint64_t seed, bool streaming);

}  // namespace proxyme
