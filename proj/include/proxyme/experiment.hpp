#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "proxyme/pipeline.hpp"
#include "proxyme/session.hpp"
#include "proxyme/types.hpp"

namespace proxyme {

/// Canonical order: voice major (Cloned, Robotic), content minor
/// (Repetition, Enhancement, CounteredConclusion).
std::vector<Condition> enumerate_conditions();

/// Williams balanced Latin square of even order n: row r, column c holds
/// (first[c] + r) mod n with first = 0, 1, n-1, 2, n-2, ...
std::vector<std::vector<int>> balanced_latin_square(int n);

struct ScenarioScript {
  std::string scenario_id;
  std::string title;
  std::string agent_opening;
  std::string agent_followup;
  std::map<ContentMode, std::string> modifier_prompt_templates;
  std::optional<std::string> agent_voice_ref;
  /// What a simulated participant says first; not used with live clients.
  std::optional<std::string> sample_response;

  const std::string& template_for(ContentMode mode) const;
};

using ScenarioPool = std::vector<ScenarioScript>;

/// Loads a JSON array of scenarios. ParseError carries line or field
/// diagnostics; DuplicateScenarioId on a repeated id.
ScenarioPool load_scenarios(const std::filesystem::path& path);
ScenarioPool parse_scenarios(std::string_view text, const std::string& origin = "<input>");

const ScenarioScript* find_scenario(const ScenarioPool& pool, std::string_view id);

/// Conditions in row (participant_index mod 6) of the balanced square;
/// scenarios by a Fisher-Yates shuffle seeded from participant_index.
/// Throws InsufficientScenarios for pools of fewer than six.
TrialPlan plan_for(int participant_index, const ScenarioPool& pool);

enum class Construct { Agency, Authorship, Other };

std::string_view to_string(Construct c);
Construct parse_construct(std::string_view s);

struct SelfReportItem {
  std::string item_id;
  Construct construct = Construct::Other;
  int scale_min = 1;
  int scale_max = 7;
  int response = 1;

  friend bool operator==(const SelfReportItem&, const SelfReportItem&) = default;
};

struct SelfReport {
  std::string trial_ref;
  std::vector<SelfReportItem> items;
  std::optional<std::string> free_text;

  friend bool operator==(const SelfReport&, const SelfReport&) = default;
};

struct QuestionnaireItem {
  std::string item_id;
  Construct construct = Construct::Other;
  std::string prompt;
  int scale_min = 1;
  int scale_max = 7;
};

using Questionnaire = std::vector<QuestionnaireItem>;

/// A JSON object {"items": [...]} or a bare array of items.
Questionnaire load_questionnaire(const std::filesystem::path& path);
Questionnaire parse_questionnaire(std::string_view text, const std::string& origin = "<input>");

/// Every violation found, one per line; empty when the report is valid.
/// With a questionnaire, item ids and scales must match it and every item
/// must be answered.
std::vector<std::string> self_report_violations(const SelfReport& report,
                                                const Questionnaire* questionnaire = nullptr);

struct TrialLogEntry {
  std::string session_id;
  int participant_index = 0;
  int trial_index = 0;
  Condition condition;
  std::string scenario_id;
  std::string initial_utterance_id;
  std::string initial_text;
  std::string response_utterance_id;
  std::string mediated_text;
  bool streaming = false;
  Millis chunk_ms = 0;
  LatencyTrace trace;
  std::string provenance_id;
  Millis masking_window_ms = 0;
  Millis perceived_gap_ms = 0;
  int aborted_runs = 0;
  AutonomyLevel autonomy = AutonomyLevel::AutoSpeak;
  SelfReport self_report;
  Millis completed_at = 0;

  friend bool operator==(const TrialLogEntry&, const TrialLogEntry&) = default;
};

struct TrialOutcome {
  Trial trial;
  int participant_index = 0;
  Utterance initial_utterance;
  MediatedResponse mediated_response;
  SelfReport self_report;
  bool streaming = false;
  Millis chunk_ms = 0;
  Millis masking_window_ms = 0;
  int aborted_runs = 0;
  AutonomyLevel autonomy = AutonomyLevel::AutoSpeak;
  Millis completed_at = 0;
};

/// Append-only per-session trial log, <session_id>.log.jsonl in data_dir.
class SessionLog {
 public:
  SessionLog(std::string session_id, std::optional<std::filesystem::path> data_dir);

  const std::string& session_id() const { return session_id_; }
  const std::vector<TrialLogEntry>& entries() const { return entries_; }
  std::optional<std::filesystem::path> path() const;

  void append(const TrialLogEntry& entry);

 private:
  std::string session_id_;
  std::optional<std::filesystem::path> data_dir_;
  std::vector<TrialLogEntry> entries_;
};

/// Validates the outcome and appends one entry. Throws ValidationError
/// listing every violated invariant.
const TrialLogEntry& record_trial(SessionLog& log, const TrialOutcome& outcome,
                                  const Questionnaire* questionnaire = nullptr);

/// Reads every *.log.jsonl under dir and its subdirectories, in path order.
std::vector<TrialLogEntry> load_trial_logs(const std::filesystem::path& dir);

}  // namespace proxyme
