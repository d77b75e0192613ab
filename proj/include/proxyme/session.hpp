#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proxyme/types.hpp"

namespace proxyme {

enum class Phase {
  Idle,
  AgentPrompting,
  ListeningInitial,
  AwaitingFollowup,
  Mediating,
  SpeakingExtension,
  Paused,
  CollectingSelfReport,
  TrialComplete,
};

/// A dialogue state. `resume_target` is set exactly when phase == Paused and
/// names the phase a ResumeRequested returns to.
struct SessionState {
  Phase phase = Phase::Idle;
  std::optional<Phase> resume_target;

  static SessionState paused(Phase target) { return {Phase::Paused, target}; }

  friend bool operator==(const SessionState&, const SessionState&) = default;
};

enum class SessionEvent {
  AgentSpoke,
  InitialUtteranceFinalized,
  FollowupAsked,
  MediationStarted,
  FirstAudioChunk,
  PlaybackFinished,
  PauseRequested,
  ResumeRequested,
  SelfReportSubmitted,
  RestartRequested,
};

inline constexpr SessionEvent kAllEvents[] = {
    SessionEvent::AgentSpoke,          SessionEvent::InitialUtteranceFinalized,
    SessionEvent::FollowupAsked,       SessionEvent::MediationStarted,
    SessionEvent::FirstAudioChunk,     SessionEvent::PlaybackFinished,
    SessionEvent::PauseRequested,      SessionEvent::ResumeRequested,
    SessionEvent::SelfReportSubmitted, SessionEvent::RestartRequested,
};

std::string_view to_string(Phase p);
std::string_view to_string(SessionEvent e);
std::string to_string(const SessionState& s);

/// The turn-structure transition table. Pure and deterministic; throws
/// IllegalTransition for any (state, event) pair not in the table.
///
///   Idle                 AgentSpoke                 -> AgentPrompting
///   AgentPrompting       PlaybackFinished           -> ListeningInitial
///   ListeningInitial     InitialUtteranceFinalized  -> AwaitingFollowup
///   AwaitingFollowup     MediationStarted           -> Mediating
///   Mediating            FollowupAsked              -> Mediating
///   Mediating            FirstAudioChunk            -> SpeakingExtension
///   SpeakingExtension    PlaybackFinished           -> CollectingSelfReport
///   Mediating|Speaking   PauseRequested             -> Paused(prior)
///   Paused(p)            ResumeRequested            -> p
///   Mediating|Speaking|Paused  RestartRequested     -> Mediating
///   CollectingSelfReport SelfReportSubmitted        -> TrialComplete
///   TrialComplete        AgentSpoke                 -> AgentPrompting
SessionState advance(const SessionState& state, SessionEvent event);

/// Whether advance(state, event) would succeed.
bool is_legal(const SessionState& state, SessionEvent event);

struct Trial {
  Condition condition;
  std::string scenario_id;
  int trial_index = 0;

  friend bool operator==(const Trial&, const Trial&) = default;
};

struct TrialPlan {
  int participant_index = 0;
  std::vector<Trial> trials;

  friend bool operator==(const TrialPlan&, const TrialPlan&) = default;
};

inline constexpr int kTrialsPerPlan = 6;

/// Throws InvalidTrialPlan unless the plan holds exactly six trials whose
/// conditions are a permutation of the 2x3 matrix, with distinct scenarios
/// and trial_index == position.
void validate_trial_plan(const TrialPlan& plan);

/// Per-participant dialogue session: the state machine plus the utterances
/// and trial bookkeeping it governs. Single writer; callers serialize.
class Session {
 public:
  Session(std::string session_id, std::string participant_id, TrialPlan plan);

  const std::string& id() const { return id_; }
  const std::string& participant_id() const { return participant_id_; }
  const TrialPlan& plan() const { return plan_; }
  const SessionState& state() const { return state_; }
  int trial_index() const { return trial_index_; }
  const Trial& current_trial() const { return plan_.trials.at(trial_index_); }
  bool is_final_trial() const { return trial_index_ + 1 == static_cast<int>(plan_.trials.size()); }
  /// TrialComplete of the last trial: no further events are legal.
  bool finished() const;

  /// Applies one event. Besides the table, rejects SpeakingExtension entry
  /// without a Mediating phase in the same trial, TrialComplete without
  /// exactly one initial utterance, and AgentSpoke after the final trial.
  const SessionState& apply(SessionEvent event);

  AutonomyLevel autonomy() const { return autonomy_; }
  void set_autonomy(AutonomyLevel level) { autonomy_ = level; }

  /// Appends a finalized utterance. Text must be non-empty, created_at
  /// non-decreasing and an explicit id unused; an empty id gets <session>/uN.
  /// The first Participant utterance of a trial is its initial utterance.
  const Utterance& add_utterance(SpeakerOrigin origin, std::string text,
                                 std::optional<std::string> audio_ref,
                                 Millis created_at, std::string utterance_id = {});

  const std::vector<Utterance>& utterances() const { return utterances_; }
  const Utterance* find_utterance(std::string_view id) const;
  /// The current trial's initial Participant utterance, if captured.
  const Utterance* initial_utterance() const;
  int initial_utterance_count() const { return initial_count_; }

 private:
  std::string id_;
  std::string participant_id_;
  TrialPlan plan_;
  SessionState state_;
  int trial_index_ = 0;
  AutonomyLevel autonomy_ = AutonomyLevel::AutoSpeak;
  std::vector<Utterance> utterances_;
  std::optional<std::size_t> initial_pos_;
  int initial_count_ = 0;
  bool mediated_this_trial_ = false;
  Millis last_created_at_ = 0;
};

/// Creates a session with a process-unique id, Idle at trial 0.
Session new_session(const std::string& participant_id, TrialPlan plan);

}  // namespace proxyme
