#include "proxyme/session.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <set>

namespace proxyme {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Idle:
      return "Idle";
    case Phase::AgentPrompting:
      return "AgentPrompting";
    case Phase::ListeningInitial:
      return "ListeningInitial";
    case Phase::AwaitingFollowup:
      return "AwaitingFollowup";
    case Phase::Mediating:
      return "Mediating";
    case Phase::SpeakingExtension:
      return "SpeakingExtension";
    case Phase::Paused:
      return "Paused";
    case Phase::CollectingSelfReport:
      return "CollectingSelfReport";
    case Phase::TrialComplete:
      return "TrialComplete";
  }
  return "?";
}

std::string_view to_string(SessionEvent e) {
  switch (e) {
    case SessionEvent::AgentSpoke:
      return "AgentSpoke";
    case SessionEvent::InitialUtteranceFinalized:
      return "InitialUtteranceFinalized";
    case SessionEvent::FollowupAsked:
      return "FollowupAsked";
    case SessionEvent::MediationStarted:
      return "MediationStarted";
    case SessionEvent::FirstAudioChunk:
      return "FirstAudioChunk";
    case SessionEvent::PlaybackFinished:
      return "PlaybackFinished";
    case SessionEvent::PauseRequested:
      return "PauseRequested";
    case SessionEvent::ResumeRequested:
      return "ResumeRequested";
    case SessionEvent::SelfReportSubmitted:
      return "SelfReportSubmitted";
    case SessionEvent::RestartRequested:
      return "RestartRequested";
  }
  return "?";
}

std::string to_string(const SessionState& s) {
  std::string out(to_string(s.phase));
  if (s.resume_target) out += "(" + std::string(to_string(*s.resume_target)) + ")";
  return out;
}

namespace {

std::optional<SessionState> successor(const SessionState& s, SessionEvent e) {
  using P = Phase;
  using E = SessionEvent;
  switch (s.phase) {
    case P::Idle:
      if (e == E::AgentSpoke) return SessionState{P::AgentPrompting};
      break;
    case P::AgentPrompting:
      if (e == E::PlaybackFinished) return SessionState{P::ListeningInitial};
      break;
    case P::ListeningInitial:
      if (e == E::InitialUtteranceFinalized) return SessionState{P::AwaitingFollowup};
      break;
    case P::AwaitingFollowup:
      if (e == E::MediationStarted) return SessionState{P::Mediating};
      break;
    case P::Mediating:
      if (e == E::FollowupAsked) return SessionState{P::Mediating};
      if (e == E::FirstAudioChunk) return SessionState{P::SpeakingExtension};
      if (e == E::PauseRequested) return SessionState::paused(P::Mediating);
      if (e == E::RestartRequested) return SessionState{P::Mediating};
      break;
    case P::SpeakingExtension:
      if (e == E::PlaybackFinished) return SessionState{P::CollectingSelfReport};
      if (e == E::PauseRequested) return SessionState::paused(P::SpeakingExtension);
      if (e == E::RestartRequested) return SessionState{P::Mediating};
      break;
    case P::Paused:
      if (!s.resume_target) break;
      if (e == E::ResumeRequested) return SessionState{*s.resume_target};
      if (e == E::RestartRequested) return SessionState{P::Mediating};
      break;
    case P::CollectingSelfReport:
      if (e == E::SelfReportSubmitted) return SessionState{P::TrialComplete};
      break;
    case P::TrialComplete:
      if (e == E::AgentSpoke) return SessionState{P::AgentPrompting};
      break;
  }
  return std::nullopt;
}

std::string illegal_detail(const SessionState& s, SessionEvent e) {
  return "no transition from " + to_string(s) + " on " + std::string(to_string(e));
}

}  // namespace

SessionState advance(const SessionState& state, SessionEvent event) {
  if (auto next = successor(state, event)) return *next;
  throw IllegalTransition(illegal_detail(state, event));
}

bool is_legal(const SessionState& state, SessionEvent event) {
  return successor(state, event).has_value();
}

void validate_trial_plan(const TrialPlan& plan) {
  if (static_cast<int>(plan.trials.size()) != kTrialsPerPlan) {
    throw InvalidTrialPlan("plan has " + std::to_string(plan.trials.size()) +
                           " trials, expected " + std::to_string(kTrialsPerPlan));
  }
  std::array<int, kTrialsPerPlan> seen{};
  std::set<std::string> scenarios;
  for (std::size_t i = 0; i < plan.trials.size(); ++i) {
    const Trial& t = plan.trials[i];
    if (t.trial_index != static_cast<int>(i)) {
      throw InvalidTrialPlan("trial at position " + std::to_string(i) +
                             " has trial_index " + std::to_string(t.trial_index));
    }
    if (++seen[condition_index(t.condition)] > 1) {
      throw InvalidTrialPlan("condition " + to_string(t.condition) + " appears twice");
    }
    if (!scenarios.insert(t.scenario_id).second) {
      throw InvalidTrialPlan("scenario '" + t.scenario_id + "' appears twice");
    }
  }
}

Session::Session(std::string session_id, std::string participant_id, TrialPlan plan)
    : id_(std::move(session_id)),
      participant_id_(std::move(participant_id)),
      plan_(std::move(plan)) {
  validate_trial_plan(plan_);
}

bool Session::finished() const {
  return state_.phase == Phase::TrialComplete && is_final_trial();
}

const SessionState& Session::apply(SessionEvent event) {
  SessionState next = advance(state_, event);
  if (state_.phase == Phase::TrialComplete && event == SessionEvent::AgentSpoke) {
    if (is_final_trial()) {
      throw IllegalTransition("session " + id_ + " has completed its final trial");
    }
    ++trial_index_;
    initial_pos_.reset();
    initial_count_ = 0;
    mediated_this_trial_ = false;
  }
  if (next.phase == Phase::Mediating) mediated_this_trial_ = true;
  if (next.phase == Phase::SpeakingExtension && !mediated_this_trial_) {
    throw IllegalTransition("SpeakingExtension without Mediating in trial " +
                            std::to_string(trial_index_));
  }
  if (next.phase == Phase::TrialComplete && initial_count_ != 1) {
    throw IllegalTransition("trial " + std::to_string(trial_index_) + " has " +
                            std::to_string(initial_count_) + " initial utterances");
  }
  state_ = next;
  return state_;
}

const Utterance& Session::add_utterance(SpeakerOrigin origin, std::string text,
                                        std::optional<std::string> audio_ref,
                                        Millis created_at, std::string utterance_id) {
  if (text.empty()) throw ValidationError("finalized utterance has empty text");
  if (created_at < last_created_at_) {
    throw ValidationError("utterance created_at " + std::to_string(created_at) +
                          " precedes " + std::to_string(last_created_at_));
  }
  if (utterance_id.empty()) {
    utterance_id = id_ + "/u" + std::to_string(utterances_.size());
  }
  if (find_utterance(utterance_id)) {
    throw ValidationError("utterance id '" + utterance_id + "' already used");
  }
  last_created_at_ = created_at;
  Utterance u;
  u.utterance_id = std::move(utterance_id);
  u.session_id = id_;
  u.origin = origin;
  u.text = std::move(text);
  u.audio_ref = std::move(audio_ref);
  u.created_at = created_at;
  utterances_.push_back(std::move(u));
  if (origin == SpeakerOrigin::Participant) {
    if (!initial_pos_) initial_pos_ = utterances_.size() - 1;
    ++initial_count_;
  }
  return utterances_.back();
}

const Utterance* Session::find_utterance(std::string_view id) const {
  auto it = std::find_if(utterances_.begin(), utterances_.end(),
                         [&](const Utterance& u) { return u.utterance_id == id; });
  return it == utterances_.end() ? nullptr : &*it;
}

const Utterance* Session::initial_utterance() const {
  return initial_pos_ ? &utterances_[*initial_pos_] : nullptr;
}

Session new_session(const std::string& participant_id, TrialPlan plan) {
  static std::atomic<std::uint64_t> counter{0};
  return Session("session-" + participant_id + "-" + std::to_string(counter++),
                 participant_id, std::move(plan));
}

}  // namespace proxyme
