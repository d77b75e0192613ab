#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "helpers.hpp"
#include "proxyme/errors.hpp"
#include "proxyme/session.hpp"

using namespace proxyme;

namespace {

// Independent restatement of the transition table used as an oracle.
std::optional<SessionState> oracle(const SessionState& s, SessionEvent e) {
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

std::vector<SessionState> all_states() {
  std::vector<SessionState> out;
  for (Phase p : {Phase::Idle, Phase::AgentPrompting, Phase::ListeningInitial,
                  Phase::AwaitingFollowup, Phase::Mediating, Phase::SpeakingExtension,
                  Phase::CollectingSelfReport, Phase::TrialComplete}) {
    out.push_back({p});
  }
  out.push_back(SessionState::paused(Phase::Mediating));
  out.push_back(SessionState::paused(Phase::SpeakingExtension));
  return out;
}

}  // namespace

TEST_CASE("advance matches the transition table for every state and event") {
  for (const auto& s : all_states()) {
    for (SessionEvent e : kAllEvents) {
      CAPTURE(to_string(s));
      CAPTURE(to_string(e));
      const auto expected = oracle(s, e);
      CHECK(is_legal(s, e) == expected.has_value());
      if (expected) {
        CHECK(advance(s, e) == *expected);
      } else {
        CHECK_THROWS_AS(advance(s, e), IllegalTransition);
      }
    }
  }
}

TEST_CASE("listed transitions") {
  CHECK(advance({Phase::ListeningInitial}, SessionEvent::InitialUtteranceFinalized).phase ==
        Phase::AwaitingFollowup);
  const auto paused = advance({Phase::Mediating}, SessionEvent::PauseRequested);
  CHECK(paused == SessionState::paused(Phase::Mediating));
  CHECK(advance(paused, SessionEvent::ResumeRequested).phase == Phase::Mediating);
  CHECK_THROWS_AS(advance({Phase::Idle}, SessionEvent::PlaybackFinished), IllegalTransition);
}

TEST_CASE("pause then resume is the identity on Mediating and SpeakingExtension") {
  for (Phase p : {Phase::Mediating, Phase::SpeakingExtension}) {
    const SessionState s{p};
    CHECK(advance(advance(s, SessionEvent::PauseRequested), SessionEvent::ResumeRequested) == s);
  }
}

TEST_CASE("new_session validates the trial plan") {
  SUBCASE("valid plan starts Idle at trial 0") {
    Session s = new_session("p1", test::canonical_plan());
    CHECK(s.state().phase == Phase::Idle);
    CHECK(s.trial_index() == 0);
    CHECK(new_session("p1", test::canonical_plan()).id() != s.id());
  }
  SUBCASE("five trials") {
    auto plan = test::canonical_plan();
    plan.trials.pop_back();
    CHECK_THROWS_AS(new_session("p1", plan), InvalidTrialPlan);
  }
  SUBCASE("duplicated condition, every position pair") {
    for (int i = 0; i < kTrialsPerPlan; ++i) {
      for (int j = 0; j < kTrialsPerPlan; ++j) {
        if (i == j) continue;
        auto plan = test::canonical_plan();
        plan.trials[j].condition = plan.trials[i].condition;
        std::set<int> seen;
        for (const auto& t : plan.trials) seen.insert(condition_index(t.condition));
        REQUIRE(seen.size() < 6);
        CHECK_THROWS_AS(new_session("p1", plan), InvalidTrialPlan);
      }
    }
  }
  SUBCASE("repeated scenario and misnumbered trial") {
    auto plan = test::canonical_plan();
    plan.trials[3].scenario_id = plan.trials[0].scenario_id;
    CHECK_THROWS_AS(new_session("p1", plan), InvalidTrialPlan);
    plan = test::canonical_plan();
    plan.trials[2].trial_index = 5;
    CHECK_THROWS_AS(new_session("p1", plan), InvalidTrialPlan);
  }
}

namespace {

void run_trial(Session& s, Millis& t) {
  s.apply(SessionEvent::AgentSpoke);
  s.apply(SessionEvent::PlaybackFinished);
  s.add_utterance(SpeakerOrigin::Participant, "I would help.", std::nullopt, t++);
  s.apply(SessionEvent::InitialUtteranceFinalized);
  s.apply(SessionEvent::MediationStarted);
  s.apply(SessionEvent::FollowupAsked);
  s.apply(SessionEvent::FirstAudioChunk);
  s.apply(SessionEvent::PlaybackFinished);
  s.apply(SessionEvent::SelfReportSubmitted);
}

}  // namespace

TEST_CASE("a session runs six trials and then accepts nothing") {
  Session s("sess", "p", test::canonical_plan());
  Millis t = 0;
  for (int k = 0; k < kTrialsPerPlan; ++k) {
    run_trial(s, t);
    CHECK(s.trial_index() == k);
    CHECK(s.state().phase == Phase::TrialComplete);
  }
  CHECK(s.finished());
  for (SessionEvent e : kAllEvents) CHECK_THROWS_AS(s.apply(e), IllegalTransition);
}

TEST_CASE("TrialComplete requires exactly one initial utterance") {
  for (int utterances : {0, 2}) {
    CAPTURE(utterances);
    Session s("sess", "p", test::canonical_plan());
    s.apply(SessionEvent::AgentSpoke);
    s.apply(SessionEvent::PlaybackFinished);
    for (int i = 0; i < utterances; ++i) {
      s.add_utterance(SpeakerOrigin::Participant, "again", std::nullopt, i);
    }
    s.apply(SessionEvent::InitialUtteranceFinalized);
    s.apply(SessionEvent::MediationStarted);
    s.apply(SessionEvent::FirstAudioChunk);
    s.apply(SessionEvent::PlaybackFinished);
    CHECK_THROWS_AS(s.apply(SessionEvent::SelfReportSubmitted), IllegalTransition);
    CHECK(s.state().phase == Phase::CollectingSelfReport);
  }
}

TEST_CASE("utterance bookkeeping") {
  Session s("sess", "p", test::canonical_plan());
  CHECK_THROWS_AS(s.add_utterance(SpeakerOrigin::Participant, "", std::nullopt, 0), ValidationError);
  const auto& u = s.add_utterance(SpeakerOrigin::Participant, "first", std::nullopt, 10);
  CHECK(u.utterance_id == "sess/u0");
  CHECK_THROWS_AS(s.add_utterance(SpeakerOrigin::Agent, "late", std::nullopt, 5), ValidationError);
  CHECK_THROWS_AS(s.add_utterance(SpeakerOrigin::Agent, "dup", std::nullopt, 11, "sess/u0"),
                  ValidationError);
  s.add_utterance(SpeakerOrigin::Participant, "second", std::nullopt, 12);
  CHECK(s.initial_utterance()->text == "first");
  CHECK(s.initial_utterance_count() == 2);
  CHECK(s.find_utterance("sess/u1")->text == "second");
  CHECK(s.find_utterance("nope") == nullptr);
}

TEST_CASE("random event sequences keep the session invariants") {
  std::mt19937_64 rng(20261019);
  int completed_trials = 0;
  for (int run = 0; run < 500; ++run) {
    Session s("rand", "p", test::canonical_plan());
    Millis t = 0;
    int trial = 0;
    bool mediated = false;
    for (int step = 0; step < 400 && !s.finished(); ++step) {
      const SessionState before = s.state();
      std::vector<SessionEvent> legal;
      for (SessionEvent e : kAllEvents) {
        if (is_legal(before, e)) legal.push_back(e);
      }
      REQUIRE_FALSE(legal.empty());
      // Occasionally try an illegal one: it must throw and leave state alone.
      if (rng() % 8 == 0) {
        const SessionEvent e = kAllEvents[rng() % std::size(kAllEvents)];
        if (!is_legal(before, e)) {
          CHECK_THROWS(s.apply(e));
          CHECK(s.state() == before);
          continue;
        }
      }
      const SessionEvent e = legal[rng() % legal.size()];
      if (e == SessionEvent::InitialUtteranceFinalized) {
        s.add_utterance(SpeakerOrigin::Participant, "text", std::nullopt, t++);
      }
      s.apply(e);
      if (s.trial_index() != trial) {
        trial = s.trial_index();
        mediated = false;
      }
      if (s.state().phase == Phase::Mediating) mediated = true;
      if (s.state().phase == Phase::SpeakingExtension) CHECK(mediated);
      if (s.state().phase == Phase::TrialComplete) {
        CHECK(s.initial_utterance_count() == 1);
        ++completed_trials;
      }
    }
  }
  CHECK(completed_trials > 0);
}
