#include "proxyme/gateway.hpp"

#include <algorithm>
#include <cstdio>

#include "proxyme/util.hpp"

namespace proxyme {

using namespace protocol;

namespace {

struct Connection {
  Role role = Role::Participant;
  bool joined = false;
  std::string session_id;
  std::optional<std::int64_t> last_seq;
  std::int64_t next_out = 0;
};

struct ActiveRun {
  std::shared_ptr<MediationRun> run;
  int number = 0;
  std::string stream_id;
  std::string response_id;
  std::string provenance_id;
  AutonomyLevel autonomy = AutonomyLevel::AutoSpeak;
  bool released = false;
  Millis released_at = 0;
  bool source_bound = false;

  // Stage whose Started went out but whose Finished has not.
  std::optional<StageKind> stage;
  bool executing = false;
  Millis stage_started_at = 0;
  std::optional<Millis> stage_ready_at;
  Millis stage_latency = 0;
  bool failed = false;

  std::optional<std::string> modified_text;
  std::vector<std::pair<AudioChunk, Millis>> produced;  // chunk, absolute availability
  std::size_t next_enqueue = 0;
  OutboundStream stream{""};
  bool first_audio = false;
  bool tts_finished = false;
  std::vector<std::int64_t> played;
};

struct SessionRuntime {
  SessionRuntime(Session s, SessionLog l, AdapterSet a, int idx, Millis o)
      : session(std::move(s)), log(std::move(l)), adapters(std::move(a)),
        participant_index(idx), origin(o) {}

  Session session;
  SessionLog log;
  AdapterSet adapters;
  int participant_index;
  Millis origin;
  std::vector<ConnectionId> conns;
  std::optional<Millis> prompt_done_at;
  std::optional<MediationRequest> request;
  std::optional<ActiveRun> run;
  int run_counter = 0;
  int aborted_this_trial = 0;
  std::optional<MediatedResponse> response;
  AutonomyLevel response_autonomy = AutonomyLevel::AutoSpeak;
  std::vector<RunSummary> history;
};

struct StageJob {
  std::string session_id;
  int run_number = 0;
  std::shared_ptr<MediationRun> run;
  std::optional<StageReport> report;
  std::optional<StageError> error;
};

std::string padded(int n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", n);
  return buf;
}

}  // namespace

struct Gateway::Impl {
  Impl(GatewayConfig c, ScenarioPool s, std::optional<Questionnaire> q, AdapterFactory f,
       const Clock& clk, ProvenanceLedger& l)
      : config(std::move(c)), scenarios(std::move(s)), questionnaire(std::move(q)),
        factory(std::move(f)), clock(clk), ledger(l) {}

  GatewayConfig config;
  ScenarioPool scenarios;
  std::optional<Questionnaire> questionnaire;
  AdapterFactory factory;
  const Clock& clock;
  ProvenanceLedger& ledger;

  mutable std::mutex state_mutex;
  std::mutex pump_mutex;
  ConnectionId next_conn = 1;
  std::map<ConnectionId, Connection> conns;
  std::map<std::string, std::unique_ptr<SessionRuntime>> sessions;

  // --- emission --------------------------------------------------------------

  void emit(std::vector<Outbound>& out, ConnectionId to, const std::string& session_id,
            Payload payload) {
    auto it = conns.find(to);
    if (it == conns.end()) return;
    out.push_back({to, Envelope{session_id, it->second.next_out++, std::move(payload)}});
  }

  template <class Pred>
  void broadcast(std::vector<Outbound>& out, SessionRuntime& s, const Payload& payload,
                 Pred include) {
    for (ConnectionId c : s.conns) {
      auto it = conns.find(c);
      if (it != conns.end() && include(it->second.role)) emit(out, c, s.session.id(), payload);
    }
  }

  void broadcast(std::vector<Outbound>& out, SessionRuntime& s, const Payload& payload) {
    broadcast(out, s, payload, [](Role) { return true; });
  }

  void error_to(std::vector<Outbound>& out, ConnectionId to, const std::string& session_id,
                const std::string& code, const std::string& detail,
                std::optional<std::int64_t> seq) {
    emit(out, to, session_id, ProtocolError{code, detail, seq});
  }

  Millis local_now(const SessionRuntime& s) const { return clock.now_ms() - s.origin; }

  // --- trials and runs -------------------------------------------------------

  const ScenarioScript& scenario_of(const SessionRuntime& s) const {
    const ScenarioScript* sc = find_scenario(scenarios, s.session.current_trial().scenario_id);
    if (!sc) throw ValidationError("scenario '" + s.session.current_trial().scenario_id + "' missing");
    return *sc;
  }

  void start_trial(std::vector<Outbound>& out, SessionRuntime& s) {
    s.session.apply(SessionEvent::AgentSpoke);
    const Trial& trial = s.session.current_trial();
    const ScenarioScript& sc = scenario_of(s);
    s.request.reset();
    s.run.reset();
    s.response.reset();
    s.aborted_this_trial = 0;
    broadcast(out, s, AssignCondition{trial.trial_index, trial.condition});
    broadcast(out, s, AgentPrompt{sc.scenario_id, sc.agent_opening, sc.agent_voice_ref});
    s.prompt_done_at = clock.now_ms() + speech_duration_ms(sc.agent_opening, config.words_per_minute);
  }

  void start_run(SessionRuntime& s) {
    const int n = s.run_counter++;
    ActiveRun r;
    r.number = n;
    r.stream_id = s.session.id() + "-s" + std::to_string(n);
    r.response_id = s.session.id() + "/x" + std::to_string(n);
    r.provenance_id = "prov-" + s.session.id() + "-r" + std::to_string(n);
    r.autonomy = s.session.autonomy();
    r.source_bound = !s.request->source_utterance.utterance_id.empty();
    r.run = std::make_shared<MediationRun>(*s.request, s.adapters, r.stream_id);
    r.stream = OutboundStream(r.stream_id, config.buffer_depth);
    s.run = std::move(r);
  }

  void abort_run(SessionRuntime& s) {
    ActiveRun& r = *s.run;
    if (r.source_bound) {
      ledger.append(make_provenance_record(r.run->request(), r.provenance_id, r.response_id,
                                           r.modified_text.value_or(std::string()), true,
                                           local_now(s)));
    }
    s.history.push_back({r.stream_id, s.session.trial_index(), true, false, r.played});
    s.run.reset();
    ++s.aborted_this_trial;
  }

  void complete_run(SessionRuntime& s) {
    ActiveRun& r = *s.run;
    const Millis now = local_now(s);
    MediatedResponse resp;
    resp.transcript = r.run->transcript()->text;
    resp.modified_text = r.run->modified()->text;
    for (const auto& [chunk, at] : r.produced) resp.chunks.push_back(chunk);
    resp.trace = r.run->trace();
    resp.provenance_id = r.provenance_id;
    resp.response_utterance = s.session.add_utterance(SpeakerOrigin::AvatarExtension,
                                                      resp.modified_text, r.stream_id, now,
                                                      r.response_id);
    ledger.append(make_provenance_record(r.run->request(), r.provenance_id, r.response_id,
                                         resp.modified_text, false, now));
    s.history.push_back({r.stream_id, s.session.trial_index(), false, true, r.played});
    s.response = std::move(resp);
    s.response_autonomy = r.autonomy;
    s.run.reset();
  }

  // --- time-driven progress ----------------------------------------------------

  void progress(std::vector<Outbound>& out, SessionRuntime& s, Millis now,
                std::vector<StageJob>& jobs) {
    for (bool changed = true; changed;) {
      changed = false;
      const Phase phase = s.session.state().phase;

      if (phase == Phase::AgentPrompting && s.prompt_done_at && now >= *s.prompt_done_at) {
        s.session.apply(SessionEvent::PlaybackFinished);
        s.prompt_done_at.reset();
        changed = true;
        continue;
      }
      if (!s.run) return;
      ActiveRun& r = *s.run;
      const bool paused = phase == Phase::Paused;

      if (r.stage && !r.executing && r.stage_ready_at && now >= *r.stage_ready_at) {
        const StageKind stage = *r.stage;
        broadcast(out, s, MediationStatus{stage, StageState::Finished, r.stage_latency});
        if (stage == StageKind::Llm) {
          const bool preview = r.autonomy == AutonomyLevel::PreviewBeforeSpeak;
          broadcast(out, s,
                    MediatedText{r.stream_id, r.run->request().source_utterance.text,
                                 *r.modified_text, r.provenance_id,
                                 derive_edit_script(r.run->request().source_utterance.text,
                                                    *r.modified_text),
                                 preview},
                    [](Role role) { return role != Role::Participant; });
        }
        if (stage == StageKind::Tts) {
          r.tts_finished = true;
          const LatencyTrace trace = r.run->trace();
          broadcast(out, s,
                    LatencyReport{trace, config.masking_window_ms,
                                  compute_perceived_gap(trace, config.masking_window_ms)});
        }
        r.stage.reset();
        r.stage_ready_at.reset();
        changed = true;
      }

      if (!paused && !r.stage && !r.failed && r.run->next_stage()) {
        const StageKind stage = *r.run->next_stage();
        broadcast(out, s, MediationStatus{stage, StageState::Started, 0});
        r.stage = stage;
        r.executing = true;
        r.stage_started_at = now;
        jobs.push_back({s.session.id(), r.number, r.run, std::nullopt, std::nullopt});
      }

      const bool may_play = r.autonomy == AutonomyLevel::AutoSpeak || r.released;
      if (may_play) {
        while (r.next_enqueue < r.produced.size() && r.produced[r.next_enqueue].second <= now) {
          const auto& [chunk, at] = r.produced[r.next_enqueue++];
          r.stream.enqueue(chunk, r.released ? std::max(at, r.released_at) : at);
          if (paused && r.stream.state() == StreamState::Draining) r.stream.pause();
        }
      }
      if (!paused && may_play) {
        for (const auto& d : r.stream.dispatch_due(now)) {
          broadcast(out, s,
                    AudioChunkMsg{d.chunk.stream_id, d.chunk.seq, base64_encode(d.chunk.payload),
                                  d.chunk.duration_ms, d.chunk.is_final});
          r.played.push_back(d.chunk.seq);
          if (!r.first_audio) {
            r.first_audio = true;
            s.session.apply(SessionEvent::FirstAudioChunk);
          }
          changed = true;
        }
        if (r.stream.state() == StreamState::Done && r.tts_finished &&
            s.session.state().phase == Phase::SpeakingExtension &&
            now >= r.stream.playback_end_at().value_or(now)) {
          complete_run(s);
          s.session.apply(SessionEvent::PlaybackFinished);
          return;
        }
      }
    }
  }

  void apply_job(std::vector<Outbound>& out, StageJob& job) {
    auto it = sessions.find(job.session_id);
    if (it == sessions.end()) return;
    SessionRuntime& s = *it->second;
    if (!s.run || s.run->number != job.run_number) return;  // restarted meanwhile
    ActiveRun& r = *s.run;
    r.executing = false;
    if (job.error) {
      r.failed = true;
      r.stage.reset();
      broadcast(out, s,
                ProtocolError{job.error->code(),
                              std::string(to_string(job.error->stage())) + " stage failed: " +
                                  job.error->what(),
                              std::nullopt});
      return;
    }
    r.stage_latency = job.report->latency_ms;
    r.stage_ready_at = r.stage_started_at + r.stage_latency;
    switch (job.report->stage) {
      case StageKind::Stt:
        if (!r.source_bound) {
          // Audio-only input: the utterance exists once it has a transcript.
          const Utterance& u = s.session.add_utterance(
              SpeakerOrigin::Participant, r.run->transcript()->text,
              s.request->source_utterance.audio_ref, local_now(s));
          ledger.register_source(u);
          s.request->source_utterance = u;
          r.run->bind_source(u);
          r.source_bound = true;
        }
        break;
      case StageKind::Llm:
        r.modified_text = r.run->modified()->text;
        break;
      case StageKind::Tts: {
        const SynthesisResult& syn = *r.run->synthesis();
        for (std::size_t k = 0; k < syn.chunks.size(); ++k) {
          r.produced.emplace_back(syn.chunks[k], r.stage_started_at + syn.produced_at_ms[k]);
        }
        break;
      }
    }
  }

  // --- message handlers -------------------------------------------------------

  SessionRuntime& joined_session(const Connection& c) {
    if (!c.joined) throw UnknownSession("connection has not joined a session");
    auto it = sessions.find(c.session_id);
    if (it == sessions.end()) throw UnknownSession("session '" + c.session_id + "' not found");
    return *it->second;
  }

  static void require_role(const Connection& c, Role role, std::string_view what) {
    if (c.role != role) {
      throw UnauthorizedRole(std::string(what) + " requires the " + std::string(to_string(role)) +
                             " role, connection is " + std::string(to_string(c.role)));
    }
  }

  void attach(ConnectionId id, Connection& c, SessionRuntime& s) {
    c.joined = true;
    c.session_id = s.session.id();
    s.conns.push_back(id);
  }

  void on_join(std::vector<Outbound>& out, ConnectionId id, Connection& c, const Envelope& env,
               const JoinSession& p) {
    if (c.joined) throw ValidationError("connection already joined " + c.session_id);
    c.role = p.role;
    if (p.role != Role::Participant) {
      auto it = sessions.find(env.session_id);
      if (it == sessions.end()) throw UnknownSession("session '" + env.session_id + "' not found");
      SessionRuntime& s = *it->second;
      attach(id, c, s);
      const Trial& trial = s.session.current_trial();
      emit(out, id, s.session.id(), AssignCondition{trial.trial_index, trial.condition});
      return;
    }
    if (!p.participant_index) throw ValidationError("Participant join needs participant_index");
    const int idx = *p.participant_index;
    std::string sid = env.session_id.empty()
                          ? config.session_prefix + "-p" + padded(idx)
                          : env.session_id;
    if (auto it = sessions.find(sid); it != sessions.end()) {
      attach(id, c, *it->second);
      const Trial& trial = it->second->session.current_trial();
      emit(out, id, sid, AssignCondition{trial.trial_index, trial.condition});
      return;
    }
    if (!env.session_id.empty()) throw UnknownSession("session '" + sid + "' not found");
    TrialPlan plan = plan_for(idx, scenarios);
    auto rt = std::make_unique<SessionRuntime>(
        Session(sid, "participant-" + padded(idx), std::move(plan)),
        SessionLog(sid, config.data_dir), factory(idx), idx, clock.now_ms());
    SessionRuntime& s = *rt;
    sessions.emplace(sid, std::move(rt));
    attach(id, c, s);
    start_trial(out, s);
  }

  void on_utterance(std::vector<Outbound>& out, Connection& c, const UserUtterance& p) {
    require_role(c, Role::Participant, "UserUtterance");
    SessionRuntime& s = joined_session(c);
    if (!is_legal(s.session.state(), SessionEvent::InitialUtteranceFinalized)) {
      advance(s.session.state(), SessionEvent::InitialUtteranceFinalized);  // throws
    }
    if (!p.is_final) return;

    MediationRequest req;
    std::optional<std::vector<std::uint8_t>> audio;
    if (p.audio_b64) audio = base64_decode(*p.audio_b64);
    if (p.text && p.text->find_first_not_of(" \t\r\n") == std::string::npos) {
      if (!audio) throw ValidationError("final utterance has empty text");
    }

    const Trial& trial = s.session.current_trial();
    const ScenarioScript& sc = scenario_of(s);
    s.session.apply(SessionEvent::InitialUtteranceFinalized);
    const Millis now = local_now(s);
    const std::optional<std::string> audio_ref =
        audio ? std::optional<std::string>(s.session.id() + "/audio" + std::to_string(trial.trial_index))
              : std::nullopt;
    if (p.text && !p.text->empty()) {
      const Utterance& u =
          s.session.add_utterance(SpeakerOrigin::Participant, *p.text, audio_ref, now);
      ledger.register_source(u);
      req.source_utterance = u;
    } else {
      req.source_utterance.session_id = s.session.id();
      req.source_utterance.origin = SpeakerOrigin::Participant;
      req.source_utterance.audio_ref = audio_ref;
      req.source_utterance.created_at = now;
      req.source_audio = std::move(audio);
    }
    req.condition = trial.condition;
    req.scenario_id = trial.scenario_id;
    req.prompt_template = sc.template_for(trial.condition.content);
    req.streaming = config.streaming;
    req.chunk_ms = config.chunk_ms;
    req.voice_sample_ref = config.voice_sample_ref;
    s.request = std::move(req);

    start_run(s);
    s.session.apply(SessionEvent::MediationStarted);
    broadcast(out, s, AgentPrompt{sc.scenario_id, sc.agent_followup, std::nullopt});
    s.session.apply(SessionEvent::FollowupAsked);
  }

  void on_control(std::vector<Outbound>& out, Connection& c, const Control& p) {
    require_role(c, Role::Operator, "Control");
    SessionRuntime& s = joined_session(c);
    const Millis now = clock.now_ms();
    switch (p.action) {
      case ControlAction::Pause:
        s.session.apply(SessionEvent::PauseRequested);
        if (s.run && s.run->stream.state() == StreamState::Draining) s.run->stream.pause();
        break;
      case ControlAction::Resume:
        s.session.apply(SessionEvent::ResumeRequested);
        if (s.run && s.run->stream.state() == StreamState::Paused) s.run->stream.resume(now);
        break;
      case ControlAction::Restart: {
        const Phase ph = s.session.state().phase;
        if (!s.run || !is_legal(s.session.state(), SessionEvent::RestartRequested)) {
          throw NoActiveMediation("no mediation to restart in " + std::string(to_string(ph)));
        }
        abort_run(s);
        s.session.apply(SessionEvent::RestartRequested);
        start_run(s);
        break;
      }
      case ControlAction::SetAutonomy:
        s.session.set_autonomy(*p.autonomy);
        break;
    }
    (void)out;
  }

  void on_release(Connection& c, const ReleasePreview& p) {
    require_role(c, Role::Operator, "ReleasePreview");
    SessionRuntime& s = joined_session(c);
    if (!s.run || s.run->stream_id != p.stream_id) {
      throw ValidationError("no active stream '" + p.stream_id + "'");
    }
    if (s.run->autonomy != AutonomyLevel::PreviewBeforeSpeak || s.run->released) {
      throw InvalidStreamState("stream '" + p.stream_id + "' is not awaiting release");
    }
    s.run->released = true;
    s.run->released_at = clock.now_ms();
  }

  void on_self_report(std::vector<Outbound>& out, Connection& c, const SelfReportSubmit& p) {
    require_role(c, Role::Participant, "SelfReportSubmit");
    SessionRuntime& s = joined_session(c);
    if (!is_legal(s.session.state(), SessionEvent::SelfReportSubmitted)) {
      advance(s.session.state(), SessionEvent::SelfReportSubmitted);  // throws
    }
    const Trial& trial = s.session.current_trial();
    TrialOutcome o;
    o.trial = trial;
    o.participant_index = s.participant_index;
    o.initial_utterance = *s.session.initial_utterance();
    o.mediated_response = *s.response;
    o.self_report = SelfReport{s.session.id() + "#" + std::to_string(trial.trial_index), p.items,
                               p.free_text};
    o.streaming = config.streaming;
    o.chunk_ms = config.chunk_ms;
    o.masking_window_ms = config.masking_window_ms;
    o.aborted_runs = s.aborted_this_trial;
    o.autonomy = s.response_autonomy;
    o.completed_at = local_now(s);
    record_trial(s.log, o, questionnaire ? &*questionnaire : nullptr);
    s.session.apply(SessionEvent::SelfReportSubmitted);
    if (!s.session.finished()) start_trial(out, s);
  }

  void route(std::vector<Outbound>& out, ConnectionId id, Connection& c, const Envelope& env) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, JoinSession>) {
            on_join(out, id, c, env, p);
          } else if constexpr (std::is_same_v<T, UserUtterance>) {
            on_utterance(out, c, p);
          } else if constexpr (std::is_same_v<T, Control>) {
            on_control(out, c, p);
          } else if constexpr (std::is_same_v<T, ReleasePreview>) {
            on_release(c, p);
          } else if constexpr (std::is_same_v<T, SelfReportSubmit>) {
            on_self_report(out, c, p);
          } else {
            throw UnauthorizedRole(std::string(env.type()) + " is sent by the server only");
          }
        },
        env.payload);
  }
};

Gateway::Gateway(GatewayConfig config, ScenarioPool scenarios,
                 std::optional<Questionnaire> questionnaire, AdapterFactory adapters,
                 const Clock& clock, ProvenanceLedger& ledger)
    : impl_(std::make_unique<Impl>(config, std::move(scenarios), std::move(questionnaire),
                                   std::move(adapters), clock, ledger)),
      config_(std::move(config)) {}

Gateway::~Gateway() = default;

ConnectionId Gateway::connect() {
  std::lock_guard lock(impl_->state_mutex);
  const ConnectionId id = impl_->next_conn++;
  impl_->conns.emplace(id, Connection{});
  return id;
}

void Gateway::disconnect(ConnectionId id) {
  std::lock_guard lock(impl_->state_mutex);
  auto it = impl_->conns.find(id);
  if (it == impl_->conns.end()) return;
  if (it->second.joined) {
    if (auto s = impl_->sessions.find(it->second.session_id); s != impl_->sessions.end()) {
      auto& v = s->second->conns;
      v.erase(std::remove(v.begin(), v.end(), id), v.end());
    }
  }
  impl_->conns.erase(it);
}

std::vector<Outbound> Gateway::handle_frame(ConnectionId from, std::string_view frame) {
  try {
    return handle(from, decode(frame));
  } catch (const DecodeError& e) {
    std::lock_guard lock(impl_->state_mutex);
    std::vector<Outbound> out;
    auto it = impl_->conns.find(from);
    const std::string sid = it == impl_->conns.end() ? std::string() : it->second.session_id;
    impl_->error_to(out, from, sid, e.code(), e.what(), e.offending_seq());
    return out;
  }
}

std::vector<Outbound> Gateway::handle(ConnectionId from, const Envelope& env) {
  std::lock_guard lock(impl_->state_mutex);
  std::vector<Outbound> out;
  auto it = impl_->conns.find(from);
  if (it == impl_->conns.end()) return out;
  Connection& c = it->second;
  if (c.last_seq && env.seq <= *c.last_seq) {
    impl_->error_to(out, from, c.session_id, "BadSeq",
                    "seq " + std::to_string(env.seq) + " does not exceed " +
                        std::to_string(*c.last_seq),
                    env.seq);
    return out;
  }
  c.last_seq = env.seq;
  try {
    impl_->route(out, from, c, env);
  } catch (const Error& e) {
    impl_->error_to(out, from, c.session_id, e.code(), e.what(), env.seq);
  }
  return out;
}

std::vector<Outbound> Gateway::pump() {
  std::lock_guard pump_lock(impl_->pump_mutex);
  std::vector<Outbound> out;
  for (;;) {
    std::vector<StageJob> jobs;
    {
      std::lock_guard lock(impl_->state_mutex);
      const Millis now = impl_->clock.now_ms();
      for (auto& [id, s] : impl_->sessions) {
        try {
          impl_->progress(out, *s, now, jobs);
        } catch (const Error& e) {
          impl_->broadcast(out, *s, ProtocolError{e.code(), e.what(), std::nullopt});
        }
      }
    }
    if (jobs.empty()) break;
    for (auto& job : jobs) {
      try {
        job.report = job.run->step();
      } catch (const StageError& e) {
        job.error = e;
      }
    }
    std::lock_guard lock(impl_->state_mutex);
    for (auto& job : jobs) impl_->apply_job(out, job);
  }
  return out;
}

std::optional<Millis> Gateway::next_deadline() const {
  std::lock_guard lock(impl_->state_mutex);
  std::optional<Millis> best;
  const auto consider = [&](std::optional<Millis> t) {
    if (t && (!best || *t < *best)) best = t;
  };
  const Millis now = impl_->clock.now_ms();
  for (const auto& [id, sp] : impl_->sessions) {
    const SessionRuntime& s = *sp;
    const Phase phase = s.session.state().phase;
    if (phase == Phase::AgentPrompting) consider(s.prompt_done_at);
    if (!s.run) continue;
    const ActiveRun& r = *s.run;
    const bool paused = phase == Phase::Paused;
    if (r.stage && !r.executing) consider(r.stage_ready_at);
    if (!paused && !r.stage && !r.failed && r.run->next_stage()) consider(now);
    if (paused) continue;
    const bool may_play = r.autonomy == AutonomyLevel::AutoSpeak || r.released;
    if (!may_play) continue;
    if (r.next_enqueue < r.produced.size()) consider(r.produced[r.next_enqueue].second);
    consider(r.stream.next_send_at());
    if (r.stream.state() == StreamState::Done && r.tts_finished) {
      consider(r.stream.playback_end_at());
    }
  }
  if (best && *best < now) best = now;
  return best;
}

std::vector<std::string> Gateway::session_ids() const {
  std::lock_guard lock(impl_->state_mutex);
  std::vector<std::string> out;
  for (const auto& [id, s] : impl_->sessions) out.push_back(id);
  return out;
}

std::optional<SessionState> Gateway::session_state(const std::string& session_id) const {
  std::lock_guard lock(impl_->state_mutex);
  auto it = impl_->sessions.find(session_id);
  if (it == impl_->sessions.end()) return std::nullopt;
  return it->second->session.state();
}

std::optional<int> Gateway::trial_index(const std::string& session_id) const {
  std::lock_guard lock(impl_->state_mutex);
  auto it = impl_->sessions.find(session_id);
  if (it == impl_->sessions.end()) return std::nullopt;
  return it->second->session.trial_index();
}

bool Gateway::session_finished(const std::string& session_id) const {
  std::lock_guard lock(impl_->state_mutex);
  auto it = impl_->sessions.find(session_id);
  return it != impl_->sessions.end() && it->second->session.finished();
}

std::vector<TrialLogEntry> Gateway::trial_log(const std::string& session_id) const {
  std::lock_guard lock(impl_->state_mutex);
  auto it = impl_->sessions.find(session_id);
  if (it == impl_->sessions.end()) return {};
  return it->second->log.entries();
}

std::vector<RunSummary> Gateway::runs(const std::string& session_id) const {
  std::lock_guard lock(impl_->state_mutex);
  auto it = impl_->sessions.find(session_id);
  if (it == impl_->sessions.end()) return {};
  std::vector<RunSummary> out = it->second->history;
  if (const auto& r = it->second->run) {
    out.push_back({r->stream_id, it->second->session.trial_index(), false, false, r->played});
  }
  return out;
}

std::vector<Utterance> Gateway::utterances(const std::string& session_id) const {
  std::lock_guard lock(impl_->state_mutex);
  auto it = impl_->sessions.find(session_id);
  if (it == impl_->sessions.end()) return {};
  return it->second->session.utterances();
}

std::optional<std::string> Gateway::session_of(ConnectionId id) const {
  std::lock_guard lock(impl_->state_mutex);
  auto it = impl_->conns.find(id);
  if (it == impl_->conns.end() || !it->second.joined) return std::nullopt;
  return it->second.session_id;
}

}  // namespace proxyme
