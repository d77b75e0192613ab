#include "proxyme/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "proxyme/clock.hpp"
#include "proxyme/json_io.hpp"
#include "proxyme/protocol.hpp"
#include "proxyme/util.hpp"

namespace proxyme {

using nlohmann::json;
using namespace protocol;

std::string simulation_prefix(std::uint64_t seed, bool streaming) {
  return "s" + std::to_string(seed) + (streaming ? "-streaming" : "-batch");
}

json to_json(const ReplayScript& script) {
  json messages = json::array();
  for (const auto& m : script.messages) messages.push_back({{"at_ms", m.at_ms}, {"frame", m.frame}});
  return {{"participant_index", script.participant_index},
          {"messages", std::move(messages)},
          {"explicit_stop", script.explicit_stop}};
}

ReplayScript replay_script_from_json(const json& j) {
  ReplayScript s;
  try {
    s.participant_index = j.at("participant_index").get<int>();
    for (const auto& m : j.at("messages")) {
      s.messages.push_back({m.at("at_ms").get<Millis>(), m.at("frame").get<std::string>()});
    }
    s.explicit_stop = j.value("explicit_stop", false);
  } catch (const json::exception& e) {
    throw ParseError(std::string("replay script: ") + e.what());
  }
  validate_replay_script(s);
  return s;
}

void validate_replay_script(const ReplayScript& script) {
  for (std::size_t i = 1; i < script.messages.size(); ++i) {
    if (script.messages[i].at_ms < script.messages[i - 1].at_ms) {
      throw ValidationError("replay script message " + std::to_string(i) + " goes back in time");
    }
  }
}

StageStats stage_stats(std::vector<Millis> values) {
  StageStats s;
  s.n = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (Millis v : values) sum += static_cast<double>(v);
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double sq = 0;
    for (Millis v : values) sq += (static_cast<double>(v) - s.mean) * (static_cast<double>(v) - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(s.n - 1));
  }
  const auto rank = [&](double p) {
    auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(s.n)));
    return values[std::clamp<std::size_t>(k, 1, s.n) - 1];
  };
  s.p50 = rank(0.50);
  s.p95 = rank(0.95);
  return s;
}

LatencySummary summarize(const std::vector<TrialLogEntry>& entries) {
  std::vector<Millis> stt, llm, first, total, e2e, tta;
  for (const auto& e : entries) {
    stt.push_back(e.trace.stt_ms);
    llm.push_back(e.trace.llm_ms);
    first.push_back(e.trace.tts_first_chunk_ms);
    total.push_back(e.trace.tts_total_ms);
    e2e.push_back(e.trace.end_to_end_ms);
    tta.push_back(e.trace.time_to_first_audio_ms);
  }
  return {stage_stats(stt),   stage_stats(llm), stage_stats(first),
          stage_stats(total), stage_stats(e2e), stage_stats(tta)};
}

namespace {

json stats_json(const StageStats& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"stddev", s.stddev}, {"p50", s.p50}, {"p95", s.p95}};
}

std::vector<std::pair<const char*, const StageStats*>> rows(const LatencySummary& s) {
  return {{"stt", &s.stt},
          {"llm", &s.llm},
          {"tts_first_chunk", &s.tts_first_chunk},
          {"tts_total", &s.tts_total},
          {"end_to_end", &s.end_to_end},
          {"time_to_first_audio", &s.time_to_first_audio}};
}

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

json to_json(const LatencySummary& summary) {
  json j = json::object();
  for (const auto& [name, stats] : rows(summary)) j[name] = stats_json(*stats);
  return j;
}

std::string summary_markdown(const LatencySummary& summary) {
  std::ostringstream s;
  s << "| stage | n | mean ms | stddev ms | p50 ms | p95 ms |\n"
    << "|---|---|---|---|---|---|\n";
  for (const auto& [name, st] : rows(summary)) {
    s << "| " << name << " | " << st->n << " | " << fixed1(st->mean) << " | "
      << fixed1(st->stddev) << " | " << st->p50 << " | " << st->p95 << " |\n";
  }
  return s.str();
}

namespace {

std::string padded(int n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", n);
  return buf;
}

/// The client side of one session: either a reactive simulated participant
/// or a player for a recorded script.
class Client {
 public:
  Client(const SimulationOptions& options, int participant, int trial_limit,
         const ReplayScript* script)
      : options_(options), participant_(participant), trial_limit_(trial_limit), script_(script) {
    if (script_) {
      for (const auto& m : script_->messages) pending_.push_back(m);
    } else {
      send(0, JoinSession{Role::Participant, participant});
    }
  }

  std::optional<Millis> next_at() const {
    if (pending_.empty()) return std::nullopt;
    return pending_.front().at_ms;
  }

  std::optional<ReplayMessage> pop_due(Millis now) {
    if (pending_.empty() || pending_.front().at_ms > now) return std::nullopt;
    ReplayMessage m = std::move(pending_.front());
    pending_.pop_front();
    return m;
  }

  /// Reacts to one server envelope at session-local time `now`.
  void observe(const Envelope& env, Millis now) {
    if (const auto* err = std::get_if<ProtocolError>(&env.payload)) {
      violations_.push_back("participant " + std::to_string(participant_) + ": " + err->code +
                            ": " + err->detail);
      failed_ = true;
      return;
    }
    if (script_ || stopping_) return;
    if (const auto* a = std::get_if<AssignCondition>(&env.payload)) {
      awaiting_opening_ = true;
      trial_ = a->trial_index;
    } else if (const auto* p = std::get_if<AgentPrompt>(&env.payload)) {
      if (!awaiting_opening_) return;
      awaiting_opening_ = false;
      const ScenarioScript* sc = find_scenario(options_.scenarios, p->scenario_id);
      std::string text = sc && sc->sample_response ? *sc->sample_response
                                                   : std::string("I am not sure what I would do.");
      UserUtterance u;
      u.is_final = true;
      if (options_.audio_input) {
        u.audio_b64 = base64_encode(make_audio_stub(text));
      } else {
        u.text = std::move(text);
      }
      send(now + speech_duration_ms(p->text, options_.words_per_minute) + 300, std::move(u));
    } else if (const auto* c = std::get_if<AudioChunkMsg>(&env.payload)) {
      if (!c->is_final) return;
      send(now + c->duration_ms + 500, self_report());
      if (++reported_ == trial_limit_ && trial_limit_ < kTrialsPerPlan) stopping_ = true;
    }
  }

  bool failed() const { return failed_; }
  /// No more client input will come and the session may be left as is.
  bool stopped() const {
    return pending_.empty() && (script_ ? script_->explicit_stop : stopping_);
  }
  bool explicit_stop() const { return stopping_; }
  const std::vector<ReplayMessage>& sent() const { return sent_; }
  std::vector<std::string>& violations() { return violations_; }

 private:
  void send(Millis at, Payload payload) {
    ReplayMessage m{at, encode(Envelope{"", seq_++, std::move(payload)})};
    auto pos = std::upper_bound(pending_.begin(), pending_.end(), at,
                                [](Millis t, const ReplayMessage& x) { return t < x.at_ms; });
    pending_.insert(pos, m);
    sent_.push_back(std::move(m));
  }

  SelfReportSubmit self_report() const {
    std::mt19937_64 rng(mix_seed(mix_seed(options_.seed, static_cast<std::uint64_t>(participant_)),
                                 0x73656c66ULL + static_cast<std::uint64_t>(trial_)));
    SelfReportSubmit r;
    const auto add = [&](std::string id, Construct c, int lo, int hi) {
      const int v = lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
      r.items.push_back({std::move(id), c, lo, hi, v});
    };
    if (options_.questionnaire) {
      for (const auto& q : *options_.questionnaire) add(q.item_id, q.construct, q.scale_min, q.scale_max);
    } else {
      add("agency", Construct::Agency, 1, 7);
      add("authorship", Construct::Authorship, 1, 7);
    }
    return r;
  }

  const SimulationOptions& options_;
  int participant_;
  int trial_limit_;
  const ReplayScript* script_;
  std::deque<ReplayMessage> pending_;
  std::vector<ReplayMessage> sent_;
  std::vector<std::string> violations_;
  std::int64_t seq_ = 0;
  int trial_ = 0;
  int reported_ = 0;
  bool awaiting_opening_ = false;
  bool stopping_ = false;
  bool failed_ = false;
};

GatewayConfig gateway_config_for(const SimulationOptions& o) {
  GatewayConfig g;
  g.streaming = o.streaming;
  g.chunk_ms = o.chunk_ms;
  g.buffer_depth = o.buffer_depth;
  g.masking_window_ms = o.masking_window_ms;
  g.words_per_minute = o.words_per_minute;
  g.data_dir = o.out_dir;
  g.session_prefix = simulation_prefix(o.seed, o.streaming);
  return g;
}

void remove_stale(const SimulationOptions& o, const std::string& sid) {
  if (!o.out_dir) return;
  for (const char* ext : {".log.jsonl", ".prov.jsonl", ".replay.json"}) {
    std::filesystem::remove(*o.out_dir / (sid + ext));
  }
}

/// Runs one session to completion, an explicit stop, or a failure.
void drive(const SimulationOptions& o, int participant, Client& client, ProvenanceLedger& ledger,
           SimulationResult& result) {
  VirtualClock virtual_clock;
  SteadyClock steady_clock;
  const Clock& clock = o.realtime ? static_cast<const Clock&>(steady_clock) : virtual_clock;
  const LatencyProfile profile = o.profile;
  const int wpm = o.words_per_minute;
  const std::uint64_t seed = o.seed;
  Gateway gw(gateway_config_for(o), o.scenarios, o.questionnaire,
             [&](int p) {
               return make_mock_adapters(profile, mix_seed(seed, static_cast<std::uint64_t>(p)), wpm);
             },
             clock, ledger);
  const ConnectionId conn = gw.connect();
  const std::string sid = gateway_config_for(o).session_prefix + "-p" + padded(participant);

  const auto deliver = [&](const std::vector<Outbound>& out) {
    for (const auto& ob : out) {
      if (ob.to == conn) client.observe(ob.envelope, clock.now_ms());
    }
  };

  constexpr long kMaxSteps = 10'000'000;
  for (long step = 0;; ++step) {
    if (step == kMaxSteps) {
      client.violations().push_back(sid + ": simulation did not settle");
      break;
    }
    while (auto m = client.pop_due(clock.now_ms())) deliver(gw.handle_frame(conn, m->frame));
    deliver(gw.pump());
    if (client.failed()) break;
    if (client.stopped() || (!client.next_at() && gw.session_finished(sid))) break;

    std::optional<Millis> next = client.next_at();
    if (auto d = gw.next_deadline(); d && (!next || *d < *next)) next = d;
    if (!next) {
      client.violations().push_back(sid + ": session stalled in " +
                                    std::string(to_string(gw.session_state(sid)->phase)));
      break;
    }
    if (o.realtime) {
      const Millis wait = *next - clock.now_ms();
      if (wait > 0) std::this_thread::sleep_for(std::chrono::milliseconds(std::min<Millis>(wait, 10)));
    } else {
      virtual_clock.advance_to(*next);
    }
  }

  result.session_ids.push_back(sid);
  for (auto& e : gw.trial_log(sid)) {
    if (!trace_is_consistent(e.trace)) {
      client.violations().push_back(sid + " trial " + std::to_string(e.trial_index) +
                                    ": latency trace is inconsistent");
    }
    result.entries.push_back(std::move(e));
  }
  ProvenanceFilter all;
  all.include_aborted = true;
  const auto records = ledger.query(sid, all);
  const auto utterances = gw.utterances(sid);
  for (const auto& u : utterances) {
    if (u.origin != SpeakerOrigin::AvatarExtension) continue;
    const auto n = std::count_if(records.begin(), records.end(), [&](const ProvenanceRecord& r) {
      return !r.aborted && r.derived_utterance_id == u.utterance_id;
    });
    if (n != 1) {
      client.violations().push_back(sid + ": utterance " + u.utterance_id + " has " +
                                    std::to_string(n) + " provenance records");
    }
  }
  result.records.insert(result.records.end(), records.begin(), records.end());
  result.utterances.push_back(utterances);
  for (auto& v : client.violations()) result.violations.push_back(std::move(v));
}

void write_summary(const SimulationOptions& o, const SimulationResult& r) {
  if (!o.out_dir) return;
  std::ofstream(*o.out_dir / "latency_summary.json") << to_json(r.summary).dump(2) << "\n";
  std::ofstream(*o.out_dir / "latency_summary.md") << summary_markdown(r.summary);
}

int trial_limit(const SimulationOptions& o, int participant) {
  if (!o.max_trials) return kTrialsPerPlan;
  return std::clamp(*o.max_trials - participant * kTrialsPerPlan, 0, kTrialsPerPlan);
}

}  // namespace

SimulationResult run_simulation(const SimulationOptions& o) {
  if (o.participants < 1) throw ValidationError("participants must be at least 1");
  if (o.out_dir) std::filesystem::create_directories(*o.out_dir);
  o.profile.validate();
  ProvenanceLedger ledger(o.out_dir);
  SimulationResult result;
  for (int p = 0; p < o.participants; ++p) {
    const int limit = trial_limit(o, p);
    if (limit == 0) break;
    const std::string sid = simulation_prefix(o.seed, o.streaming) + "-p" + padded(p);
    remove_stale(o, sid);
    Client client(o, p, limit, nullptr);
    drive(o, p, client, ledger, result);
    ReplayScript script{p, client.sent(), client.explicit_stop()};
    if (o.out_dir) std::ofstream(*o.out_dir / (sid + ".replay.json")) << to_json(script).dump(2) << "\n";
    result.scripts.push_back(std::move(script));
  }
  result.summary = summarize(result.entries);
  write_summary(o, result);
  return result;
}

SimulationResult replay(const std::vector<ReplayScript>& scripts, const SimulationOptions& o) {
  if (o.out_dir) std::filesystem::create_directories(*o.out_dir);
  ProvenanceLedger ledger(o.out_dir);
  SimulationResult result;
  for (const auto& script : scripts) {
    validate_replay_script(script);
    const int p = script.participant_index;
    remove_stale(o, simulation_prefix(o.seed, o.streaming) + "-p" + padded(p));
    Client client(o, p, kTrialsPerPlan, &script);
    drive(o, p, client, ledger, result);
    result.scripts.push_back(script);
  }
  result.summary = summarize(result.entries);
  write_summary(o, result);
  return result;
}

}  // namespace proxyme
