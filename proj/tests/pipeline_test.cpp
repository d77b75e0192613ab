#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "proxyme/errors.hpp"
#include "proxyme/pipeline.hpp"
#include "proxyme/util.hpp"

using namespace proxyme;

namespace {

MediationRequest request(std::string text, Condition c, bool streaming = false) {
  MediationRequest r;
  r.source_utterance = {"s/u0", "s", SpeakerOrigin::Participant, std::move(text), std::nullopt, 0};
  r.condition = c;
  r.scenario_id = "sc0";
  r.prompt_template = "tpl";
  r.streaming = streaming;
  r.chunk_ms = 1000;
  return r;
}

struct Seen {
  std::vector<ContentMode> modes;
  std::vector<VoiceMode> voices;
};

class SpyModifier final : public ContentModifier {
 public:
  SpyModifier(std::shared_ptr<ContentModifier> inner, Seen& seen) : inner_(std::move(inner)), seen_(seen) {}
  ModifiedResult modify(std::string_view t, ContentMode m, std::string_view tpl) override {
    seen_.modes.push_back(m);
    return inner_->modify(t, m, tpl);
  }

 private:
  std::shared_ptr<ContentModifier> inner_;
  Seen& seen_;
};

class SpyTts final : public TtsAdapter {
 public:
  SpyTts(std::shared_ptr<TtsAdapter> inner, Seen& seen) : inner_(std::move(inner)), seen_(seen) {}
  SynthesisResult synthesize(const SynthesisRequest& r) override {
    seen_.voices.push_back(r.voice);
    return inner_->synthesize(r);
  }

 private:
  std::shared_ptr<TtsAdapter> inner_;
  Seen& seen_;
};

}  // namespace

TEST_CASE("mediation examples under the Fixed default profile") {
  const auto adapters = make_mock_adapters(LatencyProfile{}, 1);
  SUBCASE("Enhancement") {
    const auto r = run_mediation(request("I'll try my best", {VoiceMode::Cloned, ContentMode::Enhancement}),
                                 adapters);
    CHECK(r.modified_text == "To put it more strongly: I'll try my best");
    CHECK(r.trace.end_to_end_ms == 1200 + 2900 + r.trace.tts_total_ms);
    CHECK(r.trace.end_to_end_ms == 11600);
    CHECK(r.response_utterance.origin == SpeakerOrigin::AvatarExtension);
    CHECK(r.response_utterance.text == r.modified_text);
  }
  SUBCASE("Repetition keeps the text and voices differ") {
    const auto robotic =
        run_mediation(request("I should report it", {VoiceMode::Robotic, ContentMode::Repetition}), adapters);
    const auto cloned =
        run_mediation(request("I should report it", {VoiceMode::Cloned, ContentMode::Repetition}), adapters);
    CHECK(robotic.modified_text == "I should report it");
    REQUIRE(robotic.chunks.size() == cloned.chunks.size());
    CHECK(robotic.chunks[0].payload != cloned.chunks[0].payload);
  }
}

TEST_CASE("perceived gap") {
  const LatencyTrace batch = make_trace(1200, 2900, 7500, 7500);
  const LatencyTrace streaming = make_trace(1200, 2900, 1500, 7500);
  CHECK(batch.end_to_end_ms == 11600);
  CHECK(compute_perceived_gap(batch, 0) == 11600);
  CHECK(compute_perceived_gap(batch, 11600) == 0);
  CHECK(compute_perceived_gap(batch, 20000) == 0);
  CHECK(streaming.time_to_first_audio_ms == 5600);
  CHECK(compute_perceived_gap(streaming, 3000) == 2600);
  CHECK(compute_perceived_gap(streaming, 5600) == 0);
  Millis prev = compute_perceived_gap(streaming, 0);
  for (Millis w = 0; w <= 7000; w += 50) {
    const Millis g = compute_perceived_gap(streaming, w);
    CHECK(g <= prev);
    CHECK(g == std::max<Millis>(0, 5600 - w));
    prev = g;
  }
}

TEST_CASE("streaming reaches first audio sooner whenever there are two or more chunks") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const int words = 1 + static_cast<int>(uniform_below(rng, 40));
    std::string text;
    for (int w = 0; w < words; ++w) text += (w ? " word" : "word");
    const Condition c{VoiceMode::Cloned, ContentMode::Repetition};
    const auto b = run_mediation(request(text, c, false), make_mock_adapters(LatencyProfile{}, 3));
    const auto s = run_mediation(request(text, c, true), make_mock_adapters(LatencyProfile{}, 3));
    CHECK(trace_is_consistent(b.trace));
    CHECK(trace_is_consistent(s.trace));
    if (s.chunks.size() >= 2) {
      CHECK(s.trace.time_to_first_audio_ms < b.trace.time_to_first_audio_ms);
    }
  }
}

TEST_CASE("trace additivity under Normal latencies") {
  const auto adapters = make_mock_adapters(LatencyProfile::normal_around_defaults(0.2), 8);
  for (int i = 0; i < 100; ++i) {
    const auto r = run_mediation(request("We will see", {VoiceMode::Robotic, ContentMode::Enhancement}, i % 2),
                                 adapters);
    CHECK(r.trace.end_to_end_ms == r.trace.stt_ms + r.trace.llm_ms + r.trace.tts_total_ms);
    CHECK(trace_is_consistent(r.trace));
  }
}

TEST_CASE("adapters receive the trial's assigned condition") {
  const auto pool = test::make_pool(8);
  for (int p = 0; p < 30; ++p) {
    const TrialPlan plan = plan_for(p, pool);
    Seen seen;
    auto mocks = make_mock_adapters(LatencyProfile{}, static_cast<std::uint64_t>(p));
    AdapterSet spy{mocks.stt, std::make_shared<SpyModifier>(mocks.modifier, seen),
                   std::make_shared<SpyTts>(mocks.tts, seen)};
    for (const Trial& t : plan.trials) run_mediation(request("It is fine", t.condition), spy);
    REQUIRE(seen.modes.size() == plan.trials.size());
    for (std::size_t k = 0; k < plan.trials.size(); ++k) {
      CHECK(seen.modes[k] == plan.trials[k].condition.content);
      CHECK(seen.voices[k] == plan.trials[k].condition.voice);
    }
  }
}

TEST_CASE("stages run in order and a cancelled run aborts") {
  const auto adapters = make_mock_adapters(LatencyProfile{}, 1);
  std::vector<std::pair<StageKind, bool>> events;
  MediationOptions opt;
  opt.on_stage = [&](StageKind s, bool finished, Millis) { events.emplace_back(s, finished); };
  run_mediation(request("I will go", {VoiceMode::Cloned, ContentMode::Repetition}), adapters, opt);
  const std::vector<std::pair<StageKind, bool>> expected{
      {StageKind::Stt, false}, {StageKind::Stt, true}, {StageKind::Llm, false},
      {StageKind::Llm, true},  {StageKind::Tts, false}, {StageKind::Tts, true}};
  CHECK(events == expected);

  CancelToken token;
  token.cancel();
  MediationOptions cancelled;
  cancelled.cancel = &token;
  CHECK_THROWS_AS(run_mediation(request("I will go", {}), adapters, cancelled), MediationAborted);
}

TEST_CASE("request validation and stage error wrapping") {
  const auto adapters = make_mock_adapters(LatencyProfile{}, 1);
  auto r = request("hi", {});
  r.source_utterance.origin = SpeakerOrigin::Agent;
  CHECK_THROWS_AS(run_mediation(r, adapters), ValidationError);
  r = request("", {});
  CHECK_THROWS_AS(run_mediation(r, adapters), ValidationError);
  r = request("hi", {}, true);
  r.chunk_ms = 0;
  CHECK_THROWS_AS(run_mediation(r, adapters), ValidationError);

  r = request("", {});
  r.source_audio = std::vector<std::uint8_t>{1, 2, 3};
  try {
    run_mediation(r, adapters);
    FAIL("expected a StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == StageKind::Stt);
    CHECK(e.code() == "MalformedAudioStub");
  }
}

TEST_CASE("audio input is transcribed and the ledger records provenance") {
  ProvenanceLedger ledger;
  auto r = request("", {VoiceMode::Cloned, ContentMode::CounteredConclusion});
  r.source_audio = make_audio_stub("I should report it");
  Utterance src = r.source_utterance;
  src.text = "I should report it";
  ledger.register_source(src);
  MediationOptions opt;
  opt.ledger = &ledger;
  const auto resp = run_mediation(r, make_mock_adapters(LatencyProfile{}, 1), opt);
  CHECK(resp.transcript == "I should report it");
  const auto recs = ledger.query("s");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].source_text == "I should report it");
  CHECK(apply_edit_script(recs[0].source_text, recs[0].edit_script) == resp.modified_text);

  auto unknown = request("hello", {});
  unknown.source_utterance.utterance_id = "s/u9";
  CHECK_THROWS_AS(run_mediation(unknown, make_mock_adapters(LatencyProfile{}, 1), opt),
                  UnknownSourceUtterance);
}
