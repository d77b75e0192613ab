#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "proxyme/errors.hpp"
#include "proxyme/report.hpp"
#include "proxyme/simulation.hpp"
#include "proxyme/util.hpp"

using namespace proxyme;
namespace fs = std::filesystem;

namespace {

SimulationOptions options(int participants, std::uint64_t seed = 11) {
  SimulationOptions o;
  o.scenarios = load_scenarios(test::data_path("scenarios.sample.json"));
  o.questionnaire = load_questionnaire(test::data_path("questionnaire.sample.json"));
  o.participants = participants;
  o.seed = seed;
  return o;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> files_in(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_CASE("stage statistics match a direct computation") {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 100; ++round) {
    std::vector<Millis> v(1 + uniform_below(rng, 40));
    for (auto& x : v) x = static_cast<Millis>(uniform_below(rng, 10000));
    const StageStats s = stage_stats(v);
    const double n = static_cast<double>(v.size());
    double mean = 0;
    for (auto x : v) mean += static_cast<double>(x) / n;
    double ss = 0;
    for (auto x : v) ss += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
    std::vector<Millis> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const auto rank = [&](double q) {
      return sorted[static_cast<std::size_t>(std::max(1.0, std::ceil(q * n))) - 1];
    };
    CHECK(s.n == v.size());
    CHECK(s.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(s.stddev == doctest::Approx(v.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0).epsilon(1e-9));
    CHECK(s.p50 == static_cast<double>(rank(0.5)));
    CHECK(s.p95 == static_cast<double>(rank(0.95)));
  }
}

TEST_CASE("six simulated participants complete thirty-six trials") {
  const SimulationResult r = run_simulation(options(6));
  CHECK(r.violations.empty());
  REQUIRE(r.entries.size() == 36);
  std::set<std::pair<int, int>> seen;
  for (const auto& e : r.entries) {
    CHECK(seen.insert({e.participant_index, condition_index(e.condition)}).second);
    CHECK(e.trace.end_to_end_ms == 11600);
    CHECK(e.aborted_runs == 0);
    CHECK(e.self_report.items.size() == 4);
  }
  CHECK(seen.size() == 36);
  CHECK(r.records.size() == 36);
  CHECK(r.summary.end_to_end.n == 36);
  CHECK(r.summary.end_to_end.mean == 11600);
  CHECK(r.summary.end_to_end.stddev == 0);
  CHECK(r.session_ids.front() == simulation_prefix(11, false) + "-p000");
}

TEST_CASE("a trial cap stops the last session early") {
  SimulationOptions o = options(2);
  o.max_trials = 8;
  const SimulationResult r = run_simulation(o);
  CHECK(r.violations.empty());
  CHECK(r.entries.size() == 8);
}

TEST_CASE("replaying recorded scripts reproduces every output byte") {
  SimulationOptions o = options(2, 42);
  o.streaming = true;
  o.profile = LatencyProfile::normal_around_defaults(0.2);
  o.out_dir = fresh_dir("proxyme-sim-a");
  const SimulationResult first = run_simulation(o);
  REQUIRE(first.violations.empty());
  REQUIRE(first.scripts.size() == 2);

  std::vector<ReplayScript> scripts;
  for (const auto& sid : first.session_ids) {
    scripts.push_back(replay_script_from_json(nlohmann::json::parse(slurp(*o.out_dir / (sid + ".replay.json")))));
  }
  SimulationOptions again = o;
  again.out_dir = fresh_dir("proxyme-sim-b");
  const SimulationResult second = replay(scripts, again);
  CHECK(second.entries == first.entries);

  const auto a = files_in(*o.out_dir);
  const auto b = files_in(*again.out_dir);
  std::size_t compared = 0;
  for (const auto& [name, bytes] : a) {
    if (name.ends_with(".replay.json")) continue;
    CAPTURE(name);
    REQUIRE(b.count(name) == 1);
    CHECK(b.at(name) == bytes);
    ++compared;
  }
  CHECK(compared == b.size());
  CHECK(b.count(first.session_ids[0] + ".log.jsonl") == 1);
  CHECK(b.count(first.session_ids[0] + ".prov.jsonl") == 1);
  CHECK(b.count("latency_summary.json") == 1);

  SimulationOptions other = o;
  other.seed = 43;
  other.out_dir.reset();
  CHECK(run_simulation(other).entries != first.entries);
}

TEST_CASE("replay scripts are validated") {
  ReplayScript s;
  s.messages.push_back({100, "{}"});
  s.messages.push_back({50, "{}"});
  CHECK_THROWS_AS(validate_replay_script(s), ValidationError);
  const ReplayScript ok{0, {{0, "x"}, {0, "y"}}, true};
  CHECK(replay_script_from_json(to_json(ok)).messages.size() == 2);
}

TEST_CASE("report compares modes and marks missing ones") {
  const fs::path dir = fresh_dir("proxyme-report");
  CHECK_THROWS_AS(report(dir), NoLogsFound);
  CHECK_THROWS_AS(report(dir / "missing"), NoLogsFound);

  SimulationOptions batch = options(1);
  batch.out_dir = dir;
  run_simulation(batch);
  const std::string batch_only = report(dir);
  CHECK(batch_only.find("## Stage latencies (streaming)\n\nabsent") != std::string::npos);
  CHECK(batch_only.find("| mean time to first audio ms | 11600.0 | absent |") != std::string::npos);

  SimulationOptions streaming = options(1);
  streaming.streaming = true;
  streaming.out_dir = dir / "streaming";
  run_simulation(streaming);
  const std::string both = report(dir);
  CHECK(both.find("absent") == std::string::npos);
  CHECK(both.find("| mean time to first audio ms | 11600.0 | 5600.0 |") != std::string::npos);
  CHECK(both.find("by 6000.0 ms") != std::string::npos);
  // perceived gap = max(0, first audio - window)
  CHECK(both.find("| 0 | 11600.0 | 5600.0 |") != std::string::npos);
  CHECK(both.find("| 3000 | 8600.0 | 2600.0 |") != std::string::npos);
  CHECK(both.find("| 5600 | 6000.0 | 0.0 |") != std::string::npos);
}
