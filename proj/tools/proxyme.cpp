#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "proxyme/clock.hpp"
#include "proxyme/config.hpp"
#include "proxyme/report.hpp"
#include "proxyme/server.hpp"
#include "proxyme/simulation.hpp"

extern char** environ;

namespace {

using namespace proxyme;
using nlohmann::json;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ServiceConfig load_service_config(const Common& c, bool require_file) {
  json raw = json::object();
  std::filesystem::path base;
  if (!c.config.empty()) {
    raw = read_config_file(c.config);
    base = std::filesystem::path(c.config).parent_path();
  } else if (require_file) {
    throw ConfigError("--config is required");
  } else {
    raw["adapters"] = {{"kind", "mock"}};
  }
  apply_env_overrides(raw, environ);
  apply_overrides(raw, c.sets);
  if (c.seed) raw["seed"] = *c.seed;
  return parse_service_config(raw, base);
}

int serve(const Common& common) {
  ServiceConfig cfg = load_service_config(common, true);
  if (!cfg.scenarios) throw ConfigError("field 'scenarios' is required to serve");
  ScenarioPool scenarios = load_scenarios(*cfg.scenarios);
  std::optional<Questionnaire> questionnaire;
  if (cfg.questionnaire) questionnaire = load_questionnaire(*cfg.questionnaire);
  std::filesystem::create_directories(cfg.data_dir);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  SteadyClock clock;
  ProvenanceLedger ledger(cfg.data_dir);
  Gateway gateway(gateway_config(cfg), std::move(scenarios), std::move(questionnaire),
                  make_adapter_factory(cfg), clock, ledger);
  Server server(gateway, cfg.host, cfg.port);
  const int port = server.start();
  std::cout << "proxyme ready on ws://" << cfg.host << ":" << port << "/ (health: http://"
            << cfg.host << ":" << port << "/health)\n"
            << describe(cfg) << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  std::cout << "shutting down" << std::endl;
  server.stop();
  return 0;
}

struct SimulateArgs {
  std::string scenarios;
  std::string questionnaire;
  int participants = 1;
  std::optional<int> runs;
  std::optional<bool> streaming;
  std::optional<Millis> chunk_ms;
  std::string profile = "config";
  double stddev_fraction = 0.1;
  bool audio_input = false;
  bool realtime = false;
  std::vector<std::string> replay;
};

int simulate(const Common& common, const SimulateArgs& a) {
  ServiceConfig cfg = load_service_config(common, false);
  if (common.out.empty()) throw ConfigError("--out is required for simulate");
  SimulationOptions o;
  const auto scenarios = !a.scenarios.empty() ? std::optional<std::filesystem::path>(a.scenarios)
                                              : cfg.scenarios;
  if (!scenarios) throw ConfigError("no scenario file: pass --scenarios or set 'scenarios'");
  o.scenarios = load_scenarios(*scenarios);
  if (!a.questionnaire.empty()) {
    o.questionnaire = load_questionnaire(a.questionnaire);
  } else if (cfg.questionnaire) {
    o.questionnaire = load_questionnaire(*cfg.questionnaire);
  }
  o.seed = cfg.seed;
  o.profile = cfg.latency_profile;
  if (a.profile == "fixed") {
    o.profile = LatencyProfile{};
  } else if (a.profile == "normal") {
    o.profile = LatencyProfile::normal_around_defaults(a.stddev_fraction);
  }
  o.streaming = a.streaming.value_or(cfg.streaming);
  o.chunk_ms = a.chunk_ms.value_or(cfg.chunk_ms);
  o.buffer_depth = cfg.buffer_depth;
  o.masking_window_ms = cfg.masking_window_ms;
  o.words_per_minute = cfg.words_per_minute;
  o.audio_input = a.audio_input;
  o.realtime = a.realtime;
  o.out_dir = common.out;
  o.participants = a.participants;
  if (a.runs) {
    if (*a.runs < 1) throw ConfigError("--runs must be at least 1");
    o.max_trials = *a.runs;
    o.participants = (*a.runs + kTrialsPerPlan - 1) / kTrialsPerPlan;
  }

  SimulationResult result;
  if (a.replay.empty()) {
    result = run_simulation(o);
  } else {
    std::vector<ReplayScript> scripts;
    for (const auto& path : a.replay) {
      std::ifstream in(path);
      if (!in) throw ParseError(path + ": cannot open replay script");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
      }
      scripts.push_back(replay_script_from_json(j));
    }
    result = replay(scripts, o);
  }

  std::cout << "sessions: " << result.session_ids.size() << ", trials: " << result.entries.size()
            << ", mode: " << (o.streaming ? "streaming" : "batch") << ", seed: " << o.seed << "\n\n"
            << summary_markdown(result.summary);
  for (const auto& v : result.violations) std::cerr << "violation: " << v << "\n";
  return result.violations.empty() ? 0 : 1;
}

int run_report(const Common& common, const std::string& log_dir) {
  const std::string text = report(log_dir);
  std::cout << text;
  if (!common.out.empty()) std::ofstream(common.out) << text;
  return 0;
}

int validate(const std::string& path, const std::string& kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << path << ": cannot open file\n";
    return 1;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::string resolved = kind;
  if (resolved == "auto") {
    const json j = json::parse(text, nullptr, false);
    const bool questionnaire =
        (j.is_object() && j.contains("items")) ||
        (j.is_array() && !j.empty() && j[0].is_object() && j[0].contains("item_id"));
    resolved = questionnaire ? "questionnaire" : "scenarios";
  }
  try {
    if (resolved == "questionnaire") {
      const auto q = parse_questionnaire(text, path);
      std::cout << path << ": valid questionnaire, " << q.size() << " items\n";
    } else {
      const auto s = parse_scenarios(text, path);
      std::cout << path << ": valid scenarios, " << s.size() << " scripts\n";
    }
  } catch (const Error& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proxyme: speech-mediation orchestration service"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config, "Service config file (JSON)");
  app.add_option("--set", common.sets, "Override a config key, key.path=value")->take_all();
  app.add_option("--seed", common.seed, "Master seed");
  app.add_option("--out", common.out, "Output directory (simulate) or file (report)");

  auto* serve_cmd = app.add_subcommand("serve", "Run the WebSocket service")->fallthrough();

  SimulateArgs sim;
  auto* sim_cmd =
      app.add_subcommand("simulate", "Run simulated participants on mock adapters")->fallthrough();
  sim_cmd->add_option("--scenarios", sim.scenarios, "Scenario file");
  sim_cmd->add_option("--questionnaire", sim.questionnaire, "Questionnaire file");
  sim_cmd->add_option("--participants", sim.participants, "Participants, six trials each")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--runs", sim.runs, "Total trials; overrides --participants");
  sim_cmd->add_flag("--streaming,!--batch", sim.streaming, "Streaming or batch synthesis");
  sim_cmd->add_option("--chunk-ms", sim.chunk_ms, "Streaming chunk length");
  sim_cmd->add_option("--profile", sim.profile, "Latency profile: config, fixed or normal")
      ->check(CLI::IsMember({"config", "fixed", "normal"}));
  sim_cmd->add_option("--stddev-fraction", sim.stddev_fraction,
                      "Normal profile stddev as a fraction of each mean");
  sim_cmd->add_flag("--audio-input", sim.audio_input, "Send utterances as audio stubs");
  sim_cmd->add_flag("--realtime", sim.realtime, "Pace on the wall clock");
  sim_cmd->add_option("--replay", sim.replay, "Replay recorded scripts instead")->take_all();

  std::string log_dir;
  auto* report_cmd = app.add_subcommand("report", "Summarize latency from session logs")->fallthrough();
  report_cmd->add_option("log_dir", log_dir, "Directory of session logs")->required();

  std::string validate_path;
  std::string validate_kind = "auto";
  auto* validate_cmd =
      app.add_subcommand("validate", "Check a scenario or questionnaire file")->fallthrough();
  validate_cmd->add_option("file", validate_path, "File to check")->required();
  validate_cmd->add_option("--kind", validate_kind, "auto, scenarios or questionnaire")
      ->check(CLI::IsMember({"auto", "scenarios", "questionnaire"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(common);
    if (*sim_cmd) return simulate(common, sim);
    if (*report_cmd) return run_report(common, log_dir);
    if (*validate_cmd) return validate(validate_path, validate_kind);
  } catch (const BindError& e) {
    std::cerr << "BindError: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
