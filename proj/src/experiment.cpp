#include "proxyme/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "proxyme/json_io.hpp"
#include "proxyme/util.hpp"

namespace proxyme {

using nlohmann::json;

std::vector<Condition> enumerate_conditions() {
  std::vector<Condition> out;
  for (VoiceMode v : kVoiceModes) {
    for (ContentMode c : kContentModes) out.push_back({v, c});
  }
  return out;
}

std::vector<std::vector<int>> balanced_latin_square(int n) {
  if (n <= 0 || n % 2 != 0) {
    throw ValidationError("balanced Latin square needs a positive even order");
  }
  // 0, 1, n-1, 2, n-2, ...
  std::vector<int> first(n, 0);
  for (int k = 1; k < n; ++k) first[k] = k % 2 == 1 ? (k + 1) / 2 : n - k / 2;
  std::vector<std::vector<int>> square(n, std::vector<int>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) square[r][c] = (first[c] + r) % n;
  }
  return square;
}

const std::string& ScenarioScript::template_for(ContentMode mode) const {
  auto it = modifier_prompt_templates.find(mode);
  if (it == modifier_prompt_templates.end()) {
    throw UnknownMode("scenario " + scenario_id + " has no template for " +
                      std::string(to_string(mode)));
  }
  return it->second;
}

namespace {

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json parse_document(std::string_view text, const std::string& origin) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw ParseError(origin + ": file is empty");
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + line_col(text, e.byte == 0 ? 0 : e.byte - 1) +
                     ": malformed JSON");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string required_string(const json& obj, const std::string& field, const std::string& where,
                            bool non_empty = true) {
  auto it = obj.find(field);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + field + "'");
  if (!it->is_string()) throw ParseError(where + ": field '" + field + "' must be a string");
  auto s = it->get<std::string>();
  if (non_empty && s.empty()) throw ParseError(where + ": field '" + field + "' is empty");
  return s;
}

int required_int(const json& obj, const std::string& field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + field + "'");
  if (!it->is_number_integer()) throw ParseError(where + ": field '" + field + "' must be an integer");
  return it->get<int>();
}

}  // namespace

ScenarioPool parse_scenarios(std::string_view text, const std::string& origin) {
  const json doc = parse_document(text, origin);
  if (!doc.is_array()) throw ParseError(origin + ": expected a JSON array of scenarios");
  ScenarioPool pool;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& s = doc[i];
    std::string where = origin + ": scenarios[" + std::to_string(i) + "]";
    if (!s.is_object()) throw ParseError(where + ": expected an object");
    ScenarioScript sc;
    sc.scenario_id = required_string(s, "scenario_id", where);
    where += " (" + sc.scenario_id + ")";
    sc.title = required_string(s, "title", where, false);
    sc.agent_opening = required_string(s, "agent_opening", where);
    sc.agent_followup = required_string(s, "agent_followup", where);
    auto tpl = s.find("modifier_prompt_templates");
    if (tpl == s.end() || !tpl->is_object()) {
      throw ParseError(where + ": missing field 'modifier_prompt_templates'");
    }
    for (ContentMode mode : kContentModes) {
      const std::string name(to_string(mode));
      sc.modifier_prompt_templates[mode] =
          required_string(*tpl, name, where + ": modifier_prompt_templates");
    }
    if (auto v = s.find("agent_voice_ref"); v != s.end() && !v->is_null()) {
      sc.agent_voice_ref = required_string(s, "agent_voice_ref", where);
    }
    if (auto v = s.find("sample_response"); v != s.end() && !v->is_null()) {
      sc.sample_response = required_string(s, "sample_response", where);
    }
    if (!ids.insert(sc.scenario_id).second) {
      throw DuplicateScenarioId(origin + ": scenario_id '" + sc.scenario_id +
                                "' appears more than once");
    }
    pool.push_back(std::move(sc));
  }
  return pool;
}

ScenarioPool load_scenarios(const std::filesystem::path& path) {
  return parse_scenarios(read_file(path), path.string());
}

const ScenarioScript* find_scenario(const ScenarioPool& pool, std::string_view id) {
  auto it = std::find_if(pool.begin(), pool.end(),
                         [&](const ScenarioScript& s) { return s.scenario_id == id; });
  return it == pool.end() ? nullptr : &*it;
}

TrialPlan plan_for(int participant_index, const ScenarioPool& pool) {
  if (participant_index < 0) throw ValidationError("participant_index must be >= 0");
  if (pool.size() < static_cast<std::size_t>(kTrialsPerPlan)) {
    throw InsufficientScenarios("need at least " + std::to_string(kTrialsPerPlan) +
                                " scenarios, pool has " + std::to_string(pool.size()));
  }
  static const auto square = balanced_latin_square(kTrialsPerPlan);
  const auto conditions = enumerate_conditions();
  const auto& row = square[participant_index % kTrialsPerPlan];

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 engine(mix_seed(0x70726f78796d65ULL, static_cast<std::uint64_t>(participant_index)));
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[uniform_below(engine, i + 1)]);
  }

  TrialPlan plan;
  plan.participant_index = participant_index;
  for (int k = 0; k < kTrialsPerPlan; ++k) {
    plan.trials.push_back({conditions[row[k]], pool[order[k]].scenario_id, k});
  }
  return plan;
}

std::string_view to_string(Construct c) {
  switch (c) {
    case Construct::Agency:
      return "Agency";
    case Construct::Authorship:
      return "Authorship";
    case Construct::Other:
      return "Other";
  }
  return "?";
}

Construct parse_construct(std::string_view s) {
  if (s == "Agency") return Construct::Agency;
  if (s == "Authorship") return Construct::Authorship;
  if (s == "Other") return Construct::Other;
  throw ParseError("unknown construct '" + std::string(s) + "'");
}

Questionnaire parse_questionnaire(std::string_view text, const std::string& origin) {
  const json doc = parse_document(text, origin);
  const json* items = &doc;
  if (doc.is_object()) {
    auto it = doc.find("items");
    if (it == doc.end()) throw ParseError(origin + ": missing field 'items'");
    items = &*it;
  }
  if (!items->is_array() || items->empty()) {
    throw ParseError(origin + ": 'items' must be a non-empty array");
  }
  Questionnaire out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < items->size(); ++i) {
    const json& it = (*items)[i];
    const std::string where = origin + ": items[" + std::to_string(i) + "]";
    if (!it.is_object()) throw ParseError(where + ": expected an object");
    QuestionnaireItem q;
    q.item_id = required_string(it, "item_id", where);
    try {
      q.construct = parse_construct(required_string(it, "construct", where));
    } catch (const ParseError& e) {
      throw ParseError(where + ": field 'construct': " + e.what());
    }
    q.prompt = required_string(it, "prompt", where);
    q.scale_min = required_int(it, "scale_min", where);
    q.scale_max = required_int(it, "scale_max", where);
    if (q.scale_min > q.scale_max) throw ParseError(where + ": scale_min exceeds scale_max");
    if (!ids.insert(q.item_id).second) {
      throw ParseError(where + ": duplicate item_id '" + q.item_id + "'");
    }
    out.push_back(std::move(q));
  }
  return out;
}

Questionnaire load_questionnaire(const std::filesystem::path& path) {
  return parse_questionnaire(read_file(path), path.string());
}

std::vector<std::string> self_report_violations(const SelfReport& report,
                                                const Questionnaire* questionnaire) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& item : report.items) {
    if (item.scale_min > item.scale_max) {
      out.push_back("item " + item.item_id + ": scale_min > scale_max");
    }
    if (item.response < item.scale_min || item.response > item.scale_max) {
      out.push_back("item " + item.item_id + ": response " + std::to_string(item.response) +
                    " outside [" + std::to_string(item.scale_min) + ", " +
                    std::to_string(item.scale_max) + "]");
    }
    if (!seen.insert(item.item_id).second) {
      out.push_back("item " + item.item_id + ": answered twice");
    }
    if (questionnaire) {
      auto q = std::find_if(questionnaire->begin(), questionnaire->end(),
                            [&](const QuestionnaireItem& qi) { return qi.item_id == item.item_id; });
      if (q == questionnaire->end()) {
        out.push_back("item " + item.item_id + ": not in the questionnaire");
      } else if (q->scale_min != item.scale_min || q->scale_max != item.scale_max ||
                 q->construct != item.construct) {
        out.push_back("item " + item.item_id + ": scale or construct differs from the questionnaire");
      }
    }
  }
  if (questionnaire) {
    for (const auto& q : *questionnaire) {
      if (!seen.count(q.item_id)) out.push_back("item " + q.item_id + ": unanswered");
    }
  }
  if (report.items.empty()) out.push_back("self-report has no items");
  return out;
}

SessionLog::SessionLog(std::string session_id, std::optional<std::filesystem::path> data_dir)
    : session_id_(std::move(session_id)), data_dir_(std::move(data_dir)) {
  if (data_dir_) std::filesystem::create_directories(*data_dir_);
}

std::optional<std::filesystem::path> SessionLog::path() const {
  if (!data_dir_) return std::nullopt;
  return *data_dir_ / (session_id_ + ".log.jsonl");
}

void SessionLog::append(const TrialLogEntry& entry) {
  if (auto p = path()) {
    std::ofstream out(*p, std::ios::app);
    out << json(entry).dump() << '\n';
    out.flush();
    if (!out) throw ValidationError("failed to write " + p->string());
  }
  entries_.push_back(entry);
}

const TrialLogEntry& record_trial(SessionLog& log, const TrialOutcome& o,
                                  const Questionnaire* questionnaire) {
  std::vector<std::string> problems = self_report_violations(o.self_report, questionnaire);
  const MediatedResponse& r = o.mediated_response;
  if (o.initial_utterance.origin != SpeakerOrigin::Participant) {
    problems.push_back("initial utterance is not Participant-origin");
  }
  if (o.initial_utterance.text.empty()) problems.push_back("initial utterance has no text");
  if (r.response_utterance.origin != SpeakerOrigin::AvatarExtension) {
    problems.push_back("response utterance is not AvatarExtension-origin");
  }
  if (r.modified_text.empty()) problems.push_back("mediated text is empty");
  if (r.provenance_id.empty()) problems.push_back("response has no provenance_id");
  if (!trace_is_consistent(r.trace)) problems.push_back("latency trace violates its invariants");
  if (o.masking_window_ms < 0) problems.push_back("masking window is negative");
  for (const auto& e : log.entries()) {
    if (e.trial_index == o.trial.trial_index) {
      problems.push_back("trial " + std::to_string(o.trial.trial_index) + " already recorded");
    }
  }
  if (!problems.empty()) {
    std::string detail = "trial record invalid:";
    for (const auto& p : problems) detail += "\n  - " + p;
    throw ValidationError(detail);
  }

  TrialLogEntry e;
  e.session_id = log.session_id();
  e.participant_index = o.participant_index;
  e.trial_index = o.trial.trial_index;
  e.condition = o.trial.condition;
  e.scenario_id = o.trial.scenario_id;
  e.initial_utterance_id = o.initial_utterance.utterance_id;
  e.initial_text = o.initial_utterance.text;
  e.response_utterance_id = r.response_utterance.utterance_id;
  e.mediated_text = r.modified_text;
  e.streaming = o.streaming;
  e.chunk_ms = o.chunk_ms;
  e.trace = r.trace;
  e.provenance_id = r.provenance_id;
  e.masking_window_ms = o.masking_window_ms;
  e.perceived_gap_ms = compute_perceived_gap(r.trace, o.masking_window_ms);
  e.aborted_runs = o.aborted_runs;
  e.autonomy = o.autonomy;
  e.self_report = o.self_report;
  e.completed_at = o.completed_at;
  log.append(e);
  return log.entries().back();
}

std::vector<TrialLogEntry> load_trial_logs(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir)) {
    for (const auto& f : std::filesystem::recursive_directory_iterator(dir)) {
      const std::string name = f.path().filename().string();
      if (f.is_regular_file() && name.size() > 10 &&
          name.compare(name.size() - 10, 10, ".log.jsonl") == 0) {
        files.push_back(f.path());
      }
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<TrialLogEntry> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        out.push_back(json::parse(line).get<TrialLogEntry>());
      } catch (const json::exception& e) {
        throw ParseError(f.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  return out;
}

}  // namespace proxyme
