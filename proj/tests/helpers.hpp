#pragma once

#include <string>

#include "proxyme/experiment.hpp"
#include "proxyme/session.hpp"

namespace proxyme::test {

/// Six synthetic scenarios with every template present.
inline ScenarioPool make_pool(int n = 6) {
  ScenarioPool pool;
  for (int i = 0; i < n; ++i) {
    ScenarioScript s;
    s.scenario_id = "sc" + std::to_string(i);
    s.title = "Scenario " + std::to_string(i);
    s.agent_opening = "Would you return the lost item number " + std::to_string(i) + "?";
    s.agent_followup = "Why?";
    for (ContentMode m : kContentModes) s.modifier_prompt_templates[m] = "tpl {text}";
    s.sample_response = "I should return it to the owner.";
    pool.push_back(s);
  }
  return pool;
}

inline TrialPlan canonical_plan() {
  TrialPlan plan;
  const auto conditions = enumerate_conditions();
  for (int k = 0; k < kTrialsPerPlan; ++k) {
    plan.trials.push_back({conditions[k], "sc" + std::to_string(k), k});
  }
  return plan;
}

inline std::string data_path(const std::string& name) {
  return std::string(PROXYME_SOURCE_DIR) + "/data/" + name;
}

}  // namespace proxyme::test
