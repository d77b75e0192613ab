#pragma once

// JSON forms of the domain types shared by logs, ledger files and the wire
// protocol. from_json throws nlohmann::json exceptions or proxyme errors on
// missing or mistyped fields.

#include <json.hpp>

#include "proxyme/experiment.hpp"
#include "proxyme/latency.hpp"
#include "proxyme/provenance.hpp"
#include "proxyme/types.hpp"

namespace proxyme {

void to_json(nlohmann::json& j, const Condition& c);
void from_json(const nlohmann::json& j, Condition& c);

void to_json(nlohmann::json& j, const LatencyTrace& t);
void from_json(const nlohmann::json& j, LatencyTrace& t);

void to_json(nlohmann::json& j, const EditOp& op);
void from_json(const nlohmann::json& j, EditOp& op);

void to_json(nlohmann::json& j, const ProvenanceRecord& r);
void from_json(const nlohmann::json& j, ProvenanceRecord& r);

void to_json(nlohmann::json& j, const SelfReportItem& i);
void from_json(const nlohmann::json& j, SelfReportItem& i);

void to_json(nlohmann::json& j, const SelfReport& r);
void from_json(const nlohmann::json& j, SelfReport& r);

void to_json(nlohmann::json& j, const TrialLogEntry& e);
void from_json(const nlohmann::json& j, TrialLogEntry& e);

void to_json(nlohmann::json& j, const Distribution& d);
void from_json(const nlohmann::json& j, Distribution& d);

void to_json(nlohmann::json& j, const LatencyProfile& p);
void from_json(const nlohmann::json& j, LatencyProfile& p);

}  // namespace proxyme
