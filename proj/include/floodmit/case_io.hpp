#pragma once

#include <string>

#include "floodmit/grid.hpp"

namespace floodmit {

/// Case files are single JSON documents with top-level keys `substations`,
/// `buses`, `branches`, `generators`, `loads`, `config`. Serialization is
/// canonical: keys sorted, floats rendered shortest round-trip, so
/// load -> save is byte-stable.
GridCase load_case(const std::string& path);
void save_case(const GridCase& gc, const std::string& path);
GridCase case_from_json(const std::string& text, const std::string& name = "");
std::string case_to_json(const GridCase& gc);

/// Scenario files: `{"thresholds": [...], "scenarios": [{"id", "prob",
/// "depths": {substation_id: meters}}]}`. Depths omit dry substations.
ScenarioSet load_scenarios(const std::string& path, const GridCase& gc);
void save_scenarios(const ScenarioSet& set, const GridCase& gc, const std::string& path);
ScenarioSet scenarios_from_json(const std::string& text, const GridCase& gc);
std::string scenarios_to_json(const ScenarioSet& set, const GridCase& gc);

/// Plans serialize as `{substation_id: achieved_level}`, omitting level 0.
std::string plan_to_json(const MitigationPlan& p, const GridCase& gc);
MitigationPlan plan_from_json(const std::string& text, const GridCase& gc, int levels);

/// Compact single-line plan encoding for ledgers: `k1=2;k4=1`, sorted by
/// substation id, empty string for the empty plan.
std::string plan_code(const MitigationPlan& p, const GridCase& gc);
MitigationPlan plan_from_code(const std::string& code, const GridCase& gc, int levels);

/// Config merge: fields present in `text` (a JSON object) override `base`.
Config config_overridden(const Config& base, const std::string& text);
std::string config_to_json(const Config& cfg);

/// FNV-1a over a string, rendered as 16 hex digits. Used for plan and
/// config hashes in result ledgers.
std::string fnv1a_hex(const std::string& s);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace floodmit
