#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "posmg/belief.hpp"
#include "posmg/model.hpp"
#include "posmg/sim.hpp"
#include "posmg/solver.hpp"

namespace posmg {

struct LoadedModel {
  GameModel model;
  std::vector<Issue> warnings;  // parse-level issues (unknown keys, ...)
};

// Model files are UTF-8 JSON; see README for the schema. Rates and goals
// must be exact: "p/q" strings or integers, never bare floats. Structural
// problems throw Errc::parse; semantic ones are left for validate().
LoadedModel parse_model_json(const nlohmann::json& j);
LoadedModel load_model_file(const std::string& path);

// Inverse of parse_model_json: kernel masses round-trip bit for bit, rates
// and goals render as "p/q".
nlohmann::json model_to_json(const GameModel& model);

nlohmann::json report_to_json(const ValidationReport& report);

nlohmann::json belief_to_json(const GameModel& model, const Belief& belief);

// Policy tables on disk: {"<state key>": {"<action label>": weight, ...}}.
nlohmann::json policy_to_json(const GameModel& model, const PolicyTable& table,
                              bool player1);

// Accepts either a bare policy table or a full solve-result JSON (the
// table is then taken from result["policies"]["p1"/"p2"]), so the solve
// output file can feed evaluate/simulate directly.
PolicyTable parse_policy_json(const GameModel& model, const nlohmann::json& j,
                              bool player1);
PolicyTable load_policy_file(const GameModel& model, const std::string& path,
                             bool player1);

nlohmann::json solve_result_to_json(const GameModel& model,
                                    const SolveResult& result,
                                    bool full_tables);

nlohmann::json rollout_to_json(const GameModel& model,
                               const RolloutRecord& record);

nlohmann::json estimate_to_json(const RiskEstimate& estimate);

// History files: {"x0": "<label>", "steps": [{"a","b","theta","x_next"}]}.
ObservedHistory parse_history_json(const GameModel& model,
                                   const nlohmann::json& j);
ObservedHistory load_history_file(const GameModel& model,
                                  const std::string& path);

}  // namespace posmg
