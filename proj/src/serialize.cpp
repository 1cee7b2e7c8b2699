#include "posmg/serialize.hpp"

#include <fstream>

namespace posmg {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& message) {
  throw PosmgError(Errc::parse, message);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    parse_fail("invalid JSON in '" + path + "': " + e.what());
  }
  return j;
}

const json& require(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) parse_fail(std::string("missing key '") + key + "'");
  return *it;
}

std::vector<std::string> string_array(const json& j, const char* what) {
  if (!j.is_array()) parse_fail(std::string(what) + " must be an array");
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string())
      parse_fail(std::string(what) + " must contain only strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

// Exactness contract: rationals come from "p/q" strings or JSON integers.
// A float token would smuggle binary round-off into goal comparisons, so
// it is rejected outright.
Rational exact_rational(const json& j, const std::string& what) {
  if (j.is_string()) {
    const auto parsed = Rational::parse(j.get<std::string>());
    if (!parsed) parse_fail(what + ": malformed rational '" +
                            j.get<std::string>() + "'");
    return *parsed;
  }
  if (j.is_number_integer())
    return Rational(j.get<std::int64_t>());
  if (j.is_number_float())
    parse_fail(what + ": floats are not exact; use \"p/q\" or an integer");
  parse_fail(what + ": expected a rational");
}

int label_index(const std::vector<std::string>& labels, const json& j,
                const std::string& what) {
  if (!j.is_string()) parse_fail(what + " must be a string label");
  const std::string label = j.get<std::string>();
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  parse_fail(what + ": unknown label '" + label + "'");
}

// State keys render as "t=<t>|x=<label>|<belief>"; policies keyed by them
// need the observed label back to size their action vectors.
int observed_of_key(const GameModel& model, const std::string& key) {
  const auto start = key.find("|x=");
  if (start == std::string::npos)
    parse_fail("malformed state key '" + key + "'");
  const auto end = key.find('|', start + 3);
  if (end == std::string::npos)
    parse_fail("malformed state key '" + key + "'");
  const std::string label = key.substr(start + 3, end - start - 3);
  try {
    return model.observed_index(label);
  } catch (const PosmgError&) {
    parse_fail("state key '" + key + "' names an unknown observed state");
  }
}

}  // namespace

LoadedModel parse_model_json(const json& j) {
  if (!j.is_object()) parse_fail("model file must be a JSON object");

  static const char* known_keys[] = {
      "observed_states", "hidden_states", "actions1",      "actions2",
      "kernel",          "reward_rate",   "horizon_ticks", "initial_goal",
      "initial_hidden"};
  std::vector<Issue> warnings;
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : known_keys) known = known || key == k;
    if (!known)
      warnings.push_back({Issue::Severity::warning, "unknown-key",
                          "ignoring unknown key '" + key + "'"});
  }

  ModelData data;
  data.observed_states =
      string_array(require(j, "observed_states"), "observed_states");
  data.hidden_states =
      string_array(require(j, "hidden_states"), "hidden_states");
  if (data.observed_states.empty()) parse_fail("observed_states is empty");
  if (data.hidden_states.empty()) parse_fail("hidden_states is empty");

  auto parse_actions = [&](const char* key) {
    const json& obj = require(j, key);
    if (!obj.is_object())
      parse_fail(std::string(key) + " must map state labels to arrays");
    std::vector<std::vector<std::string>> actions(data.observed_states.size());
    for (const auto& [state, list] : obj.items()) {
      int x = -1;
      for (std::size_t i = 0; i < data.observed_states.size(); ++i)
        if (data.observed_states[i] == state) x = static_cast<int>(i);
      if (x < 0)
        parse_fail(std::string(key) + ": unknown state '" + state + "'");
      actions[x] = string_array(list, key);
    }
    return actions;
  };
  data.actions1 = parse_actions("actions1");
  data.actions2 = parse_actions("actions2");

  const json& horizon = require(j, "horizon_ticks");
  if (!horizon.is_number_integer())
    parse_fail("horizon_ticks must be an integer");
  data.horizon_ticks = horizon.get<int>();

  data.initial_goal = exact_rational(require(j, "initial_goal"), "initial_goal");

  data.initial_hidden.assign(data.hidden_states.size(), 0.0);
  const json& hidden = require(j, "initial_hidden");
  if (!hidden.is_object())
    parse_fail("initial_hidden must map hidden labels to numbers");
  for (const auto& [label, weight] : hidden.items()) {
    const int y = label_index(data.hidden_states, json(label),
                              "initial_hidden");
    if (!weight.is_number())
      parse_fail("initial_hidden weight for '" + label + "' must be a number");
    data.initial_hidden[y] = weight.get<double>();
  }

  // Index rows exactly like GameModel::row_index so records land in place.
  std::vector<std::size_t> offsets(data.observed_states.size());
  std::size_t total = 0;
  for (std::size_t x = 0; x < data.observed_states.size(); ++x) {
    offsets[x] = total;
    total += data.hidden_states.size() * data.actions1[x].size() *
             data.actions2[x].size();
  }
  data.kernel.resize(total);
  data.reward_rate.assign(total, Rational(0));

  auto row_of = [&](const json& record, const std::string& what) {
    const int x = label_index(data.observed_states, require(record, "x"),
                              what + ".x");
    const int y = label_index(data.hidden_states, require(record, "y"),
                              what + ".y");
    const int a = label_index(data.actions1[x], require(record, "a"),
                              what + ".a");
    const int b = label_index(data.actions2[x], require(record, "b"),
                              what + ".b");
    return offsets[x] + (static_cast<std::size_t>(y) * data.actions1[x].size() +
                         a) * data.actions2[x].size() +
           b;
  };

  const json& kernel = require(j, "kernel");
  if (!kernel.is_array()) parse_fail("kernel must be an array of records");
  for (const auto& record : kernel) {
    if (!record.is_object()) parse_fail("kernel records must be objects");
    const std::size_t row = row_of(record, "kernel");
    const json& theta = require(record, "theta");
    if (!theta.is_number_integer())
      parse_fail("kernel.theta must be an integer tick count");
    KernelEntry entry;
    entry.theta = theta.get<int>();
    entry.x_next = label_index(data.observed_states, require(record, "x_next"),
                               "kernel.x_next");
    entry.y_next = label_index(data.hidden_states, require(record, "y_next"),
                               "kernel.y_next");
    const json& p = require(record, "p");
    if (!p.is_number()) parse_fail("kernel.p must be a number");
    entry.p = p.get<double>();
    data.kernel[row].push_back(entry);
  }

  const json& rates = require(j, "reward_rate");
  if (!rates.is_array()) parse_fail("reward_rate must be an array of records");
  for (const auto& record : rates) {
    if (!record.is_object()) parse_fail("reward_rate records must be objects");
    const std::size_t row = row_of(record, "reward_rate");
    data.reward_rate[row] =
        exact_rational(require(record, "rate"), "reward_rate.rate");
  }

  return LoadedModel{GameModel(std::move(data)), std::move(warnings)};
}

LoadedModel load_model_file(const std::string& path) {
  return parse_model_json(read_json_file(path));
}

json model_to_json(const GameModel& model) {
  json j;
  j["observed_states"] = json::array();
  for (int x = 0; x < model.num_observed(); ++x)
    j["observed_states"].push_back(model.observed_label(x));
  j["hidden_states"] = json::array();
  for (int y = 0; y < model.num_hidden(); ++y)
    j["hidden_states"].push_back(model.hidden_label(y));
  j["actions1"] = json::object();
  j["actions2"] = json::object();
  for (int x = 0; x < model.num_observed(); ++x) {
    j["actions1"][model.observed_label(x)] = model.actions1(x);
    j["actions2"][model.observed_label(x)] = model.actions2(x);
  }
  json kernel = json::array();
  json rates = json::array();
  for (int x = 0; x < model.num_observed(); ++x) {
    for (int y = 0; y < model.num_hidden(); ++y) {
      for (std::size_t a = 0; a < model.actions1(x).size(); ++a) {
        for (std::size_t b = 0; b < model.actions2(x).size(); ++b) {
          const int ai = static_cast<int>(a);
          const int bi = static_cast<int>(b);
          for (const auto& e : model.kernel_row(x, y, ai, bi)) {
            kernel.push_back({{"x", model.observed_label(x)},
                              {"y", model.hidden_label(y)},
                              {"a", model.actions1(x)[a]},
                              {"b", model.actions2(x)[b]},
                              {"theta", e.theta},
                              {"x_next", model.observed_label(e.x_next)},
                              {"y_next", model.hidden_label(e.y_next)},
                              {"p", e.p}});
          }
          const Rational& rate = model.reward_rate(x, y, ai, bi);
          if (rate != Rational(0)) {
            rates.push_back({{"x", model.observed_label(x)},
                             {"y", model.hidden_label(y)},
                             {"a", model.actions1(x)[a]},
                             {"b", model.actions2(x)[b]},
                             {"rate", rate.str()}});
          }
        }
      }
    }
  }
  j["kernel"] = std::move(kernel);
  j["reward_rate"] = std::move(rates);
  j["horizon_ticks"] = model.horizon_ticks();
  j["initial_goal"] = model.initial_goal().str();
  json hidden = json::object();
  for (int y = 0; y < model.num_hidden(); ++y)
    hidden[model.hidden_label(y)] = model.initial_hidden()[y];
  j["initial_hidden"] = std::move(hidden);
  return j;
}

json report_to_json(const ValidationReport& report) {
  json issues = json::array();
  for (const auto& issue : report.issues) {
    issues.push_back(
        {{"severity",
          issue.severity == Issue::Severity::error ? "error" : "warning"},
         {"code", issue.code},
         {"message", issue.message}});
  }
  return json{{"ok", report.ok}, {"issues", issues}};
}

json belief_to_json(const GameModel& model, const Belief& belief) {
  json atoms = json::array();
  for (const auto& atom : belief.atoms()) {
    atoms.push_back({{"y", model.hidden_label(atom.y)},
                     {"lambda", atom.goal.str()},
                     {"w", atom.weight}});
  }
  return atoms;
}

json policy_to_json(const GameModel& model, const PolicyTable& table,
                    bool player1) {
  json out = json::object();
  for (const auto& [key, mix] : table.mix) {
    const int x = observed_of_key(model, key);
    const auto& labels = player1 ? model.actions1(x) : model.actions2(x);
    json entry = json::object();
    for (std::size_t i = 0; i < mix.size() && i < labels.size(); ++i)
      entry[labels[i]] = mix[i];
    out[key] = std::move(entry);
  }
  return out;
}

PolicyTable parse_policy_json(const GameModel& model, const json& j,
                              bool player1) {
  const json* table = &j;
  if (j.is_object() && j.contains("policies")) {
    const json& policies = j["policies"];
    const char* which = player1 ? "p1" : "p2";
    if (!policies.is_object() || !policies.contains(which))
      parse_fail(std::string("solve result has no policies.") + which);
    table = &policies[which];
  }
  if (!table->is_object())
    parse_fail("policy file must be an object keyed by state keys");

  PolicyTable out;
  for (const auto& [key, entry] : table->items()) {
    if (!entry.is_object())
      parse_fail("policy entry for '" + key + "' must be an object");
    const int x = observed_of_key(model, key);
    const auto& labels = player1 ? model.actions1(x) : model.actions2(x);
    std::vector<double> mix(labels.size(), 0.0);
    double sum = 0.0;
    for (const auto& [action, weight] : entry.items()) {
      const int i = label_index(labels, json(action),
                                "policy entry for '" + key + "'");
      if (!weight.is_number())
        parse_fail("policy weight for '" + key + "' must be a number");
      const double w = weight.get<double>();
      if (w < 0.0)
        parse_fail("policy weight for '" + key + "' is negative");
      mix[i] = w;
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      parse_fail("policy entry for '" + key + "' sums to " +
                 std::to_string(sum));
    out.mix.emplace(key, std::move(mix));
  }
  return out;
}

PolicyTable load_policy_file(const GameModel& model, const std::string& path,
                             bool player1) {
  return parse_policy_json(model, read_json_file(path), player1);
}

json solve_result_to_json(const GameModel& model, const SolveResult& result,
                          bool full_tables) {
  json out{{"value", result.root_value},
           {"reachable_count", result.reachable_count},
           {"backup_count", result.backup_count},
           {"roots", result.root_keys}};
  if (full_tables) {
    json values = json::object();
    for (const auto& [key, v] : result.value_table) values[key] = v;
    out["value_table"] = std::move(values);
    out["policies"] = {{"p1", policy_to_json(model, result.policy1, true)},
                       {"p2", policy_to_json(model, result.policy2, false)}};
  }
  return out;
}

json rollout_to_json(const GameModel& model, const RolloutRecord& record) {
  json jumps = json::array();
  for (const auto& jump : record.jumps) {
    jumps.push_back({{"epoch", jump.epoch},
                     {"start", jump.start},
                     {"x", model.observed_label(jump.x)},
                     {"y", model.hidden_label(jump.y)},
                     {"a", model.actions1(jump.x)[jump.a]},
                     {"b", model.actions2(jump.x)[jump.b]},
                     {"sojourn", jump.sojourn}});
  }
  return json{{"jumps", std::move(jumps)},
              {"accumulated_reward", record.accumulated_reward.str()},
              {"success", record.success}};
}

json estimate_to_json(const RiskEstimate& estimate) {
  return json{{"mean", estimate.mean},
              {"stderr", estimate.stderr_},
              {"n", estimate.n},
              {"seed", estimate.seed}};
}

ObservedHistory parse_history_json(const GameModel& model, const json& j) {
  if (!j.is_object()) parse_fail("history file must be a JSON object");
  ObservedHistory history;
  const json& x0 = require(j, "x0");
  if (!x0.is_string()) parse_fail("history.x0 must be a state label");
  history.x0 = [&] {
    try {
      return model.observed_index(x0.get<std::string>());
    } catch (const PosmgError& e) {
      parse_fail(e.what());
    }
  }();
  const json& steps = require(j, "steps");
  if (!steps.is_array()) parse_fail("history.steps must be an array");
  int x = history.x0;
  for (const auto& record : steps) {
    if (!record.is_object()) parse_fail("history steps must be objects");
    HistoryStep step;
    try {
      step.a = model.action1_index(
          x, require(record, "a").get<std::string>());
      step.b = model.action2_index(
          x, require(record, "b").get<std::string>());
      step.x_next =
          model.observed_index(require(record, "x_next").get<std::string>());
    } catch (const PosmgError& e) {
      parse_fail(e.what());
    }
    const json& theta = require(record, "theta");
    if (!theta.is_number_integer() || theta.get<int>() < 1)
      parse_fail("history.theta must be a positive integer");
    step.theta = theta.get<int>();
    history.steps.push_back(step);
    x = step.x_next;
  }
  return history;
}

ObservedHistory load_history_file(const GameModel& model,
                                  const std::string& path) {
  return parse_history_json(model, read_json_file(path));
}

}  // namespace posmg
