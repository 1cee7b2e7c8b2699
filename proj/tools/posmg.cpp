// posmg: solve and simulate finite-horizon partially observable zero-sum
// semi-Markov games under the risk-probability criterion.
//
// Exit codes: 0 success, 1 domain failure (validation, impossible
// observation, coverage, caps), 2 I/O or parse failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "posmg/serialize.hpp"
#include "posmg/sim.hpp"
#include "posmg/solver.hpp"

namespace {

using nlohmann::json;

int worker_threads() {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (const char* env = std::getenv("POSMG_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) threads = std::min(threads, cap);
  }
  return threads;
}

int root_index(const posmg::GameModel& model, const std::string& label) {
  if (label.empty()) return 0;  // first observed state
  return model.observed_index(label);
}

void write_output(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2);
  std::cout << text << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out)
      throw posmg::PosmgError(posmg::Errc::parse,
                              "cannot write to '" + out_path + "'");
    out << text << "\n";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"POSMG risk-probability game solver"};
  app.require_subcommand(1);

  std::string model_path;
  std::string out_path;
  std::string p1_path;
  std::string p2_path;
  std::string history_path;
  std::string dump_path;
  std::string root_label;
  long long cap = 5'000'000;
  long long n = 1;
  std::uint64_t seed = 0;
  bool full_tables = false;

  auto* cmd_validate = app.add_subcommand("validate", "check a model file");
  cmd_validate->add_option("model", model_path)->required();

  auto* cmd_solve =
      app.add_subcommand("solve", "compute the game value and equilibrium");
  cmd_solve->add_option("model", model_path)->required();
  cmd_solve->add_option("--out", out_path, "also write the result here");
  cmd_solve->add_flag("--full-tables", full_tables,
                      "include value and policy tables");
  cmd_solve->add_option("--cap", cap, "reachable-state cap");
  cmd_solve->add_option("--root", root_label,
                        "root observed state (default: first)");

  auto* cmd_evaluate =
      app.add_subcommand("evaluate", "risk probability of a policy pair");
  cmd_evaluate->add_option("model", model_path)->required();
  cmd_evaluate->add_option("--p1", p1_path)->required();
  cmd_evaluate->add_option("--p2", p2_path)->required();
  cmd_evaluate->add_option("--root", root_label);

  auto* cmd_simulate =
      app.add_subcommand("simulate", "Monte Carlo risk estimate");
  cmd_simulate->add_option("model", model_path)->required();
  cmd_simulate->add_option("--p1", p1_path)->required();
  cmd_simulate->add_option("--p2", p2_path)->required();
  cmd_simulate->add_option("--n", n, "rollout count")->required();
  cmd_simulate->add_option("--seed", seed)->required();
  cmd_simulate->add_option("--root", root_label);
  cmd_simulate->add_option("--dump", dump_path,
                           "write one rollout record per line here");

  auto* cmd_trace =
      app.add_subcommand("trace", "belief trace along an observable history");
  cmd_trace->add_option("model", model_path)->required();
  cmd_trace->add_option("--history", history_path)->required();

  CLI11_PARSE(app, argc, argv);

  auto loaded = posmg::load_model_file(model_path);
  const posmg::GameModel& model = loaded.model;

  if (cmd_validate->parsed()) {
    posmg::ValidationReport report = posmg::validate(model);
    report.issues.insert(report.issues.begin(), loaded.warnings.begin(),
                         loaded.warnings.end());
    std::cout << posmg::report_to_json(report).dump(2) << "\n";
    return report.ok ? 0 : 1;
  }

  if (cmd_solve->parsed()) {
    posmg::SolveOptions options;
    options.reachable_cap = cap;
    if (!root_label.empty())
      options.roots = {model.observed_index(root_label)};
    const posmg::SolveResult result = posmg::solve(model, options);
    write_output(posmg::solve_result_to_json(model, result, full_tables),
                 out_path);
    return 0;
  }

  if (cmd_evaluate->parsed()) {
    const auto p1 = posmg::load_policy_file(model, p1_path, true);
    const auto p2 = posmg::load_policy_file(model, p2_path, false);
    const auto root =
        posmg::root_state(model, root_index(model, root_label));
    const double value = posmg::evaluate_policies(model, p1, p2, root);
    std::cout << json{{"value", value}}.dump(2) << "\n";
    return 0;
  }

  if (cmd_simulate->parsed()) {
    const auto p1 = posmg::load_policy_file(model, p1_path, true);
    const auto p2 = posmg::load_policy_file(model, p2_path, false);
    const int root = root_index(model, root_label);
    const posmg::RiskEstimate estimate = posmg::estimate_risk(
        model, p1, p2, root, n, seed, worker_threads());
    if (!dump_path.empty()) {
      std::ofstream dump(dump_path);
      if (!dump)
        throw posmg::PosmgError(posmg::Errc::parse,
                                "cannot write to '" + dump_path + "'");
      for (long long i = 0; i < n; ++i) {
        const auto record = posmg::rollout(model, p1, p2, root, seed, i);
        dump << posmg::rollout_to_json(model, record).dump() << "\n";
      }
    }
    std::cout << posmg::estimate_to_json(estimate).dump(2) << "\n";
    return 0;
  }

  if (cmd_trace->parsed()) {
    const auto history = posmg::load_history_file(model, history_path);
    const auto beliefs = posmg::filter_trace(model, history);
    for (const auto& belief : beliefs)
      std::cout << posmg::belief_to_json(model, belief).dump() << "\n";
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const posmg::PosmgError& e) {
    std::cerr << "error (" << posmg::PosmgError::code_name(e.code())
              << "): " << e.what() << "\n";
    return e.code() == posmg::Errc::parse ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
