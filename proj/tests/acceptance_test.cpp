// Acceptance suite: one pass/fail line per criterion, exit 0 only if all
// pass. The CLI binary path is expected as argv[1] (the pipeline criterion
// shells out to it).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "posmg/serialize.hpp"
#include "posmg/sim.hpp"
#include "posmg/solver.hpp"
#include "testutil.hpp"

using namespace posmg;
using nlohmann::json;

namespace {

struct Check {
  bool pass = true;
  long long assertions = 0;
  std::string note;

  void require(bool ok, const std::string& context) {
    ++assertions;
    if (!ok && pass) {
      pass = false;
      note = context;
    }
  }
};

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

// Shared battery of solvable desk-scale models.
std::vector<GameModel> battery() {
  std::vector<GameModel> models;
  models.push_back(test::make_m1());
  models.push_back(test::make_m2());
  models.push_back(test::make_m3());
  models.push_back(test::make_r0_dyadic(2));
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    test::ModelShape shape;
    shape.nx = 2;
    shape.ny = 2;
    shape.na = 2;
    shape.nb = 2;
    shape.horizon = 2;
    models.push_back(test::random_model(seed, shape));
  }
  for (std::uint64_t seed = 5; seed <= 6; ++seed) {
    test::ModelShape shape;
    shape.nx = 1;
    shape.ny = 3;
    shape.na = 2;
    shape.nb = 1;
    shape.horizon = 3;
    models.push_back(test::random_model(seed, shape));
  }
  for (std::uint64_t seed = 7; seed <= 8; ++seed) {
    test::ModelShape shape;
    shape.nx = 3;
    shape.ny = 2;
    shape.na = 1;
    shape.nb = 2;
    shape.horizon = 2;
    models.push_back(test::random_model(seed, shape));
  }
  return models;
}

// --- criterion 1: filter vs exhaustive conditional law -------------------

Check filter_correctness() {
  Check check;
  const auto start = std::chrono::steady_clock::now();
  int model_count = 0;
  long long histories = 0;
  for (std::uint64_t seed = 100; model_count < 50; ++seed) {
    test::ModelShape shape;
    shape.nx = 1 + static_cast<int>(seed % 3);
    shape.ny = 1 + static_cast<int>((seed / 3) % 3);
    shape.na = 1 + static_cast<int>(seed % 2);
    shape.nb = 1 + static_cast<int>((seed / 2) % 2);
    shape.horizon = 1 + static_cast<int>(seed % 3);
    shape.theta_max = 1 + static_cast<int>(seed % 2);
    const GameModel m = test::random_model(seed, shape);
    if (!validate(m).ok) continue;
    ++model_count;
    test::for_each_positive_history(m, 0, 3, [&](const ObservedHistory& h) {
      ++histories;
      const Belief filtered = filter_trace(m, h).back();
      const Belief oracle = exhaustive_conditional_law(m, h);
      check.require(filtered.atoms().size() == oracle.atoms().size(),
                    "filter support mismatch");
      if (filtered.atoms().size() != oracle.atoms().size()) return;
      for (std::size_t i = 0; i < filtered.atoms().size(); ++i) {
        const auto& f = filtered.atoms()[i];
        const auto& o = oracle.atoms()[i];
        check.require(f.y == o.y && f.goal == o.goal &&
                          std::abs(f.weight - o.weight) <= 1e-9,
                      "filter atom deviates beyond 1e-9");
      }
    });
  }
  const double seconds = elapsed_s(start);
  check.require(seconds <= 60.0, "runtime budget of 60 s exceeded");
  std::ostringstream note;
  note << model_count << " models, " << histories << " histories";
  if (check.pass) check.note = note.str();
  return check;
}

// --- criterion 2: monotone iteration, exact stabilization ----------------

Check monotone_iteration() {
  Check check;
  for (const GameModel& m : battery()) {
    const int horizon = m.horizon_ticks();
    const ValueIterationTrace trace = value_iteration_trace(m, horizon + 2);
    for (std::size_t k = 0; k + 1 < trace.tables.size(); ++k)
      for (std::size_t i = 0; i < trace.keys.size(); ++i)
        check.require(
            trace.tables[k + 1][i] <= trace.tables[k][i] + 1e-12,
            "iteration not monotone at " + trace.keys[i]);
    check.require(trace.tables[horizon + 1] == trace.tables[horizon + 2],
                  "u^k not frozen at k = horizon");
    check.require(trace.tables[horizon + 1] == trace.tables[horizon + 3],
                  "u^k not frozen past k = horizon");
  }
  return check;
}

// --- criterion 3: Shapley fixed point ------------------------------------

Check shapley_fixed_point() {
  Check check;
  for (const GameModel& m : battery()) {
    const SolveResult result = solve(m);
    const ValueFn lookup = [&](const AugmentedState& s) {
      return result.value_table.at(state_key(m, s));
    };
    for (const auto& [key, s] : test::reachable_states(m)) {
      const double v = result.value_table.at(key);
      const double backed = s.t == 0 ? s.mu.goal_tail_mass()
                                     : shapley_backup(m, s, lookup).value;
      check.require(std::abs(backed - v) <= 1e-9,
                    "|TV - V| > 1e-9 at " + key);
    }
  }
  return check;
}

// --- criterion 4: Nash deviation check ------------------------------------

Check nash_deviations() {
  Check check;
  int models_tested = 0;
  long long deviations = 0;

  auto test_model = [&](const GameModel& m) {
    if (!validate(m).ok) return;
    const SolveResult result = solve(m);
    const AugmentedState root = root_state(m, 0);
    const double v = result.root_value;

    const auto states1 = test::deviation_states(m, root, result.policy2, true);
    const auto states2 = test::deviation_states(m, root, result.policy1, false);
    if (states1.size() > 12 || states2.size() > 12) return;
    ++models_tested;

    test::for_each_pure_assignment(
        m, states1, true, [&](const std::vector<int>& choice) {
          const PolicyTable p1 = test::pure_policy(m, states1, choice, true);
          const double f = evaluate_policies(m, p1, result.policy2, root);
          ++deviations;
          check.require(f >= v - 1e-9,
                        "player-1 deviation beats the equilibrium");
        });
    test::for_each_pure_assignment(
        m, states2, false, [&](const std::vector<int>& choice) {
          const PolicyTable p2 = test::pure_policy(m, states2, choice, false);
          const double f = evaluate_policies(m, result.policy1, p2, root);
          ++deviations;
          check.require(f <= v + 1e-9,
                        "player-2 deviation beats the equilibrium");
        });
  };

  test_model(test::make_m2());
  for (std::uint64_t seed = 300; seed < 312; ++seed) {
    test::ModelShape shape;
    shape.nx = 1 + static_cast<int>(seed % 2);
    shape.ny = 2;
    shape.na = 2;
    shape.nb = 2;
    shape.horizon = 2;
    test_model(test::random_model(seed, shape));
  }
  // horizon-3 depth coverage: an action-independent kernel with rates that
  // depend on (y, a) only keeps the deviation set enumerable
  {
    ModelData d;
    d.observed_states = {"x0"};
    d.hidden_states = {"y0", "y1"};
    d.actions1 = {{"a0", "a1"}};
    d.actions2 = {{"b0", "b1"}};
    d.kernel.resize(8);
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          d.kernel[(y * 2 + a) * 2 + b] = {{1, 0, y, 0.75},
                                           {2, 0, 1 - y, 0.25}};
    d.reward_rate = {Rational(1),    Rational(1),    Rational(1, 2),
                     Rational(1, 2), Rational(0),    Rational(0),
                     Rational(2),    Rational(2)};
    d.horizon_ticks = 3;
    d.initial_goal = Rational(2);
    d.initial_hidden = {0.5, 0.5};
    test_model(GameModel(std::move(d)));
  }

  check.require(models_tested >= 8, "too few enumerable game models");
  std::ostringstream note;
  note << models_tested << " models, " << deviations << " pure deviations";
  if (check.pass) check.note = note.str();
  return check;
}

// --- criterion 5: comparison bounds ----------------------------------------

Check comparison_bounds() {
  Check check;
  std::vector<GameModel> models;
  models.push_back(test::make_m2());
  for (std::uint64_t seed = 400; seed < 404; ++seed) {
    test::ModelShape shape;
    shape.nx = 2;
    shape.ny = 2;
    shape.na = 2;
    shape.nb = 2;
    shape.horizon = 2;
    models.push_back(test::random_model(seed, shape));
  }
  for (const GameModel& m : models) {
    if (!validate(m).ok) continue;
    const auto states = test::reachable_states(m);
    const AugmentedState root = root_state(m, 0);
    const SolveResult result = solve(m);
    for (int trial = 0; trial < 20; ++trial) {
      const PolicyTable psi =
          test::random_policy(m, states, false, 9000 + trial);
      const double lower =
          one_sided_backup_solve(m, psi, FixedSide::fix2, root);
      check.require(
          lower <= evaluate_policies(m, result.policy1, psi, root) + 1e-9,
          "fix2 bound fails against the equilibrium row policy");
      for (int sample = 0; sample < 3; ++sample) {
        const PolicyTable p1 =
            test::random_policy(m, states, true, 5000 + 10 * trial + sample);
        check.require(lower <= evaluate_policies(m, p1, psi, root) + 1e-9,
                      "fix2 lower bound violated");
      }
      const PolicyTable phi =
          test::random_policy(m, states, true, 7000 + trial);
      const double upper =
          one_sided_backup_solve(m, phi, FixedSide::fix1, root);
      check.require(
          upper >= evaluate_policies(m, phi, result.policy2, root) - 1e-9,
          "fix1 bound fails against the equilibrium column policy");
      for (int sample = 0; sample < 3; ++sample) {
        const PolicyTable p2 =
            test::random_policy(m, states, false, 6000 + 10 * trial + sample);
        check.require(upper >= evaluate_policies(m, phi, p2, root) - 1e-9,
                      "fix1 upper bound violated");
      }
    }
  }
  return check;
}

// --- criterion 6: oracle equivalence ---------------------------------------

Check oracle_equivalence() {
  Check check;
  for (const GameModel& m : battery()) {
    const SolveResult result = solve(m);
    const AugmentedState root = root_state(m, 0);
    const double eq_eval =
        evaluate_policies(m, result.policy1, result.policy2, root);
    const double eq_enum =
        enumerate_exact(m, result.policy1, result.policy2, root);
    check.require(std::abs(eq_eval - eq_enum) <= 1e-9,
                  "equilibrium policies: evaluate vs enumerate mismatch");
    const auto states = test::reachable_states(m);
    for (int trial = 0; trial < 3; ++trial) {
      const PolicyTable p1 = test::random_policy(m, states, true, 70 + trial);
      const PolicyTable p2 = test::random_policy(m, states, false, 80 + trial);
      const double recursive = evaluate_policies(m, p1, p2, root);
      const double enumerated = enumerate_exact(m, p1, p2, root);
      check.require(std::abs(recursive - enumerated) <= 1e-9,
                    "random policies: evaluate vs enumerate mismatch");
    }
  }
  return check;
}

// --- criterion 7: Monte Carlo consistency ----------------------------------

Check monte_carlo_consistency() {
  Check check;
  std::vector<GameModel> models;
  models.push_back(test::make_m1());
  for (std::uint64_t seed = 500; seed < 510; ++seed) {
    test::ModelShape shape;
    shape.nx = 1 + static_cast<int>(seed % 2);
    shape.ny = 2;
    shape.na = 1 + static_cast<int>(seed % 2);
    shape.nb = 1 + static_cast<int>((seed / 2) % 2);
    shape.horizon = 2 + static_cast<int>(seed % 2);
    models.push_back(test::random_model(seed, shape));
  }
  double worst_sigma = 0.0;
  for (const GameModel& m : models) {
    const auto start = std::chrono::steady_clock::now();
    const SolveResult result = solve(m);
    const RiskEstimate estimate =
        estimate_risk(m, result.policy1, result.policy2, 0, 100000, 424242);
    if (estimate.stderr_ == 0.0) {
      // degenerate estimator: the solved value must itself be 0 or 1
      check.require(std::abs(estimate.mean - result.root_value) <= 1e-9,
                    "degenerate estimate off the exact value");
    } else {
      const double sigmas =
          std::abs(estimate.mean - result.root_value) / estimate.stderr_;
      worst_sigma = std::max(worst_sigma, sigmas);
      check.require(sigmas <= 3.0, "estimate further than 3 sigma");
    }
    check.require(elapsed_s(start) <= 30.0, "per-model budget of 30 s");
  }
  std::ostringstream note;
  note << models.size() << " models, worst deviation " << std::fixed
       << std::setprecision(2) << worst_sigma << " sigma";
  if (check.pass) check.note = note.str();
  return check;
}

// --- criterion 8: degenerate closed forms ----------------------------------

Check degenerate_closed_forms() {
  Check check;
  // r = 0, goal >= 0: value exactly 1 (exact-arithmetic instances)
  for (int horizon : {1, 2, 3}) {
    const GameModel m = test::make_r0_dyadic(horizon);
    const SolveResult result = solve(m);
    check.require(result.root_value == 1.0, "r = 0 value not exactly 1");
    for (const auto& [key, v] : result.value_table)
      check.require(v == 1.0, "r = 0 table value not exactly 1");
  }
  // negative goal: value exactly 0 on arbitrary models
  for (std::uint64_t seed = 600; seed < 604; ++seed) {
    test::ModelShape shape;
    shape.nx = 2;
    shape.na = 2;
    shape.nb = 2;
    const GameModel base = test::random_model(seed, shape);
    json j = model_to_json(base);
    j["initial_goal"] = "-1/3";
    const GameModel m = parse_model_json(j).model;
    const SolveResult result = solve(m);
    check.require(result.root_value == 0.0, "negative goal value not 0");
    for (const auto& [key, v] : result.value_table)
      check.require(v == 0.0, "negative goal table value not 0");
  }
  // t = 0 root: the value functional is the goal tail mass
  for (const GameModel& m : battery()) {
    const AugmentedState t0{0, 0, initial_belief(m)};
    const double tail = t0.mu.goal_tail_mass();
    check.require(evaluate_policies(m, {}, {}, t0) == tail,
                  "t = 0 evaluation differs from the tail mass");
    const double backed =
        shapley_backup(m, t0, [](const AugmentedState&) { return 0.0; }).value;
    check.require(std::abs(backed - tail) <= 1e-12,
                  "t = 0 backup differs from the tail mass");
  }
  return check;
}

// --- criterion 9: matrix game solver ----------------------------------------

Check matrix_game_solver() {
  Check check;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const int rows = 1 + static_cast<int>(uniform_draw(seed, 11, 0) * 4) % 4;
    const int cols = 1 + static_cast<int>(uniform_draw(seed, 12, 0) * 4) % 4;
    StageMatrix m(rows, cols);
    for (int i = 0; i < rows * cols; ++i)
      m.entries[i] = uniform_draw(seed, 13, i);
    const SaddleSolution s = solve_zero_sum(m);
    check.require(s.gap >= 0.0 && s.gap <= 1e-9, "duality gap above 1e-9");
  }
  // closed-form 2x2 agreement
  for (std::uint64_t seed = 2000; seed < 2200; ++seed) {
    StageMatrix m(2, 2);
    for (int i = 0; i < 4; ++i) m.entries[i] = uniform_draw(seed, 14, i);
    double expected;
    {
      const double a = m.at(0, 0), b = m.at(0, 1), c = m.at(1, 0),
                   d = m.at(1, 1);
      expected = (a * d - b * c) / (a - b - c + d);
      bool pure = false;
      for (int i = 0; i < 2 && !pure; ++i)
        for (int j = 0; j < 2 && !pure; ++j)
          if (m.at(i, j) <= m.at(1 - i, j) && m.at(i, j) >= m.at(i, 1 - j)) {
            expected = m.at(i, j);
            pure = true;
          }
    }
    check.require(std::abs(solve_zero_sum(m).value - expected) <= 1e-9,
                  "2x2 closed form disagrees");
  }
  // constant shifts preserve the optimal supports (exact dyadic grids keep
  // the pivot sequence identical)
  for (std::uint64_t seed = 3000; seed < 3100; ++seed) {
    StageMatrix m(3, 3);
    for (int i = 0; i < 9; ++i)
      m.entries[i] = std::floor(uniform_draw(seed, 15, i) * 64.0) / 64.0;
    StageMatrix shifted = m;
    for (double& e : shifted.entries) e += 0.25;
    const SaddleSolution s0 = solve_zero_sum(m);
    const SaddleSolution s1 = solve_zero_sum(shifted);
    check.require(std::abs((s1.value - s0.value) - 0.25) <= 1e-12,
                  "shift does not move the value by the constant");
    for (int i = 0; i < 3; ++i) {
      check.require((s0.row_mix[i] > 0) == (s1.row_mix[i] > 0),
                    "row support changed under a constant shift");
      check.require((s0.col_mix[i] > 0) == (s1.col_mix[i] > 0),
                    "column support changed under a constant shift");
    }
  }
  return check;
}

// --- criterion 10: CLI pipeline reproducibility ------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Check pipeline_reproducibility(const std::string& cli) {
  Check check;
  if (cli.empty()) {
    check.pass = false;
    check.note = "CLI path not passed as argv[1]";
    return check;
  }
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("posmg_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  std::vector<GameModel> models;
  models.push_back(test::make_m2());
  {
    test::ModelShape shape;
    shape.nx = 2;
    shape.ny = 2;
    shape.na = 2;
    shape.nb = 2;
    shape.horizon = 2;
    models.push_back(test::random_model(777, shape));
  }

  int index = 0;
  for (const GameModel& m : models) {
    const std::string tag = std::to_string(index);
    const fs::path model_path = dir / ("model" + tag + ".json");
    const fs::path solved_path = dir / ("solved" + tag + ".json");
    const fs::path eval_path = dir / ("eval" + tag + ".json");
    const fs::path sim1_path = dir / ("sim1_" + tag + ".json");
    const fs::path sim2_path = dir / ("sim2_" + tag + ".json");
    {
      std::ofstream out(model_path);
      out << model_to_json(m).dump(2) << "\n";
    }
    auto run = [&](const std::string& args, const fs::path& stdout_to) {
      const std::string command = "\"" + cli + "\" " + args + " > " +
                                  stdout_to.string() + " 2>/dev/null";
      return std::system(command.c_str()) == 0;
    };
    check.require(run("solve " + model_path.string() + " --full-tables --out " +
                          solved_path.string(),
                      dir / "solve_stdout.json"),
                  "solve exited nonzero");
    check.require(run("evaluate " + model_path.string() + " --p1 " +
                          solved_path.string() + " --p2 " +
                          solved_path.string(),
                      eval_path),
                  "evaluate exited nonzero");
    const json solved = json::parse(read_file(solved_path));
    const json eval = json::parse(read_file(eval_path));
    check.require(std::abs(solved["value"].get<double>() -
                           eval["value"].get<double>()) <= 1e-9,
                  "evaluate does not reproduce the solved value");

    const std::string sim_args = "simulate " + model_path.string() + " --p1 " +
                                 solved_path.string() + " --p2 " +
                                 solved_path.string() + " --n 20000 --seed 99";
    check.require(run(sim_args, sim1_path), "simulate exited nonzero");
    check.require(run(sim_args, sim2_path), "simulate exited nonzero");
    const std::string sim1 = read_file(sim1_path);
    check.require(!sim1.empty() && sim1 == read_file(sim2_path),
                  "repeated simulate is not byte-identical");
    ++index;
  }
  fs::remove_all(dir);
  return check;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  int failures = 0;

  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"1 filter correctness vs exhaustive conditional law",
       filter_correctness},
      {"2 monotone value iteration with exact stabilization",
       monotone_iteration},
      {"3 Shapley fixed point on the reachable set", shapley_fixed_point},
      {"4 Nash deviation check over all pure Markov deviations",
       nash_deviations},
      {"5 one-sided comparison bounds", comparison_bounds},
      {"6 policy evaluation agrees with the brute-force oracle",
       oracle_equivalence},
      {"7 Monte Carlo estimates within 3 sigma of the value",
       monte_carlo_consistency},
      {"8 degenerate closed forms", degenerate_closed_forms},
      {"9 matrix-game duality gap, closed form, shift invariance",
       matrix_game_solver},
      {"10 CLI pipeline reproducibility",
       [&cli] { return pipeline_reproducibility(cli); }},
  };

  for (const auto& [title, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = fn();
    } catch (const std::exception& e) {
      check.pass = false;
      check.note = std::string("exception: ") + e.what();
    }
    const double seconds = elapsed_s(start);
    std::cout << (check.pass ? "[PASS]" : "[FAIL]") << " criterion " << title
              << " (" << check.assertions << " checks, " << std::fixed
              << std::setprecision(1) << seconds << " s)";
    if (!check.note.empty()) std::cout << " -- " << check.note;
    std::cout << "\n";
    if (!check.pass) ++failures;
  }

  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
