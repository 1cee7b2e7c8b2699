#include "posmg/solver.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace posmg {

namespace {

// Stage decomposition for one action pair: the no-jump mass that already
// satisfies the goal, plus the list of one-jump successors with their
// probabilities. stage_payoff and the value-iteration sweep share this so
// successor ordering is identical everywhere.
struct StageParts {
  double term1 = 0.0;
  std::vector<std::pair<AugmentedState, double>> successors;
};

StageParts stage_parts(const GameModel& model, const AugmentedState& s, int a,
                       int b) {
  StageParts parts;
  for (const auto& atom : s.mu.atoms()) {
    const Rational accrued =
        model.reward_rate(s.x, atom.y, a, b) * Rational(s.t);
    if (Rational(0) <= accrued && accrued <= atom.goal)
      parts.term1 += atom.weight * model.survival(s.x, atom.y, a, b, s.t);
  }
  const auto mu_y = s.mu.y_marginal(model.num_hidden());
  for (int theta = 1; theta <= s.t; ++theta) {
    for (int x_next = 0; x_next < model.num_observed(); ++x_next) {
      const double mass =
          model.mixed_marginal(s.x, mu_y, a, b, theta, x_next);
      if (mass <= 0.0) continue;
      AugmentedState child{
          s.t - theta, x_next,
          filter_update(model, s.t, s.x, s.mu, a, b, theta, x_next)};
      parts.successors.emplace_back(std::move(child), mass);
    }
  }
  return parts;
}

std::vector<double> uniform_mix(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

const std::vector<double>& policy_at(const PolicyTable& table,
                                     const std::string& key,
                                     std::size_t expected, const char* who) {
  const auto it = table.mix.find(key);
  if (it == table.mix.end())
    throw PosmgError(Errc::policy_coverage,
                     std::string(who) + " policy has no entry for state " + key);
  if (it->second.size() != expected)
    throw PosmgError(Errc::policy_coverage,
                     std::string(who) + " policy entry for state " + key +
                         " has the wrong number of actions");
  return it->second;
}

// Shared memoized depth-first recursion. Derived classes decide how the
// per-action-pair stage values combine into a state value; jumps consume at
// least one tick each, so the recursion bottoms out at t = 0 in at most
// horizon steps.
class Recursion {
 public:
  Recursion(const GameModel& model, long long cap)
      : model_(model), cap_(cap) {}

  virtual ~Recursion() = default;

  double value(const AugmentedState& s) {
    const std::string key = state_key(model_, s);
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (static_cast<long long>(memo_.size()) >= cap_)
      throw PosmgError(Errc::resource,
                       "reachable-set cap " + std::to_string(cap_) +
                           " exceeded");
    double v = s.t == 0 ? s.mu.goal_tail_mass() : combine(s, key);
    // values are probabilities; summation dust may poke past the ends
    v = std::min(1.0, std::max(0.0, v));
    memo_.emplace(key, v);
    on_value(s, key, v);
    return v;
  }

  long long visited() const { return static_cast<long long>(memo_.size()); }

 protected:
  virtual double combine(const AugmentedState& s, const std::string& key) = 0;
  virtual void on_value(const AugmentedState&, const std::string&, double) {}

  const GameModel& model_;

 private:
  long long cap_;
  std::unordered_map<std::string, double> memo_;
};

}  // namespace

std::string state_key(const GameModel& model, const AugmentedState& s) {
  std::string key = "t=" + std::to_string(s.t) +
                    "|x=" + model.observed_label(s.x) + "|";
  key += s.mu.canonical_key();
  return key;
}

AugmentedState root_state(const GameModel& model, int x) {
  return AugmentedState{model.horizon_ticks(), x, initial_belief(model)};
}

double stage_payoff(const GameModel& model, const AugmentedState& s, int a,
                    int b, const ValueFn& value) {
  const StageParts parts = stage_parts(model, s, a, b);
  double total = parts.term1;
  for (const auto& [child, mass] : parts.successors)
    total += value(child) * mass;
  return total;
}

BackupResult shapley_backup(const GameModel& model, const AugmentedState& s,
                            const ValueFn& value) {
  const int na = static_cast<int>(model.actions1(s.x).size());
  const int nb = static_cast<int>(model.actions2(s.x).size());
  StageMatrix matrix(na, nb);
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b)
      matrix.at(a, b) = stage_payoff(model, s, a, b, value);
  const SaddleSolution saddle = solve_zero_sum(matrix);
  return BackupResult{saddle.value, saddle.row_mix, saddle.col_mix};
}

SolveResult solve(const GameModel& model, const SolveOptions& options) {
  const ValidationReport report = validate(model);
  if (!report.ok)
    throw PosmgError(Errc::distribution,
                     "model failed validation; run validate for details");

  class Engine : public Recursion {
   public:
    Engine(const GameModel& m, long long cap, SolveResult& out)
        : Recursion(m, cap), out_(out) {}

   protected:
    double combine(const AugmentedState& s, const std::string& key) override {
      const BackupResult backup = shapley_backup(
          model_, s, [this](const AugmentedState& c) { return value(c); });
      ++out_.backup_count;
      out_.policy1.mix.emplace(key, backup.mix1);
      out_.policy2.mix.emplace(key, backup.mix2);
      return backup.value;
    }

    void on_value(const AugmentedState& s, const std::string& key,
                  double v) override {
      out_.value_table.emplace(key, v);
      if (s.t == 0) {
        // No decision remains; any mix is optimal. Use the uniform one.
        out_.policy1.mix.emplace(key, uniform_mix(model_.actions1(s.x).size()));
        out_.policy2.mix.emplace(key, uniform_mix(model_.actions2(s.x).size()));
      }
    }

   private:
    SolveResult& out_;
  };

  SolveResult result;
  Engine engine(model, options.reachable_cap, result);

  std::vector<int> roots = options.roots;
  if (roots.empty())
    for (int x = 0; x < model.num_observed(); ++x) roots.push_back(x);

  for (int x : roots) {
    const AugmentedState root = root_state(model, x);
    const double v = engine.value(root);
    result.root_keys.push_back(state_key(model, root));
    if (result.root_keys.size() == 1) result.root_value = v;
  }
  result.reachable_count = engine.visited();
  return result;
}

ValueIterationTrace value_iteration_trace(const GameModel& model, int kmax,
                                          const SolveOptions& options) {
  const ValidationReport report = validate(model);
  if (!report.ok)
    throw PosmgError(Errc::distribution,
                     "model failed validation; run validate for details");

  ValueIterationTrace trace;
  std::unordered_map<std::string, int> index_of;

  std::vector<int> roots = options.roots;
  if (roots.empty())
    for (int x = 0; x < model.num_observed(); ++x) roots.push_back(x);
  for (int x : roots) {
    AugmentedState root = root_state(model, x);
    std::string key = state_key(model, root);
    if (index_of.emplace(key, trace.states.size()).second) {
      trace.keys.push_back(std::move(key));
      trace.states.push_back(std::move(root));
    }
  }

  // Breadth-first closure of the reachable set (children discovered after
  // parents), with the stage decomposition cached per state and action
  // pair: term1 never changes across sweeps, only successor values do.
  struct CellParts {
    double term1;
    std::vector<std::pair<int, double>> successors;  // (state index, mass)
  };
  std::vector<std::vector<CellParts>> parts_by_state;

  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    if (static_cast<long long>(trace.states.size()) > options.reachable_cap)
      throw PosmgError(Errc::resource,
                       "reachable-set cap " +
                           std::to_string(options.reachable_cap) +
                           " exceeded");
    const AugmentedState s = trace.states[i];  // copy: vector may reallocate
    const int na = static_cast<int>(model.actions1(s.x).size());
    const int nb = static_cast<int>(model.actions2(s.x).size());
    std::vector<CellParts> cells;
    cells.reserve(na * nb);
    for (int a = 0; a < na; ++a) {
      for (int b = 0; b < nb; ++b) {
        StageParts sp = stage_parts(model, s, a, b);
        CellParts cell{sp.term1, {}};
        for (auto& [child, mass] : sp.successors) {
          std::string key = state_key(model, child);
          auto [it, inserted] = index_of.emplace(key, trace.states.size());
          if (inserted) {
            trace.keys.push_back(std::move(key));
            trace.states.push_back(std::move(child));
          }
          cell.successors.emplace_back(it->second, mass);
        }
        cells.push_back(std::move(cell));
      }
    }
    parts_by_state.push_back(std::move(cells));
  }

  const std::size_t count = trace.states.size();
  std::vector<double> current(count);
  for (std::size_t i = 0; i < count; ++i)
    current[i] = trace.states[i].mu.goal_tail_mass();
  trace.tables.push_back(current);

  for (int k = 0; k <= kmax; ++k) {
    std::vector<double> next(count);
    for (std::size_t i = 0; i < count; ++i) {
      const AugmentedState& s = trace.states[i];
      const int na = static_cast<int>(model.actions1(s.x).size());
      const int nb = static_cast<int>(model.actions2(s.x).size());
      StageMatrix matrix(na, nb);
      for (int a = 0; a < na; ++a) {
        for (int b = 0; b < nb; ++b) {
          const CellParts& cell = parts_by_state[i][a * nb + b];
          double v = cell.term1;
          for (const auto& [child, mass] : cell.successors)
            v += current[child] * mass;
          matrix.at(a, b) = v;
        }
      }
      next[i] = std::min(1.0, std::max(0.0, solve_zero_sum(matrix).value));
    }
    trace.tables.push_back(next);
    current = std::move(next);
  }
  return trace;
}

double evaluate_policies(const GameModel& model, const PolicyTable& p1,
                         const PolicyTable& p2, const AugmentedState& root) {
  class Engine : public Recursion {
   public:
    Engine(const GameModel& m, const PolicyTable& p1, const PolicyTable& p2)
        : Recursion(m, std::numeric_limits<long long>::max()),
          p1_(p1),
          p2_(p2) {}

   protected:
    double combine(const AugmentedState& s, const std::string& key) override {
      const auto& w1 =
          policy_at(p1_, key, model_.actions1(s.x).size(), "player-1");
      const auto& w2 =
          policy_at(p2_, key, model_.actions2(s.x).size(), "player-2");
      double total = 0.0;
      for (std::size_t a = 0; a < w1.size(); ++a) {
        if (w1[a] <= 0.0) continue;
        for (std::size_t b = 0; b < w2.size(); ++b) {
          if (w2[b] <= 0.0) continue;
          total += w1[a] * w2[b] *
                   stage_payoff(model_, s, static_cast<int>(a),
                                static_cast<int>(b),
                                [this](const AugmentedState& c) {
                                  return value(c);
                                });
        }
      }
      return total;
    }

   private:
    const PolicyTable& p1_;
    const PolicyTable& p2_;
  };

  Engine engine(model, p1, p2);
  return engine.value(root);
}

double one_sided_backup_solve(const GameModel& model, const PolicyTable& fixed,
                              FixedSide side, const AugmentedState& root) {
  class Engine : public Recursion {
   public:
    Engine(const GameModel& m, const PolicyTable& fixed, FixedSide side)
        : Recursion(m, std::numeric_limits<long long>::max()),
          fixed_(fixed),
          side_(side) {}

   protected:
    double combine(const AugmentedState& s, const std::string& key) override {
      const bool fix2 = side_ == FixedSide::fix2;
      const std::size_t n_free =
          fix2 ? model_.actions1(s.x).size() : model_.actions2(s.x).size();
      const auto& w = policy_at(
          fixed_, key, fix2 ? model_.actions2(s.x).size()
                            : model_.actions1(s.x).size(),
          fix2 ? "player-2" : "player-1");

      double best = fix2 ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
      for (std::size_t free = 0; free < n_free; ++free) {
        double contracted = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
          if (w[k] <= 0.0) continue;
          const int a = fix2 ? static_cast<int>(free) : static_cast<int>(k);
          const int b = fix2 ? static_cast<int>(k) : static_cast<int>(free);
          contracted += w[k] * stage_payoff(model_, s, a, b,
                                            [this](const AugmentedState& c) {
                                              return value(c);
                                            });
        }
        if (fix2 ? contracted < best : contracted > best) best = contracted;
      }
      return best;
    }

   private:
    const PolicyTable& fixed_;
    FixedSide side_;
  };

  Engine engine(model, fixed, side);
  return engine.value(root);
}

}  // namespace posmg
