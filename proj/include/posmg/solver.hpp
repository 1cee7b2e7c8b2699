#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "posmg/belief.hpp"
#include "posmg/matgame.hpp"
#include "posmg/model.hpp"

namespace posmg {

// A point of the reformulated completely observable game: remaining ticks,
// observed state, and the joint belief over (hidden state, remaining goal).
struct AugmentedState {
  int t = 0;
  int x = 0;
  Belief mu;
};

// Printable canonical key, e.g. "t=2|x=x0|0:1/1:500000000000,...".
// Policy and value tables on disk are keyed by exactly this rendering.
std::string state_key(const GameModel& model, const AugmentedState& s);

// Root of the game at observed state x: full horizon, initial belief.
AugmentedState root_state(const GameModel& model, int x);

using ValueFn = std::function<double(const AugmentedState&)>;

// The bracketed operand of the stage operator for a fixed action pair:
//   term1: mass of belief atoms whose goal still covers rate * t, weighted
//          by the probability that no jump occurs within t ticks;
//   term2: sum over one-jump successors (sojourn theta in 1..t, next
//          observed state x') of value(successor) times the mixed marginal
//          jump probability. Zero-probability observations are skipped, so
//          the filter never sees an impossible observation.
double stage_payoff(const GameModel& model, const AugmentedState& s, int a,
                    int b, const ValueFn& value);

struct BackupResult {
  double value = 0.0;
  std::vector<double> mix1;  // over A(x), player 1 (minimizer)
  std::vector<double> mix2;  // over B(x), player 2 (maximizer)
};

// One Shapley backup: builds the |A(x)| x |B(x)| matrix of stage payoffs
// and solves the zero-sum matrix game exactly.
BackupResult shapley_backup(const GameModel& model, const AugmentedState& s,
                            const ValueFn& value);

// Mixed-action table keyed by canonical state key. Distributions are
// indexed by the acting player's action order at the state's observed
// component.
struct PolicyTable {
  std::unordered_map<std::string, std::vector<double>> mix;
};

struct SolveOptions {
  std::vector<int> roots;  // observed-state indices; empty = all
  long long reachable_cap = 5'000'000;
};

struct SolveResult {
  std::unordered_map<std::string, double> value_table;
  PolicyTable policy1;
  PolicyTable policy2;
  std::vector<std::string> root_keys;  // one per requested root, in order
  double root_value = 0.0;             // value at the first root
  long long reachable_count = 0;
  long long backup_count = 0;
};

// Exact game solve by depth-first memoized recursion over the reachable
// augmented-state set. Terminal rule: value = goal tail mass at t = 0.
// Every jump consumes at least one tick, so the recursion depth is bounded
// by the horizon. Throws Errc::resource when the reachable set exceeds the
// configured cap.
SolveResult solve(const GameModel& model, const SolveOptions& options = {});

struct ValueIterationTrace {
  std::vector<std::string> keys;            // reachable set, discovery order
  std::vector<AugmentedState> states;       // aligned with keys
  std::vector<std::vector<double>> tables;  // tables[k+1] = u^k, tables[0] = u^-1
};

// The monotone iteration from the terminal functional: u^-1 = goal tail
// mass, u^{k+1} = backup of u^k, swept over the whole reachable set. Kept
// separate from solve() so the two computation paths can cross-check.
ValueIterationTrace value_iteration_trace(const GameModel& model, int kmax,
                                          const SolveOptions& options = {});

// Exact risk probability of a fixed policy pair: the solve recursion with
// the stage matrix contracted by the two mixes instead of minimaxed.
// Throws Errc::policy_coverage if a table misses a state reachable under
// the pair's supports.
double evaluate_policies(const GameModel& model, const PolicyTable& p1,
                         const PolicyTable& p2, const AugmentedState& root);

enum class FixedSide {
  fix1,  // player 1 fixed, player 2 best-responds (upper bound)
  fix2,  // player 2 fixed, player 1 best-responds (lower bound)
};

// One-sided comparison recursion: holds one player to `fixed` and
// optimizes the other pointwise. The optimum over mixes of a linear
// functional is attained at a pure action; ties resolve to the lowest
// action index.
double one_sided_backup_solve(const GameModel& model, const PolicyTable& fixed,
                              FixedSide side, const AugmentedState& root);

}  // namespace posmg
