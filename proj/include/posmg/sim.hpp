#pragma once

#include <cstdint>
#include <vector>

#include "posmg/belief.hpp"
#include "posmg/model.hpp"
#include "posmg/solver.hpp"

namespace posmg {

// Counter-based uniform draw in [0, 1): a pure hash of (seed, stream,
// counter). Streams are rollout indices and counters are per-draw, so
// rollouts can run in any order, or in parallel, with identical results.
double uniform_draw(std::uint64_t seed, std::uint64_t stream,
                    std::uint64_t counter);

struct JumpRecord {
  int epoch = 0;        // decision epoch index n
  long long start = 0;  // S_n, ticks since the start
  int x = 0;
  int y = 0;
  int a = 0;
  int b = 0;
  int sojourn = 0;  // theta_{n+1}, uncensored
};

struct RolloutRecord {
  std::vector<JumpRecord> jumps;
  Rational accumulated_reward;
  bool success = false;  // accumulated <= initial goal, exact comparison
};

struct RiskEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long long n = 0;
  std::uint64_t seed = 0;
};

// One trajectory under the fixed policy pair from observed state root_x:
// draws the hidden start from Q0, then alternates policy draws and kernel
// draws, accruing reward censored at the horizon. Policies are looked up
// by the canonical key of the filtered belief state the players actually
// see.
RolloutRecord rollout(const GameModel& model, const PolicyTable& p1,
                      const PolicyTable& p2, int root_x, std::uint64_t seed,
                      long long index);

// Monte Carlo estimate of the risk probability over n independent
// rollouts. The mean is a ratio of integer counts, so the result is
// bit-identical for a given (model, policies, n, seed) regardless of
// thread count. max_threads = 1 runs serially.
RiskEstimate estimate_risk(const GameModel& model, const PolicyTable& p1,
                           const PolicyTable& p2, int root_x, long long n,
                           std::uint64_t seed, int max_threads = 1);

// Brute-force risk probability: sums the indicator over every joint
// trajectory (hidden states included), weighted by its exact probability.
// Deliberately shares no code with the solver's backup recursion; this is
// the oracle the solver is checked against. Throws Errc::resource past
// node_cap tree nodes.
double enumerate_exact(const GameModel& model, const PolicyTable& p1,
                       const PolicyTable& p2, const AugmentedState& root,
                       long long node_cap = 50'000'000);

struct HistoryStep {
  int a = 0;
  int b = 0;
  int theta = 0;
  int x_next = 0;
};

struct ObservedHistory {
  int x0 = 0;
  std::vector<HistoryStep> steps;
};

// Beliefs along an observable history: mu_0 = initial belief, then one
// filter update per recorded step. Throws Errc::impossible_observation on
// zero-probability histories. The remaining horizon decreases by each
// sojourn, floored at zero.
std::vector<Belief> filter_trace(const GameModel& model,
                                 const ObservedHistory& history);

// Companion oracle: the conditional law of (hidden state, remaining goal)
// given the observable history, computed by enumerating every hidden
// trajectory consistent with it. Action-selection probabilities cancel in
// the normalization, so no policies are needed.
Belief exhaustive_conditional_law(const GameModel& model,
                                  const ObservedHistory& history);

}  // namespace posmg
