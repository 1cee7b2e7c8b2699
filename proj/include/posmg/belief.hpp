#pragma once

#include <string>
#include <vector>

#include "posmg/model.hpp"
#include "posmg/rational.hpp"

namespace posmg {

// One support point of a belief: the hidden state is `y` and `goal` is the
// remaining reward target, carried exactly.
struct BeliefAtom {
  int y = 0;
  Rational goal;
  double weight = 0.0;

  bool operator==(const BeliefAtom&) const = default;
};

// Finite-support joint distribution over (hidden state, remaining goal).
// Canonical form: atoms sorted by (y, goal), pairs unique, weights positive
// and normalized. Immutable once constructed.
class Belief {
 public:
  Belief() = default;

  // Merges duplicate (y, goal) pairs, prunes weights below the float noise
  // floor, renormalizes, and sorts. Throws Errc::distribution when the
  // total mass is not positive or a weight is negative.
  static Belief from_atoms(std::vector<BeliefAtom> atoms);

  const std::vector<BeliefAtom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }

  std::vector<double> y_marginal(int num_hidden) const;

  // Mass of {goal >= 0}, the Lambda-marginal of [0, inf). The all-nonnegative
  // and all-negative cases snap to exactly 1 and 0: total mass is 1 by
  // invariant, so the snap only removes summation round-off.
  double goal_tail_mass() const;

  // Deterministic memoization key: exact goals, weights rounded to 12
  // decimal digits. Atom order is canonical, so equal beliefs (after
  // rounding) produce equal keys.
  std::string canonical_key() const;

  bool operator==(const Belief&) const = default;

 private:
  std::vector<BeliefAtom> atoms_;
};

// Q0 spread over the hidden states, goal pinned at the common target:
// atoms {(y, initial_goal, Q0(y)) : Q0(y) > 0}.
Belief initial_belief(const GameModel& model);

// Bayes update of the belief after observing a jump: the players were at
// observed state x with `t` ticks remaining, played (a, b), and after a
// sojourn of `theta` ticks the observed state became x_next. Each source
// atom's goal shifts by rate * min(theta, t); its weight spreads over the
// next hidden states in proportion to the joint kernel mass. Throws
// Errc::impossible_observation when the observation has zero likelihood
// under the belief (zero denominator).
Belief filter_update(const GameModel& model, int t, int x, const Belief& mu,
                     int a, int b, int theta, int x_next);

}  // namespace posmg
