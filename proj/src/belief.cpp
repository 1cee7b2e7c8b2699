#include "posmg/belief.hpp"

#include <algorithm>
#include <cmath>

namespace posmg {

namespace {
constexpr double kWeightFloor = 1e-15;
constexpr double kDenominatorFloor = 1e-15;
}  // namespace

Belief Belief::from_atoms(std::vector<BeliefAtom> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const BeliefAtom& l, const BeliefAtom& r) {
              if (l.y != r.y) return l.y < r.y;
              return l.goal < r.goal;
            });
  std::vector<BeliefAtom> merged;
  for (auto& atom : atoms) {
    if (atom.weight < 0.0)
      throw PosmgError(Errc::distribution, "belief atom has negative weight");
    if (!merged.empty() && merged.back().y == atom.y &&
        merged.back().goal == atom.goal) {
      merged.back().weight += atom.weight;
    } else {
      merged.push_back(std::move(atom));
    }
  }
  double total = 0.0;
  for (const auto& atom : merged) total += atom.weight;
  if (total <= 0.0)
    throw PosmgError(Errc::distribution, "belief has no positive mass");
  std::erase_if(merged, [&](const BeliefAtom& atom) {
    return atom.weight < kWeightFloor * total;
  });
  double kept = 0.0;
  for (const auto& atom : merged) kept += atom.weight;
  for (auto& atom : merged) atom.weight /= kept;

  Belief belief;
  belief.atoms_ = std::move(merged);
  return belief;
}

std::vector<double> Belief::y_marginal(int num_hidden) const {
  std::vector<double> marginal(num_hidden, 0.0);
  for (const auto& atom : atoms_) marginal[atom.y] += atom.weight;
  return marginal;
}

double Belief::goal_tail_mass() const {
  double nonneg = 0.0;
  double neg = 0.0;
  for (const auto& atom : atoms_) {
    if (atom.goal >= Rational(0))
      nonneg += atom.weight;
    else
      neg += atom.weight;
  }
  if (neg == 0.0) return 1.0;
  if (nonneg == 0.0) return 0.0;
  return nonneg;
}

std::string Belief::canonical_key() const {
  std::string key;
  key.reserve(atoms_.size() * 24);
  for (const auto& atom : atoms_) {
    if (!key.empty()) key += ',';
    key += std::to_string(atom.y);
    key += ':';
    key += atom.goal.str();
    key += ':';
    key += std::to_string(std::llround(atom.weight * 1e12));
  }
  return key;
}

Belief initial_belief(const GameModel& model) {
  std::vector<BeliefAtom> atoms;
  for (int y = 0; y < model.num_hidden(); ++y) {
    const double w = model.initial_hidden()[y];
    if (w > 0.0) atoms.push_back({y, model.initial_goal(), w});
  }
  return Belief::from_atoms(std::move(atoms));
}

Belief filter_update(const GameModel& model, int t, int x, const Belief& mu,
                     int a, int b, int theta, int x_next) {
  const int censored = std::min(theta, t);
  double denominator = 0.0;
  std::vector<BeliefAtom> posterior;
  for (const auto& atom : mu.atoms()) {
    const double likelihood =
        model.marginal_mass(x, atom.y, a, b, theta, x_next);
    if (likelihood <= 0.0) continue;
    denominator += atom.weight * likelihood;
    const Rational next_goal =
        atom.goal - model.reward_rate(x, atom.y, a, b) * Rational(censored);
    for (const auto& e : model.kernel_row(x, atom.y, a, b)) {
      if (e.theta != theta || e.x_next != x_next) continue;
      posterior.push_back({e.y_next, next_goal, atom.weight * e.p});
    }
  }
  if (denominator <= kDenominatorFloor)
    throw PosmgError(Errc::impossible_observation,
                     "impossible-observation: zero likelihood for sojourn " +
                         std::to_string(theta) + " into " +
                         model.observed_label(x_next));
  return Belief::from_atoms(std::move(posterior));
}

}  // namespace posmg
