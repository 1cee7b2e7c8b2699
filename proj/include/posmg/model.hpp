#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "posmg/errors.hpp"
#include "posmg/rational.hpp"

namespace posmg {

// One positive-mass point of a semi-Markov kernel row: after `theta` ticks
// the pair jumps to (x_next, y_next) with probability p.
struct KernelEntry {
  int theta = 0;
  int x_next = 0;
  int y_next = 0;
  double p = 0.0;
};

struct Issue {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string code;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Issue> issues;
};

// Raw model description, as parsed from a file or built by hand. Feed it to
// the GameModel constructor, which canonicalizes kernel rows and normalizes
// benign float drift.
struct ModelData {
  std::vector<std::string> observed_states;
  std::vector<std::string> hidden_states;
  std::vector<std::vector<std::string>> actions1;  // per observed state
  std::vector<std::vector<std::string>> actions2;
  // kernel[row_index(x,y,a,b)]; see GameModel::row_index for the layout.
  std::vector<std::vector<KernelEntry>> kernel;
  std::vector<Rational> reward_rate;  // same indexing as kernel
  int horizon_ticks = 0;
  Rational initial_goal;
  std::vector<double> initial_hidden;
};

// A finite tick-discretized partially observable semi-Markov game. The
// observed component is seen by both players, the hidden component by
// neither; sojourn times live on the integer grid {1, ..., max_sojourn}.
// Immutable after construction; all accessors are pure.
class GameModel {
 public:
  explicit GameModel(ModelData data);

  int num_observed() const { return static_cast<int>(observed_.size()); }
  int num_hidden() const { return static_cast<int>(hidden_.size()); }
  const std::string& observed_label(int x) const { return observed_[x]; }
  const std::string& hidden_label(int y) const { return hidden_[y]; }
  const std::vector<std::string>& actions1(int x) const { return actions1_[x]; }
  const std::vector<std::string>& actions2(int x) const { return actions2_[x]; }

  // Label lookups; unknown labels throw Errc::label.
  int observed_index(std::string_view label) const;
  int hidden_index(std::string_view label) const;
  int action1_index(int x, std::string_view label) const;
  int action2_index(int x, std::string_view label) const;

  int horizon_ticks() const { return horizon_; }
  const Rational& initial_goal() const { return goal_; }
  const std::vector<double>& initial_hidden() const { return initial_hidden_; }
  int max_sojourn() const { return max_sojourn_; }

  const std::vector<KernelEntry>& kernel_row(int x, int y, int a, int b) const {
    return kernel_[row_index(x, y, a, b)];
  }
  const Rational& reward_rate(int x, int y, int a, int b) const {
    return rates_[row_index(x, y, a, b)];
  }

  // Mass of the joint kernel q at (theta, x_next, y_next); 0 if absent.
  double joint_mass(int x, int y, int a, int b, int theta, int x_next,
                    int y_next) const;

  // Marginal kernel q^X: sum of joint_mass over the next hidden state.
  double marginal_mass(int x, int y, int a, int b, int theta, int x_next) const;

  // Q^X mixed over a hidden distribution muY (must be a probability vector
  // over the hidden states, normalized within 1e-9).
  double mixed_marginal(int x, std::span<const double> mu_y, int a, int b,
                        int theta, int x_next) const;

  // 1 - Q^X(t, E_X | x,y,a,b): probability that the sojourn strictly
  // exceeds t. Equals 1 at t = 0 and 0 at t >= max_sojourn.
  double survival(int x, int y, int a, int b, int t) const;

  std::size_t row_index(int x, int y, int a, int b) const {
    const std::size_t na = actions1_[x].size();
    const std::size_t nb = actions2_[x].size();
    return row_offset_[x] +
           ((static_cast<std::size_t>(y) * na + a) * nb + b);
  }

 private:
  std::vector<std::string> observed_;
  std::vector<std::string> hidden_;
  std::vector<std::vector<std::string>> actions1_;
  std::vector<std::vector<std::string>> actions2_;
  std::vector<std::size_t> row_offset_;
  std::vector<std::vector<KernelEntry>> kernel_;
  std::vector<Rational> rates_;
  int horizon_ = 0;
  Rational goal_;
  std::vector<double> initial_hidden_;
  int max_sojourn_ = 0;
};

// Checks every model invariant and reports problems instead of throwing:
// kernel row masses summing to 1, no mass at theta <= 0 (the grid form of
// the no-instantaneous-jump condition that bounds the number of decision
// epochs within the horizon), nonnegative rates, and a normalized initial
// hidden distribution. A max sojourn beyond the horizon is legal but
// flagged as a warning because those transitions are censored.
ValidationReport validate(const GameModel& model);

}  // namespace posmg
