#include "posmg/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace posmg {

namespace {

constexpr double kMassTolerance = 1e-12;   // post-normalization check
constexpr double kNormalizeBand = 1e-9;    // drift we silently renormalize
constexpr double kSurvivalSnap = 1e-12;    // row-sum round-off floor

int find_label(const std::vector<std::string>& labels, std::string_view label) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  return -1;
}

}  // namespace

GameModel::GameModel(ModelData data)
    : observed_(std::move(data.observed_states)),
      hidden_(std::move(data.hidden_states)),
      actions1_(std::move(data.actions1)),
      actions2_(std::move(data.actions2)),
      kernel_(std::move(data.kernel)),
      rates_(std::move(data.reward_rate)),
      horizon_(data.horizon_ticks),
      goal_(data.initial_goal),
      initial_hidden_(std::move(data.initial_hidden)) {
  row_offset_.resize(observed_.size(), 0);
  std::size_t offset = 0;
  for (std::size_t x = 0; x < observed_.size(); ++x) {
    row_offset_[x] = offset;
    offset += hidden_.size() * actions1_[x].size() * actions2_[x].size();
  }
  kernel_.resize(offset);
  rates_.resize(offset, Rational(0));
  initial_hidden_.resize(hidden_.size(), 0.0);

  // Canonicalize rows: sorted by (theta, x_next, y_next), duplicates merged,
  // nonpositive masses dropped, row sum renormalized when the drift is below
  // kNormalizeBand. Rows that are further off stay as-is for validate().
  for (auto& row : kernel_) {
    std::sort(row.begin(), row.end(), [](const KernelEntry& l, const KernelEntry& r) {
      if (l.theta != r.theta) return l.theta < r.theta;
      if (l.x_next != r.x_next) return l.x_next < r.x_next;
      return l.y_next < r.y_next;
    });
    std::vector<KernelEntry> merged;
    for (const auto& e : row) {
      if (!merged.empty() && merged.back().theta == e.theta &&
          merged.back().x_next == e.x_next && merged.back().y_next == e.y_next) {
        merged.back().p += e.p;
      } else {
        merged.push_back(e);
      }
    }
    std::erase_if(merged, [](const KernelEntry& e) { return e.p <= 0.0; });
    double sum = 0.0;
    for (const auto& e : merged) sum += e.p;
    if (sum > 0.0 && std::abs(sum - 1.0) <= kNormalizeBand && sum != 1.0) {
      for (auto& e : merged) e.p /= sum;
    }
    row = std::move(merged);
    for (const auto& e : row) max_sojourn_ = std::max(max_sojourn_, e.theta);
  }

  double hidden_sum = 0.0;
  for (double w : initial_hidden_) hidden_sum += w;
  if (hidden_sum > 0.0 && std::abs(hidden_sum - 1.0) <= kNormalizeBand &&
      hidden_sum != 1.0) {
    for (auto& w : initial_hidden_) w /= hidden_sum;
  }
}

int GameModel::observed_index(std::string_view label) const {
  const int i = find_label(observed_, label);
  if (i < 0)
    throw PosmgError(Errc::label,
                     "unknown observed state '" + std::string(label) + "'");
  return i;
}

int GameModel::hidden_index(std::string_view label) const {
  const int i = find_label(hidden_, label);
  if (i < 0)
    throw PosmgError(Errc::label,
                     "unknown hidden state '" + std::string(label) + "'");
  return i;
}

int GameModel::action1_index(int x, std::string_view label) const {
  const int i = find_label(actions1_[x], label);
  if (i < 0)
    throw PosmgError(Errc::label, "unknown player-1 action '" +
                                      std::string(label) + "' at state " +
                                      observed_[x]);
  return i;
}

int GameModel::action2_index(int x, std::string_view label) const {
  const int i = find_label(actions2_[x], label);
  if (i < 0)
    throw PosmgError(Errc::label, "unknown player-2 action '" +
                                      std::string(label) + "' at state " +
                                      observed_[x]);
  return i;
}

double GameModel::joint_mass(int x, int y, int a, int b, int theta, int x_next,
                             int y_next) const {
  for (const auto& e : kernel_row(x, y, a, b)) {
    if (e.theta == theta && e.x_next == x_next && e.y_next == y_next)
      return e.p;
    if (e.theta > theta) break;  // rows are sorted by theta
  }
  return 0.0;
}

double GameModel::marginal_mass(int x, int y, int a, int b, int theta,
                                int x_next) const {
  double sum = 0.0;
  for (const auto& e : kernel_row(x, y, a, b)) {
    if (e.theta == theta && e.x_next == x_next) sum += e.p;
    if (e.theta > theta) break;
  }
  return sum;
}

double GameModel::mixed_marginal(int x, std::span<const double> mu_y, int a,
                                 int b, int theta, int x_next) const {
  if (static_cast<int>(mu_y.size()) != num_hidden())
    throw PosmgError(Errc::distribution,
                     "hidden distribution has wrong dimension");
  double total = 0.0;
  for (double w : mu_y) {
    if (w < 0.0)
      throw PosmgError(Errc::distribution,
                       "hidden distribution has a negative component");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw PosmgError(Errc::distribution,
                     "hidden distribution is not normalized");
  double sum = 0.0;
  for (int y = 0; y < num_hidden(); ++y) {
    if (mu_y[y] <= 0.0) continue;
    sum += mu_y[y] * marginal_mass(x, y, a, b, theta, x_next);
  }
  return sum;
}

double GameModel::survival(int x, int y, int a, int b, int t) const {
  double cumulative = 0.0;
  for (const auto& e : kernel_row(x, y, a, b)) {
    if (e.theta > t) break;
    cumulative += e.p;
  }
  double s = 1.0 - cumulative;
  if (s < kSurvivalSnap) s = 0.0;  // full-row sums carry float round-off
  return s;
}

ValidationReport validate(const GameModel& model) {
  ValidationReport report;
  auto error = [&](const std::string& code, const std::string& message) {
    report.issues.push_back({Issue::Severity::error, code, message});
    report.ok = false;
  };
  auto warning = [&](const std::string& code, const std::string& message) {
    report.issues.push_back({Issue::Severity::warning, code, message});
  };

  if (model.num_observed() < 1) error("empty-states", "no observed states");
  if (model.num_hidden() < 1) error("empty-states", "no hidden states");
  if (model.horizon_ticks() < 1)
    error("bad-horizon", "horizon_ticks must be a positive integer");

  // Labels end up inside canonical state keys, so the key separators are
  // reserved; duplicates would alias distinct states.
  auto check_labels = [&](const std::vector<std::string>& labels,
                          const std::string& what) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const std::string& label = labels[i];
      if (label.empty() ||
          label.find_first_of("|,:=") != std::string::npos)
        error("label-charset", what + " label '" + label +
                                   "' is empty or uses a reserved character");
      for (std::size_t k = i + 1; k < labels.size(); ++k)
        if (labels[k] == label)
          error("duplicate-label", what + " label '" + label + "' repeats");
    }
  };
  {
    std::vector<std::string> observed, hidden;
    for (int x = 0; x < model.num_observed(); ++x)
      observed.push_back(model.observed_label(x));
    for (int y = 0; y < model.num_hidden(); ++y)
      hidden.push_back(model.hidden_label(y));
    check_labels(observed, "observed state");
    check_labels(hidden, "hidden state");
    for (int x = 0; x < model.num_observed(); ++x) {
      check_labels(model.actions1(x), "player-1 action");
      check_labels(model.actions2(x), "player-2 action");
    }
  }

  for (int x = 0; x < model.num_observed(); ++x) {
    if (model.actions1(x).empty())
      error("empty-actions",
            "player 1 has no actions at " + model.observed_label(x));
    if (model.actions2(x).empty())
      error("empty-actions",
            "player 2 has no actions at " + model.observed_label(x));
  }

  for (int x = 0; x < model.num_observed(); ++x) {
    for (int y = 0; y < model.num_hidden(); ++y) {
      for (int a = 0; a < static_cast<int>(model.actions1(x).size()); ++a) {
        for (int b = 0; b < static_cast<int>(model.actions2(x).size()); ++b) {
          const std::string where = "(" + model.observed_label(x) + "," +
                                    model.hidden_label(y) + "," +
                                    model.actions1(x)[a] + "," +
                                    model.actions2(x)[b] + ")";
          double sum = 0.0;
          for (const auto& e : model.kernel_row(x, y, a, b)) {
            sum += e.p;
            if (e.theta <= 0)
              error("zero-sojourn",
                    "kernel mass at theta <= 0 for " + where);
            if (e.p < 0.0 || e.p > 1.0 + 1e-12)
              error("mass-range",
                    "kernel mass outside [0,1] for " + where);
          }
          if (std::abs(sum - 1.0) > 1e-12)
            error("kernel-mass", "kernel row for " + where + " sums to " +
                                     std::to_string(sum));
          if (model.reward_rate(x, y, a, b) < Rational(0))
            error("negative-rate", "reward rate is negative for " + where);
        }
      }
    }
  }

  double hidden_sum = 0.0;
  for (int y = 0; y < model.num_hidden(); ++y) {
    const double w = model.initial_hidden()[y];
    if (w < 0.0)
      error("initial-hidden", "initial hidden weight for " +
                                  model.hidden_label(y) + " is negative");
    hidden_sum += w;
  }
  if (std::abs(hidden_sum - 1.0) > 1e-12)
    error("initial-hidden",
          "initial hidden distribution sums to " + std::to_string(hidden_sum));

  if (report.ok && model.max_sojourn() > model.horizon_ticks())
    warning("censored-horizon",
            "max sojourn " + std::to_string(model.max_sojourn()) +
                " exceeds the horizon; those transitions are censored");

  return report;
}

}  // namespace posmg
