#include "posmg/matgame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace posmg {

namespace {
constexpr double kReducedCostEps = 1e-12;
constexpr double kPivotEps = 1e-12;
constexpr int kMaxPivots = 100000;
}  // namespace

double best_response_value(const StageMatrix& game,
                           const std::vector<double>& mix, Side side) {
  if (side == Side::row) {
    if (static_cast<int>(mix.size()) != game.rows)
      throw std::invalid_argument("row mix has wrong dimension");
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < game.cols; ++j) {
      double payoff = 0.0;
      for (int i = 0; i < game.rows; ++i) payoff += mix[i] * game.at(i, j);
      best = std::max(best, payoff);
    }
    return best;
  }
  if (static_cast<int>(mix.size()) != game.cols)
    throw std::invalid_argument("column mix has wrong dimension");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < game.rows; ++i) {
    double payoff = 0.0;
    for (int j = 0; j < game.cols; ++j) payoff += game.at(i, j) * mix[j];
    best = std::min(best, payoff);
  }
  return best;
}

SaddleSolution solve_zero_sum(const StageMatrix& game) {
  const int m = game.rows;
  const int n = game.cols;
  if (m < 1 || n < 1 || static_cast<int>(game.entries.size()) != m * n)
    throw std::invalid_argument("stage matrix is empty or inconsistent");
  for (double e : game.entries)
    if (!std::isfinite(e))
      throw std::invalid_argument("stage matrix has a non-finite entry");

  // Shift to strict positivity. The shift depends only on the minimum
  // entry, so adding a constant to the whole matrix reproduces the same
  // shifted tableau and the same pivot sequence.
  const double lo = *std::min_element(game.entries.begin(), game.entries.end());
  const double shift = 1.0 - lo;

  // LP: maximize sum(p) subject to M'^T p <= 1, p >= 0, where M' = M + shift.
  // Then row_mix = p / sum(p) and the shifted game value is 1 / sum(p); the
  // dual solution under the slack columns yields the column mix.
  const int width = m + n + 1;  // p columns, slack columns, rhs
  std::vector<double> tab(static_cast<std::size_t>(n) * width, 0.0);
  std::vector<double> obj(width, 0.0);
  std::vector<int> basis(n);
  auto row = [&](int i) { return tab.begin() + static_cast<std::size_t>(i) * width; };

  for (int i = 0; i < n; ++i) {
    auto r = row(i);
    for (int j = 0; j < m; ++j) r[j] = game.at(j, i) + shift;
    r[m + i] = 1.0;
    r[m + n] = 1.0;
    basis[i] = m + i;
  }
  for (int j = 0; j < m; ++j) obj[j] = -1.0;

  for (int iter = 0;; ++iter) {
    if (iter > kMaxPivots)
      throw std::logic_error("simplex failed to terminate");
    int enter = -1;
    for (int j = 0; j < m + n; ++j) {
      if (obj[j] < -kReducedCostEps) {
        enter = j;  // Bland: smallest index
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < n; ++i) {
      const double coef = row(i)[enter];
      if (coef <= kPivotEps) continue;
      const double ratio = row(i)[m + n] / coef;
      if (leave < 0 || ratio < best_ratio - kPivotEps ||
          (ratio < best_ratio + kPivotEps && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0)
      throw std::logic_error("simplex reports an unbounded game LP");

    auto pivot_row = row(leave);
    const double pivot = pivot_row[enter];
    for (int j = 0; j < width; ++j) pivot_row[j] /= pivot;
    for (int i = 0; i < n; ++i) {
      if (i == leave) continue;
      auto r = row(i);
      const double factor = r[enter];
      if (factor == 0.0) continue;
      for (int j = 0; j < width; ++j) r[j] -= factor * pivot_row[j];
    }
    const double ofactor = obj[enter];
    if (ofactor != 0.0)
      for (int j = 0; j < width; ++j) obj[j] -= ofactor * pivot_row[j];
    basis[leave] = enter;
  }

  std::vector<double> p(m, 0.0);
  for (int i = 0; i < n; ++i)
    if (basis[i] < m) p[basis[i]] = row(i)[m + n];
  std::vector<double> q(n, 0.0);
  for (int j = 0; j < n; ++j) q[j] = std::max(0.0, obj[m + j]);

  double sum_p = 0.0;
  for (double v : p) sum_p += v;
  double sum_q = 0.0;
  for (double v : q) sum_q += v;
  if (sum_p <= 0.0 || sum_q <= 0.0)
    throw std::logic_error("simplex produced an empty strategy");

  SaddleSolution solution;
  solution.row_mix.resize(m);
  for (int i = 0; i < m; ++i) solution.row_mix[i] = p[i] / sum_p;
  solution.col_mix.resize(n);
  for (int j = 0; j < n; ++j) solution.col_mix[j] = q[j] / sum_q;

  const double upper = best_response_value(game, solution.row_mix, Side::row);
  const double lower = best_response_value(game, solution.col_mix, Side::col);
  solution.value = 0.5 * (upper + lower);
  solution.gap = std::max(0.0, upper - lower);
  return solution;
}

}  // namespace posmg
