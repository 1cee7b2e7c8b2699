#pragma once

#include <vector>

namespace posmg {

// Payoff matrix of a finite zero-sum stage game. The row player minimizes,
// the column player maximizes.
struct StageMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> entries;  // row-major

  StageMatrix() = default;
  StageMatrix(int m, int n) : rows(m), cols(n), entries(m * n, 0.0) {}

  double& at(int i, int j) { return entries[i * cols + j]; }
  double at(int i, int j) const { return entries[i * cols + j]; }
};

struct SaddleSolution {
  double value = 0.0;
  std::vector<double> row_mix;
  std::vector<double> col_mix;
  double gap = 0.0;  // certified duality gap, >= 0
};

enum class Side { row, col };

// Value of the best pure response against a fixed mixed strategy:
// Side::row takes a row mix and returns max over columns of mix^T M;
// Side::col takes a column mix and returns min over rows of M mix.
double best_response_value(const StageMatrix& game,
                           const std::vector<double>& mix, Side side);

// Exact minimax solve of the matrix game by primal simplex on the standard
// positivity-shifted LP, with Bland's smallest-index rule so the pivot
// sequence (and therefore the returned strategies) is deterministic. The
// reported value is the midpoint of the two best-response bounds, so it
// always lies inside the certified interval and `gap` bounds its error.
SaddleSolution solve_zero_sum(const StageMatrix& game);

}  // namespace posmg
