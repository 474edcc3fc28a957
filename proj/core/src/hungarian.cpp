#include "dispatchlab/hungarian.hpp"

#include <limits>

namespace dispatchlab {

namespace {

// Potential-based Hungarian method, 1-indexed internally. Requires n <= m;
// assigns every row.
std::vector<int> hungarian_rows(std::size_t n, std::size_t m,
                                const std::vector<double>& cost) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> col_to_row(m + 1, 0), way(m + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    col_to_row[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = col_to_row[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[col_to_row[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_to_row[j0] != 0);
    // augment along the alternating path
    do {
      const std::size_t j1 = way[j0];
      col_to_row[j0] = col_to_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (col_to_row[j] != 0) {
      row_to_col[col_to_row[j] - 1] = static_cast<int>(j) - 1;
    }
  }
  return row_to_col;
}

}  // namespace

std::vector<int> min_cost_assignment(std::size_t n_rows, std::size_t n_cols,
                                     const std::vector<double>& cost) {
  if (n_rows == 0 || n_cols == 0) {
    return std::vector<int>(n_rows, -1);
  }
  if (n_rows <= n_cols) {
    return hungarian_rows(n_rows, n_cols, cost);
  }
  // Transpose so the smaller side is the row set.
  std::vector<double> t(n_rows * n_cols);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      t[c * n_rows + r] = cost[r * n_cols + c];
    }
  }
  const auto col_to_row = hungarian_rows(n_cols, n_rows, t);
  std::vector<int> row_to_col(n_rows, -1);
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (col_to_row[c] >= 0) {
      row_to_col[static_cast<std::size_t>(col_to_row[c])] = static_cast<int>(c);
    }
  }
  return row_to_col;
}

}  // namespace dispatchlab
