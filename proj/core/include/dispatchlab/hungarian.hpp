#pragma once

#include <vector>

namespace dispatchlab {

// Minimum-cost assignment on a dense n_rows x n_cols matrix (row-major).
// Every unit on the smaller side is assigned. Returns row -> col, -1 for
// unassigned rows when n_rows > n_cols. O(min^2 * max), deterministic.
std::vector<int> min_cost_assignment(std::size_t n_rows, std::size_t n_cols,
                                     const std::vector<double>& cost);

}  // namespace dispatchlab
