#pragma once

#include <vector>

#include "lvlingam/sem.hpp"

namespace lvlingam {

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(n^3)). Returns col[r] = column assigned to row r.
std::vector<int> solve_assignment(const Matrix& cost);

/// Repeatedly takes the cheapest remaining (row, column) pair.
std::vector<int> greedy_assignment(const Matrix& cost);

}  // namespace lvlingam
