#include "lvlingam/assignment.hpp"

#include <limits>

#include "lvlingam/errors.hpp"

namespace lvlingam {

std::vector<int> solve_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw Error(ErrorKind::ShapeMismatch, "assignment cost must be square");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int r = 1; r <= n; ++r) {
    match[0] = r;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col(n, -1);
  for (int j = 1; j <= n; ++j) col[match[j] - 1] = j - 1;
  return col;
}

std::vector<int> greedy_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw Error(ErrorKind::ShapeMismatch, "assignment cost must be square");
  std::vector<int> col(n, -1);
  std::vector<bool> row_used(n, false), col_used(n, false);
  for (int step = 0; step < n; ++step) {
    int br = -1, bc = -1;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        if (!row_used[r] && !col_used[c] && (br < 0 || cost(r, c) < cost(br, bc))) {
          br = r;
          bc = c;
        }
    col[br] = bc;
    row_used[br] = col_used[bc] = true;
  }
  return col;
}

}  // namespace lvlingam
