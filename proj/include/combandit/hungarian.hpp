#pragma once

// Maximum-weight perfect assignment on a square matrix via the classic
// potentials + shortest augmenting path method, O(n^3).

#include <limits>
#include <stdexcept>
#include <vector>

namespace combandit {

// weights[r][c] is the value of assigning row r to column c; all finite.
// Returns sigma with sigma[r] = assigned column.
inline std::vector<int> max_assignment(const std::vector<std::vector<double>>& weights) {
  const int n = static_cast<int>(weights.size());
  if (n == 0) return {};
  for (const auto& row : weights)
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("max_assignment: matrix must be square");

  const double inf = std::numeric_limits<double>::infinity();
  // Minimize negated weights; 1-based arrays per the textbook formulation.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weights[i0 - 1][j - 1] - u[i0] - v[j];
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
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> sigma(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) sigma[p[j] - 1] = j - 1;
  return sigma;
}

}  // namespace combandit
