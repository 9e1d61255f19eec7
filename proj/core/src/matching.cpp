#include "apep/matching.hpp"

#include <algorithm>
#include <cstdlib>

#include "apep/error.hpp"

namespace apep {

namespace {

// Shortest augmenting path Hungarian method with potentials (minimization),
// rows <= cols, 1-based internally. Forbidden edges carry a penalty larger
// than any achievable difference between allowed assignments, so an
// assignment avoiding them is always preferred when one exists.
std::optional<Matching> solve_assignment(const WeightedBipartite& g) {
  const std::size_t n = g.left();
  const std::size_t m = g.right();
  if (n > m) throw InvalidInput("matching needs left <= right");
  if (n == 0) return Matching{};

  std::int64_t max_abs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (g.allowed(i, j)) max_abs = std::max(max_abs, std::abs(g.weight(i, j)));
  const std::int64_t penalty = (2 * max_abs + 1) * static_cast<std::int64_t>(n) + 1;
  auto cost = [&](std::size_t i, std::size_t j) {
    return g.allowed(i, j) ? -g.weight(i, j) : penalty;
  };

  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(m + 1, 0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      std::int64_t delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Matching result;
  result.mate.assign(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) result.mate[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.allowed(i, result.mate[i])) return std::nullopt;
    result.total += g.weight(i, result.mate[i]);
  }
  return result;
}

}  // namespace

std::optional<Matching> max_weight_perfect_matching(const WeightedBipartite& g) {
  if (!g.square()) throw InvalidInput("perfect matching needs a square weight matrix");
  return solve_assignment(g);
}

std::optional<Matching> max_weight_left_matching(const WeightedBipartite& g) { return solve_assignment(g); }

}  // namespace apep
