#pragma once
//
// Staggered space-time mesh on [0,1] x [0,1].
//
// Nodes x_j = j dx, j = 0..2 n_x; levels t_n = n dt, n = 0..2 n_t. Level n
// carries the nodes J_n = { j : j + n odd }, so even levels own the odd
// nodes (full cells [x_{j-1}, x_{j+1})) and odd levels own the even nodes,
// including the wall half-cells at j = 0 and j = 2 n_x.
//

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tpeuler/errors.hpp"
#include "tpeuler/gas.hpp"

namespace tpeuler {

struct Grid {
  int n_x = 0;
  double dx = 0.0;
  double dt = 0.0;
  int n_t = 0;        ///< one period is 2 n_t steps
  int ratio = 0;      ///< dx / dt, an integer >= floor(2M) + 1

  int last_node() const noexcept { return 2 * n_x; }
  int period_steps() const noexcept { return 2 * n_t; }
  double x(int j) const noexcept { return j * dx; }
  double t(int n) const noexcept { return n * dt; }

  /// First node of J_n.
  static int first_node(int level) noexcept { return (level % 2 == 0) ? 1 : 0; }
  /// |J_n|: n_x on even levels, n_x + 1 on odd ones.
  int node_count(int level) const noexcept { return level % 2 == 0 ? n_x : n_x + 1; }
  int node(int level, std::size_t position) const noexcept {
    return first_node(level) + 2 * static_cast<int>(position);
  }
  std::size_t position(int level, int j) const noexcept {
    return static_cast<std::size_t>((j - first_node(level)) / 2);
  }
  bool is_wall(int j) const noexcept { return j == 0 || j == last_node(); }
};

struct StaggerSet {
  int level = 0;
  std::vector<int> indices;

  bool contains(int j) const noexcept { return ((j + level) % 2 + 2) % 2 == 1; }
};

/// CFL mesh: dx = 1/(2 n_x), dx/dt = floor(2M) + 1, with 2 n_t dt = 1.
inline Grid build_grid(int n_x, const GasParams& gp) {
  if (n_x < 2) throw ConfigurationError("n_x must be at least 2, got " + std::to_string(n_x));
  const double target = std::floor(2.0 * gp.big_m) + 1.0;
  const double dx = 1.0 / (2.0 * n_x);
  const double candidate_dt = dx / target;
  // 1/(2 dt) = n_x * target, so the ceiling is exact whenever target fits an int.
  const double steps = std::ceil(1.0 / (2.0 * candidate_dt) - 1e-9);
  constexpr double max_half_steps = 5.0e7;
  if (!(steps <= max_half_steps)) {
    throw ConfigurationError("time step count overflow: n_x=" + std::to_string(n_x) +
                             " with M=" + std::to_string(gp.big_m));
  }
  Grid g;
  g.n_x = n_x;
  g.dx = dx;
  g.n_t = static_cast<int>(steps);
  g.dt = 1.0 / (2.0 * g.n_t);
  g.ratio = static_cast<int>(std::llround(dx / g.dt));
  if (static_cast<double>(g.ratio) < target) {
    throw ConfigurationError("CFL ratio fell below floor(2M)+1");
  }
  return g;
}

inline StaggerSet stagger(int level, const Grid& grid) {
  if (level < 0 || level > grid.period_steps()) {
    throw ConfigurationError("level " + std::to_string(level) + " outside [0, 2 n_t]");
  }
  StaggerSet s{level, {}};
  s.indices.reserve(static_cast<std::size_t>(grid.node_count(level)));
  for (int j = Grid::first_node(level); j <= grid.last_node(); j += 2) s.indices.push_back(j);
  return s;
}

} // namespace tpeuler
