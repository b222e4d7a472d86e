#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "tpeuler/gas.hpp"
#include "tpeuler/grid.hpp"

namespace tpeuler {

/// One staggered time level. Per-node vectors are indexed by position in
/// J_level (see Grid::node / Grid::position).
struct Layer {
  Grid grid;
  int level = 0;
  std::vector<ConservedState> values;
  /// zeta of the cell averages E_j that define I (equals zeta(values) when
  /// the cutoff left the level untouched).
  std::vector<double> zeta_cells;
  /// I_j: integral of the piecewise-constant zeta profile from 0 to x_j.
  std::vector<double> i_vals;
  /// Band used by the cutoff at this level.
  std::vector<double> lo;
  std::vector<double> hi;
  /// Running entropy-production accumulator L.
  double l_val = 0.0;
  /// L entering the band (0 when the accumulator is frozen out of the cutoff).
  double l_band = 0.0;

  std::size_t size() const noexcept { return values.size(); }
  int node(std::size_t pos) const noexcept { return grid.node(level, pos); }
  double x(std::size_t pos) const noexcept { return grid.x(node(pos)); }
};

/// Width of the cell owned by node j at `level`: dx for the wall half-cells,
/// 2 dx otherwise.
inline double cell_width(const Grid& grid, int j) { return grid.is_wall(j) ? grid.dx : 2.0 * grid.dx; }

inline std::vector<double> zeta_profile(std::span<const ConservedState> states,
                                        const GasParams& gp) {
  std::vector<double> out(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) out[k] = zeta(states[k], gp);
  return out;
}

/// I_j = integral over [0, x_j] of the piecewise-constant zeta profile.
/// Node j's cell is [x_{j-1}, x_{j+1}) (clipped to [0,1] at the walls), so
/// I_j collects every full cell to the left plus the left half of its own.
inline std::vector<double> functional_I(const Grid& grid, int level,
                                        std::span<const double> zeta_cells) {
  std::vector<double> out(zeta_cells.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < zeta_cells.size(); ++k) {
    const int j = grid.node(level, k);
    if (j == 0) {
      out[k] = 0.0;
      acc += grid.dx * zeta_cells[k];
      continue;
    }
    out[k] = acc + grid.dx * zeta_cells[k];
    acc += cell_width(grid, j) * zeta_cells[k];
  }
  return out;
}

inline std::vector<double> functional_I(const Layer& layer, const GasParams& gp) {
  const auto z = zeta_profile(layer.values, gp);
  return functional_I(layer.grid, layer.level, z);
}

/// I evaluated at an arbitrary node x_j, j = 0..2 n_x, from a layer's zeta
/// profile.
inline double point_I(const Layer& layer, int j) {
  const Grid& g = layer.grid;
  double acc = 0.0;
  for (std::size_t k = 0; k < layer.size(); ++k) {
    const int node = layer.node(k);
    const double left = node == 0 ? 0.0 : g.x(node - 1);
    const double right = node == g.last_node() ? 1.0 : g.x(node + 1);
    const double xj = g.x(j);
    if (xj <= left) break;
    acc += (std::min(xj, right) - left) * layer.zeta_cells[k];
  }
  return acc;
}

} // namespace tpeuler
