#pragma once
//
// Runtime checks of the structural properties of the scheme: mass and
// energy, the entropy-production accumulator L, the shrinking band M_n, the
// boundary compatibility of the band and the g2 decay estimate.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tpeuler/gas.hpp"
#include "tpeuler/grid.hpp"
#include "tpeuler/layer.hpp"

namespace tpeuler {

/// Band half-width M_n = M (1 - dt/4)^n.
inline double m_sequence(int level, const Grid& grid, const GasParams& gp) {
  if (level < 0 || level > grid.period_steps()) {
    throw ConfigurationError("m_sequence: level out of range");
  }
  return gp.big_m * std::pow(1.0 - grid.dt / 4.0, level);
}

struct MassEnergy {
  double mass = 0.0;
  double energy = 0.0;
};

inline MassEnergy mass_energy(const Layer& layer, const GasParams& gp) {
  MassEnergy out;
  for (std::size_t k = 0; k < layer.size(); ++k) {
    const double wgt = cell_width(layer.grid, layer.node(k));
    out.mass += wgt * layer.values[k].rho;
    out.energy += wgt * energy_density(layer.values[k], gp);
  }
  return out;
}

struct EntropyProduction {
  double raw = 0.0;       ///< jensen + weighted remainder, before clipping
  double jensen = 0.0;
  double remainder = 0.0; ///< unweighted sum of the quadratic remainders
  double value = 0.0;     ///< max(raw, 0)
  bool clipped = false;   ///< raw < -1e-12
};

namespace detail {

/// Second-order Taylor remainder of eta* about e: eta(u) - eta(e) - grad eta(e).(u - e).
inline double energy_remainder(const ConservedState& u, const ConservedState& e,
                               const GasParams& gp) {
  if (!(e.rho > 0.0)) return 0.0;
  const auto [d_rho, d_m] = energy_gradient(e, gp);
  return energy_density(u, gp) - energy_density(e, gp) - d_rho * (u.rho - e.rho) -
         d_m * (u.m - e.m);
}

} // namespace detail

/// Entropy-production increment between `prev` (level n) and the averaged
/// states `next_avg` of level n+1 (indexed by position in J_{n+1}).
///
/// Before averaging, the cell of node j holds prev u_{j-1} on its left half
/// and prev u_{j+1} on its right half. The increment is the Jensen gap of
/// that two-state profile against its mean, plus the (x_{j+1} - x)-weighted
/// quadratic remainder of eta* about the averaged state, scaled by
/// 1 + C_gamma alpha rho_bar.
inline EntropyProduction entropy_production(const Layer& prev,
                                            std::span<const ConservedState> next_avg,
                                            const GasParams& gp) {
  const Grid& g = prev.grid;
  const int next_level = prev.level + 1;
  const double dx = g.dx;
  EntropyProduction out;
  for (std::size_t k = 0; k < next_avg.size(); ++k) {
    const int j = g.node(next_level, k);
    const ConservedState& e = next_avg[k];
    if (j == 0 || j == g.last_node()) {
      // Wall half-cell: a single prior state, no Jensen gap.
      const int inner = j == 0 ? 1 : g.last_node() - 1;
      const ConservedState& u = prev.values[g.position(prev.level, inner)];
      out.remainder += 0.5 * dx * detail::energy_remainder(u, e, gp);
      continue;
    }
    const ConservedState& uL = prev.values[g.position(prev.level, j - 1)];
    const ConservedState& uR = prev.values[g.position(prev.level, j + 1)];
    const ConservedState mean{0.5 * (uL.rho + uR.rho), 0.5 * (uL.m + uR.m)};
    out.jensen += 2.0 * dx *
                  (0.5 * (energy_density(uL, gp) + energy_density(uR, gp)) -
                   energy_density(mean, gp));
    out.remainder += dx * (0.75 * detail::energy_remainder(uL, e, gp) +
                           0.25 * detail::energy_remainder(uR, e, gp));
  }
  const double weight = 1.0 + c_gamma(gp.gamma) * gp.alpha_zeta * gp.rho_bar;
  out.raw = out.jensen + weight * out.remainder;
  out.clipped = out.raw < -1e-12;
  out.value = std::max(out.raw, 0.0);
  return out;
}

struct BandReport {
  std::vector<double> lower_margin; ///< z_j - lo_j
  std::vector<double> upper_margin; ///< hi_j - w_j
  double min_margin = std::numeric_limits<double>::infinity();
  int violations = 0;
};

/// Roundoff allowance for "exact" band membership after a cutoff that
/// round-trips through (rho, m).
inline double band_tolerance(double bound) { return 1e-12 * std::max(1.0, std::abs(bound)); }

/// Margins against -M_n - L + I_j <= z_j and w_j <= M_n + L + I_j.
inline BandReport band_check(const Layer& layer, double accumulated_l, const GasParams& gp) {
  BandReport r;
  const double mn = m_sequence(layer.level, layer.grid, gp);
  r.lower_margin.resize(layer.size());
  r.upper_margin.resize(layer.size());
  for (std::size_t k = 0; k < layer.size(); ++k) {
    const RiemannPair zw = to_invariants(layer.values[k], gp);
    const double lo = -mn - accumulated_l + layer.i_vals[k];
    const double hi = mn + accumulated_l + layer.i_vals[k];
    r.lower_margin[k] = zw.z - lo;
    r.upper_margin[k] = hi - zw.w;
    r.min_margin = std::min({r.min_margin, r.lower_margin[k], r.upper_margin[k]});
    if (r.lower_margin[k] < -band_tolerance(lo)) ++r.violations;
    if (r.upper_margin[k] < -band_tolerance(hi)) ++r.violations;
  }
  return r;
}

struct BoundaryCompat {
  bool left_ok = true;
  bool right_ok = true;
  double left_value = 0.0;  ///< U(0) + L(0) negated: 2 M_n
  double right_value = 0.0; ///< L(1) + U(1) = 2 (energy - alpha mass + K)
};

inline BoundaryCompat boundary_compat(const Layer& layer, const GasParams& gp,
                                      double tol = 1e-12) {
  const double mn = m_sequence(layer.level, layer.grid, gp);
  const MassEnergy me = mass_energy(layer, gp);
  BoundaryCompat b;
  b.left_value = 2.0 * mn;
  b.left_ok = b.left_value >= 0.0;
  b.right_value = 2.0 * (me.energy - gp.alpha_zeta * me.mass + gp.K);
  b.right_ok = b.right_value <= tol;
  return b;
}

struct DecayCheck {
  double g2 = 0.0;
  double bound = 0.0;
  bool satisfied = false;
};

/// g2 on the upper band edge against -M^{1 + 2(gamma-1)/(gamma+1) - eps} / 2.
inline DecayCheck decay_estimate_check(const ConservedState& u, double force,
                                       double force_moment, const GasParams& gp) {
  DecayCheck d;
  d.g2 = g_source(u, force, force_moment, gp).g2;
  d.bound = -0.5 * std::pow(gp.big_m, 1.0 + k_exponent(gp.gamma, gp.eps));
  d.satisfied = d.g2 <= d.bound;
  return d;
}

/// Density separating the two regimes of the decay estimate: (rho_bar M / 3)^{1/(theta+1)}.
inline double decay_regime_threshold(const GasParams& gp) {
  return std::pow(gp.rho_bar * gp.big_m / 3.0, 1.0 / (gp.theta + 1.0));
}

/// State with w = M at density rho (requires z = w - 2 rho^theta/theta >= -M).
inline ConservedState band_edge_state(double rho, const GasParams& gp) {
  const double v = gp.big_m - std::pow(rho, gp.theta) / gp.theta;
  return {rho, rho * v};
}

struct DiagnosticsRecord {
  int level = 0;
  double mass = 0.0;
  double energy = 0.0;
  double l_increment = 0.0;
  double l_raw = 0.0;
  double accumulated_l = 0.0;
  double m_n = 0.0;
  double band_margin_min = 0.0;
  int band_violations = 0;
  bool boundary_left_ok = true;
  bool boundary_right_ok = true;
  double boundary_right_value = 0.0;
  int cut_nodes = 0;    ///< nodes clamped by the band at this level
  int vacuum_nodes = 0; ///< nodes floored to vacuum at this level
};

inline DiagnosticsRecord make_record(const Layer& layer, const GasParams& gp,
                                     const EntropyProduction& ep) {
  DiagnosticsRecord r;
  r.level = layer.level;
  const MassEnergy me = mass_energy(layer, gp);
  r.mass = me.mass;
  r.energy = me.energy;
  r.l_increment = ep.value;
  r.l_raw = ep.raw;
  r.accumulated_l = layer.l_val;
  r.m_n = m_sequence(layer.level, layer.grid, gp);
  const BandReport band = band_check(layer, layer.l_band, gp);
  r.band_margin_min = band.min_margin;
  r.band_violations = band.violations;
  const BoundaryCompat bc = boundary_compat(layer, gp);
  r.boundary_left_ok = bc.left_ok;
  r.boundary_right_ok = bc.right_ok;
  r.boundary_right_value = bc.right_value;
  return r;
}

} // namespace tpeuler
