#pragma once
//
// Finite-dimensional period map on the shifted invariants
//   ({z(u_j) - I_j}_{j=0..2n_x}, {w(u_j) - I_j}_{j=0..2n_x})
// and a damped Picard driver for its fixed points.
//
// Only the odd nodes carry states at even levels; the coordinates of an even
// node x_j are those of the cell [x_j, x_{j+2}) it bounds on the left (the
// last node takes the last cell), with I evaluated at x_j itself. Decoding
// reads the odd-node coordinates.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tpeuler/diagnostics.hpp"
#include "tpeuler/errors.hpp"
#include "tpeuler/forcing.hpp"
#include "tpeuler/gas.hpp"
#include "tpeuler/grid.hpp"
#include "tpeuler/layer.hpp"
#include "tpeuler/scheme.hpp"

namespace tpeuler {

struct MapPoint {
  int n_x = 0;
  std::vector<double> coords; ///< z-block then w-block, ascending j

  std::size_t block() const noexcept { return static_cast<std::size_t>(2 * n_x + 1); }
  double& z(int j) { return coords[static_cast<std::size_t>(j)]; }
  double& w(int j) { return coords[block() + static_cast<std::size_t>(j)]; }
  double z(int j) const { return coords[static_cast<std::size_t>(j)]; }
  double w(int j) const { return coords[block() + static_cast<std::size_t>(j)]; }
};

inline double sup_distance(const MapPoint& a, const MapPoint& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) d = std::max(d, std::abs(a.coords[i] - b.coords[i]));
  return d;
}

inline double sup_norm(const MapPoint& a) {
  double d = 0.0;
  for (double c : a.coords) d = std::max(d, std::abs(c));
  return d;
}

inline MapPoint encode(const Layer& layer, const GasParams& gp) {
  if (layer.level % 2 != 0) {
    throw ConfigurationError("encode: level " + std::to_string(layer.level) +
                             " does not share the node set of level 0");
  }
  const Grid& g = layer.grid;
  MapPoint p;
  p.n_x = g.n_x;
  p.coords.assign(2 * p.block(), 0.0);
  for (int j = 0; j <= g.last_node(); ++j) {
    double i_val;
    int owner;
    if (j % 2 == 1) {
      owner = j;
      i_val = layer.i_vals[g.position(layer.level, j)];
    } else {
      owner = j < g.last_node() ? j + 1 : j - 1;
      i_val = point_I(layer, j);
    }
    const RiemannPair zw = to_invariants(layer.values[g.position(layer.level, owner)], gp);
    p.z(j) = zw.z - i_val;
    p.w(j) = zw.w - i_val;
  }
  return p;
}

struct DecodeResult {
  Layer layer;
  int sweeps = 0;
  double defect = 0.0;
};

/// Inverts `encode` at level 0. I depends on the decoded states, so each
/// node solves I_j = I(x_{j-1}) + dx zeta(u(z_j + I_j, w_j + I_j)) from left
/// to right; further sweeps confirm the profile (<= 20, tolerance 1e-12).
inline DecodeResult decode_detailed(const MapPoint& p, std::span<const double> reference_i,
                                    const Grid& grid, const GasParams& gp) {
  if (p.n_x != grid.n_x || p.coords.size() != 2 * p.block()) {
    throw ConfigurationError("decode: point does not match the grid");
  }
  const std::size_t n = static_cast<std::size_t>(grid.node_count(0));
  for (int j = 0; j <= grid.last_node(); ++j) {
    if (!(p.w(j) >= p.z(j))) {
      throw DecodeError("decode: w < z at node " + std::to_string(j), p.z(j) - p.w(j));
    }
  }
  std::vector<double> i_vals(n, 0.0);
  if (reference_i.size() == n) std::copy(reference_i.begin(), reference_i.end(), i_vals.begin());

  std::vector<ConservedState> states(n);
  auto state_at = [&](std::size_t k, double i_val) {
    const int j = grid.node(0, k);
    return from_invariants({p.z(j) + i_val, p.w(j) + i_val}, gp);
  };

  constexpr int max_sweeps = 20;
  constexpr double tol = 1e-12;
  DecodeResult out;
  double defect = std::numeric_limits<double>::infinity();
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double acc = 0.0; // integral of zeta over [0, x_{j-1}]
    defect = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double ik = i_vals[k];
      for (int inner = 0; inner < 60; ++inner) {
        const double next = acc + grid.dx * zeta(state_at(k, ik), gp);
        const double change = std::abs(next - ik);
        ik = next;
        if (change <= 1e-15 * std::max(1.0, std::abs(ik))) break;
      }
      defect = std::max(defect, std::abs(ik - i_vals[k]));
      i_vals[k] = ik;
      states[k] = state_at(k, ik);
      acc += 2.0 * grid.dx * zeta(states[k], gp);
    }
    out.sweeps = sweep;
    double scale = 1.0;
    for (double v : i_vals) scale = std::max(scale, std::abs(v));
    if (!std::isfinite(defect)) break;
    if (defect <= tol * scale) {
      out.defect = defect;
      out.layer = make_layer(grid, 0, std::move(states), gp);
      return out;
    }
  }
  throw DecodeError("decode: I-consistency iteration did not converge", defect);
}

inline Layer decode(const MapPoint& p, std::span<const double> reference_i, const Grid& grid,
                    const GasParams& gp) {
  return decode_detailed(p, reference_i, grid, gp).layer;
}

struct MapEvaluation {
  MapPoint image;
  Layer start;
  PeriodResult period;
};

inline MapEvaluation apply_F_detailed(const MapPoint& p, const Forcing& forcing,
                                      const GasParams& gp, const Grid& grid,
                                      const SchemeOptions& opt = {},
                                      std::span<const double> reference_i = {}) {
  MapEvaluation ev;
  ev.start = decode(p, reference_i, grid, gp);
  ev.period = run_period(ev.start, forcing, gp, opt);
  ev.image = encode(ev.period.final_layer, gp);
  return ev;
}

inline MapPoint apply_F(const MapPoint& p, const Forcing& forcing, const GasParams& gp,
                        const Grid& grid, const SchemeOptions& opt = {}) {
  return apply_F_detailed(p, forcing, gp, grid, opt).image;
}

/// max_j |rho^0_j (v^0_j + v^{2n_t}_j) dx|; below 1 the velocities of a
/// fixed point are determined by its densities.
inline double contraction_factor(const Layer& start, const Layer& end) {
  double f = 0.0;
  for (std::size_t k = 0; k < start.size(); ++k) {
    const double v0 = velocity(start.values[k]);
    const double v1 = velocity(end.values[k]);
    f = std::max(f, std::abs(start.values[k].rho * (v0 + v1) * start.grid.dx));
  }
  return f;
}

struct FixedPointOptions {
  double omega = 0.5;
  double tol = 1e-8;
  int max_iter = 500;
};

struct FixedPointTraceRow {
  int iteration = 0;
  double residual = 0.0;
  double contraction_factor = 0.0;
  double mass = 0.0;
  double energy = 0.0;
};

struct FixedPointReport {
  int iterations = 0;
  std::vector<double> residual_history;
  std::vector<FixedPointTraceRow> trace;
  bool converged = false;
  bool diverged = false;
  double contraction_factor = 0.0;
  MapPoint final_point;

  // Certificate of the final point.
  Layer start_layer;                  ///< decoded level 0
  Layer end_layer;                    ///< level 2 n_t
  double periodicity_defect = 0.0;    ///< sup over nodes of |rho| and |m| differences
  double band_margin_min = 0.0;
  int band_violations = 0;
  double mass_drift = 0.0;            ///< |mass(start) - rho_bar|
  int boundedness_violations = 0;     ///< images outside M + L + sup|I|
  bool any_entropy_clipped = false;
  double max_accumulated_l = 0.0;
};

/// Damped Picard iteration p <- (1 - omega) p + omega F(p).
inline FixedPointReport fixed_point(const MapPoint& initial, const Forcing& forcing,
                                    const FixedPointOptions& fo, const GasParams& gp,
                                    const Grid& grid, const SchemeOptions& opt = {}) {
  if (!(fo.omega > 0.0 && fo.omega <= 1.0)) throw ConfigurationError("omega must lie in (0, 1]");
  if (!(fo.tol > 0.0)) throw ConfigurationError("tol must be positive");
  if (fo.max_iter < 1) throw ConfigurationError("max_iter must be at least 1");

  FixedPointReport rep;
  MapPoint p = initial;
  std::vector<double> ref_i;
  for (int it = 1; it <= fo.max_iter; ++it) {
    MapEvaluation ev = apply_F_detailed(p, forcing, gp, grid, opt, ref_i);
    ref_i = ev.start.i_vals;
    const double res = sup_distance(ev.image, p);
    rep.iterations = it;
    rep.residual_history.push_back(res);

    const Layer& end = ev.period.final_layer;
    double sup_i = 0.0;
    for (double v : end.i_vals) sup_i = std::max(sup_i, std::abs(v));
    if (sup_norm(ev.image) > gp.big_m + end.l_val + sup_i) ++rep.boundedness_violations;
    for (const auto& r : ev.period.trace) rep.max_accumulated_l = std::max(rep.max_accumulated_l, r.accumulated_l);
    rep.any_entropy_clipped = rep.any_entropy_clipped || ev.period.any_clipped;

    const MassEnergy me = mass_energy(ev.start, gp);
    rep.trace.push_back({it, res, contraction_factor(ev.start, end), me.mass, me.energy});

    if (res <= fo.tol) {
      rep.converged = true;
      rep.final_point = p;
      break;
    }
    if (it > 20 && res > 10.0 * rep.residual_history[static_cast<std::size_t>(it - 21)]) {
      rep.diverged = true;
      rep.final_point = p;
      break;
    }
    for (std::size_t i = 0; i < p.coords.size(); ++i) {
      p.coords[i] = (1.0 - fo.omega) * p.coords[i] + fo.omega * ev.image.coords[i];
    }
    rep.final_point = p;
  }

  MapEvaluation fin = apply_F_detailed(rep.final_point, forcing, gp, grid, opt, ref_i);
  rep.start_layer = fin.start;
  rep.end_layer = fin.period.final_layer;
  rep.contraction_factor = contraction_factor(rep.start_layer, rep.end_layer);
  for (std::size_t k = 0; k < rep.start_layer.size(); ++k) {
    rep.periodicity_defect =
        std::max({rep.periodicity_defect,
                  std::abs(rep.start_layer.values[k].rho - rep.end_layer.values[k].rho),
                  std::abs(rep.start_layer.values[k].m - rep.end_layer.values[k].m)});
  }
  const BandReport band = band_check(rep.start_layer, 0.0, gp);
  rep.band_margin_min = band.min_margin;
  rep.band_violations = band.violations;
  rep.mass_drift = std::abs(mass_energy(rep.start_layer, gp).mass - gp.rho_bar);
  return rep;
}

} // namespace tpeuler
