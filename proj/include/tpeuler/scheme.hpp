#pragma once
//
// Modified staggered Lax-Friedrichs recurrence with the R/S correction
// terms, vacuum floor and invariant-region cutoff.
//
// Walls: at a level that owns the wall nodes (odd n) the missing neighbour
// is the mirror image (rho_1, -m_1) of the first interior node, with
// R_ghost = -R_1; the wall momentum is set to zero. R vanishes at wall nodes
// (it is odd under the reflection), which keeps the mass update telescoping.
//

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tpeuler/diagnostics.hpp"
#include "tpeuler/errors.hpp"
#include "tpeuler/forcing.hpp"
#include "tpeuler/gas.hpp"
#include "tpeuler/grid.hpp"
#include "tpeuler/layer.hpp"

namespace tpeuler {

struct SchemeOptions {
  bool cutoff = true;    ///< false: no band clamp and no vacuum floor (diagnostic mode)
  bool freeze_l = false; ///< keep L out of the band
  double delta = std::numeric_limits<double>::quiet_NaN(); ///< vacuum exponent; NaN = default
  int subsamples = 32;   ///< midpoint samples per cell for initial averaging

  /// Default exponent (1 + 1/(2 theta)) / 2, the midpoint of (1, 1/(2 theta)).
  double vacuum_exponent(const GasParams& gp) const {
    return std::isnan(delta) ? 0.5 * (1.0 + 1.0 / (2.0 * gp.theta)) : delta;
  }
  double vacuum_threshold(const Grid& grid, const GasParams& gp) const {
    return std::pow(grid.dx, vacuum_exponent(gp));
  }
};

using InitialSampler = std::function<ConservedState(double x)>;

/// Assembles a layer from its node values: zeta profile, I, band and L.
inline Layer make_layer(const Grid& grid, int level, std::vector<ConservedState> values,
                        std::vector<double> zeta_cells, double l_val, double l_band,
                        const GasParams& gp) {
  Layer layer;
  layer.grid = grid;
  layer.level = level;
  layer.values = std::move(values);
  layer.zeta_cells = std::move(zeta_cells);
  layer.i_vals = functional_I(grid, level, layer.zeta_cells);
  layer.l_val = l_val;
  layer.l_band = l_band;
  const double mn = m_sequence(level, grid, gp);
  layer.lo.resize(layer.size());
  layer.hi.resize(layer.size());
  for (std::size_t k = 0; k < layer.size(); ++k) {
    layer.lo[k] = -mn - l_band + layer.i_vals[k];
    layer.hi[k] = mn + l_band + layer.i_vals[k];
  }
  return layer;
}

/// Layer whose I is computed from its own values.
inline Layer make_layer(const Grid& grid, int level, std::vector<ConservedState> values,
                        const GasParams& gp, double l_val = 0.0, double l_band = 0.0) {
  auto z = zeta_profile(values, gp);
  return make_layer(grid, level, std::move(values), std::move(z), l_val, l_band, gp);
}

/// Level-0 cell averages over [x_{j-1}, x_{j+1}) by composite midpoint rule.
inline Layer init_layer(const InitialSampler& u0, const Grid& grid, const GasParams& gp,
                        const SchemeOptions& opt = {}) {
  const int subs = std::max(opt.subsamples, 8);
  std::vector<ConservedState> values(static_cast<std::size_t>(grid.node_count(0)));
  for (std::size_t k = 0; k < values.size(); ++k) {
    const int j = grid.node(0, k);
    const double left = grid.x(j - 1);
    const double h = 2.0 * grid.dx / subs;
    double rho = 0.0;
    double m = 0.0;
    for (int s = 0; s < subs; ++s) {
      const ConservedState u = u0(left + (s + 0.5) * h);
      if (!(u.rho >= 0.0)) {
        throw DomainError("initial density is negative near x=" + std::to_string(left + s * h));
      }
      rho += u.rho;
      m += u.m;
    }
    values[k] = {rho / subs, rho > 0.0 ? m / subs : 0.0};
  }
  return make_layer(grid, 0, std::move(values), gp);
}

struct CutoffResult {
  ConservedState u;
  bool clamped = false;
  bool floored = false;
};

/// Vacuum floor below `vacuum_threshold`, then z' = max(z, lo), w' = min(w, hi).
/// A clamp that inverts the pair (w' < z') empties the cell.
inline CutoffResult cutoff(const ConservedState& e, double lo, double hi,
                           double vacuum_threshold, const GasParams& gp) {
  if (lo > hi) {
    throw ConfigurationError("invariant region collapsed: lower band edge above upper edge");
  }
  if (!(e.rho >= vacuum_threshold)) return {{}, false, !e.is_vacuum()};
  const RiemannPair zw = to_invariants(e, gp);
  if (zw.z >= lo && zw.w <= hi) return {e, false, false};
  const double z = std::max(zw.z, lo);
  const double w = std::min(zw.w, hi);
  if (w <= z) return {{}, true, true};
  return {from_invariants({z, w}, gp), true, false};
}

struct SourceTerms {
  std::vector<double> R;
  std::vector<double> S;
  std::vector<double> G;
  std::vector<double> H;
  std::vector<double> xi;
};

/// Per-node correction terms of the recurrence at the layer's level.
inline SourceTerms source_terms(const Layer& layer, const Forcing& forcing,
                                const GasParams& gp) {
  const Grid& g = layer.grid;
  const std::size_t n = layer.size();
  const double t = g.t(layer.level);
  const double dx = g.dx;
  const double dt = g.dt;
  const double c = dt * dt / (8.0 * dx);

  SourceTerms st;
  st.R.assign(n, 0.0);
  st.S.assign(n, 0.0);
  st.G.assign(n, 0.0);
  st.H.assign(n, 0.0);
  st.xi.assign(n, 0.0);

  for (std::size_t k = 0; k + 1 < n; ++k) {
    const ConservedState& a = layer.values[k];
    const ConservedState& b = layer.values[k + 1];
    if (a.is_vacuum()) continue;
    st.xi[k] = (b.m + a.m) * dx -
               (2.0 * dt / 3.0) * (momentum_flux(b, gp) - momentum_flux(a, gp));
  }

  double moment = 0.0; // sum over k with k + 2 <= j of F(x_{k+1}, t) xi_k
  for (std::size_t k = 0; k < n; ++k) {
    const int j = layer.node(k);
    if (k > 0) moment += forcing(g.x(j - 1), t) * st.xi[k - 1];
    const ConservedState& u = layer.values[k];
    if (u.is_vacuum()) continue;
    const SourcePair gh = g_source(u, forcing(g.x(j), t), moment, gp);
    st.G[k] = gh.g1;
    st.H[k] = gh.g2;
    const double rho = u.rho;
    const double v = u.m / rho;
    const double rho_th = std::pow(rho, gp.theta);
    const double sum = gh.g2 + gh.g1;
    const double diff = gh.g2 - gh.g1;
    if (!g.is_wall(j)) st.R[k] = c * (rho * sum + (u.m / rho_th) * diff);
    st.S[k] = 0.25 * dx * rho * zeta(u, gp) +
              c * (2.0 * rho * (sum + 2.0 * v_flux(u, gp)) +
                   ((rho * v * v + std::pow(rho, gp.gamma)) / rho_th) * diff - 2.0 * u.m);
  }
  return st;
}

/// Raw recurrence values at level n+1 (before floor and cutoff), indexed by
/// position in J_{n+1}.
inline std::vector<ConservedState> advance(const Layer& layer, const Forcing& forcing,
                                           const GasParams& gp) {
  const Grid& g = layer.grid;
  if (layer.level >= g.period_steps()) {
    throw ConfigurationError("advance: layer is already at the end of the period");
  }
  const SourceTerms st = source_terms(layer, forcing, gp);
  const int next = layer.level + 1;
  const double t = g.t(layer.level);
  const double lam = g.dt / (2.0 * g.dx);

  struct Neighbour {
    ConservedState u;
    double flux;
    double R;
    double S;
  };
  auto at = [&](int j) {
    const std::size_t k = g.position(layer.level, j);
    return Neighbour{layer.values[k], momentum_flux(layer.values[k], gp), st.R[k], st.S[k]};
  };
  auto mirrored = [](Neighbour nb) {
    nb.u.m = -nb.u.m;
    nb.R = -nb.R;
    return nb;
  };

  std::vector<ConservedState> out(static_cast<std::size_t>(g.node_count(next)));
  for (std::size_t k = 0; k < out.size(); ++k) {
    const int j = g.node(next, k);
    const bool left_wall = j == 0;
    const bool right_wall = j == g.last_node();
    const Neighbour right = right_wall ? mirrored(at(j - 1)) : at(j + 1);
    const Neighbour left = left_wall ? mirrored(at(j + 1)) : at(j - 1);
    const double rho_avg = 0.5 * (right.u.rho + left.u.rho);
    const double rho = rho_avg - lam * (right.u.m - left.u.m) - right.R + left.R;
    double m = 0.0;
    if (!left_wall && !right_wall) {
      m = 0.5 * (right.u.m + left.u.m) - lam * (right.flux - left.flux) - right.S + left.S -
          g.dt * rho_avg * forcing(g.x(j), t);
    }
    out[k] = {rho, m};
  }
  return out;
}

struct StepResult {
  Layer layer;
  EntropyProduction entropy;
  int cut_nodes = 0;
  int vacuum_nodes = 0;
};

namespace detail {

inline double max_cfl_number(const Layer& layer, const GasParams& gp) {
  double lam = 0.0;
  for (const auto& u : layer.values) {
    if (!(u.rho >= 0.0) || !std::isfinite(u.m)) continue;
    const WaveSpeeds s = eigenvalues(u, gp);
    lam = std::max({lam, std::abs(s.lambda1), std::abs(s.lambda2)});
  }
  return lam * layer.grid.dt / layer.grid.dx;
}

[[noreturn]] inline void unstable(const Layer& prev, int node, const ConservedState& u,
                                  const GasParams& gp) {
  std::ostringstream msg;
  msg << "unstable update at level " << prev.level + 1 << ", node " << node
      << ": (rho, m) = (" << u.rho << ", " << u.m << "); CFL number max|lambda| dt/dx = "
      << max_cfl_number(prev, gp) << " at level " << prev.level
      << " (dx/dt = " << prev.grid.ratio << ")";
  throw InstabilityError(msg.str());
}

} // namespace detail

inline StepResult step_detailed(const Layer& layer, const Forcing& forcing, const GasParams& gp,
                                const SchemeOptions& opt = {}) {
  const Grid& g = layer.grid;
  std::vector<ConservedState> avg = advance(layer, forcing, gp);
  const int next = layer.level + 1;
  StepResult res;

  const double threshold = opt.vacuum_threshold(g, gp);
  for (std::size_t k = 0; k < avg.size(); ++k) {
    ConservedState& e = avg[k];
    if (!std::isfinite(e.rho) || !std::isfinite(e.m)) detail::unstable(layer, g.node(next, k), e, gp);
    if (!opt.cutoff) {
      if (e.rho < 0.0 || (e.rho == 0.0 && e.m != 0.0)) detail::unstable(layer, g.node(next, k), e, gp);
      continue;
    }
    if (e.rho < threshold) {
      if (!e.is_vacuum() || e.m != 0.0) ++res.vacuum_nodes;
      e = {};
    }
  }

  res.entropy = entropy_production(layer, avg, gp);
  const double l_new = layer.l_val + res.entropy.value;
  const double l_band = opt.freeze_l ? 0.0 : l_new;

  // I and the band come from the averaged states; the cutoff acts afterwards.
  Layer out = make_layer(g, next, avg, zeta_profile(avg, gp), l_new, l_band, gp);
  if (opt.cutoff) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      const CutoffResult c = cutoff(out.values[k], out.lo[k], out.hi[k], threshold, gp);
      if (c.clamped) ++res.cut_nodes;
      out.values[k] = c.u;
    }
  }
  res.layer = std::move(out);
  return res;
}

inline Layer step(const Layer& layer, const Forcing& forcing, const GasParams& gp,
                  const SchemeOptions& opt = {}) {
  return step_detailed(layer, forcing, gp, opt).layer;
}

struct PeriodResult {
  Layer final_layer;
  std::vector<DiagnosticsRecord> trace; ///< one record per level 0..2 n_t
  bool any_clipped = false;             ///< some raw L increment fell below -1e-12
};

using LayerObserver = std::function<void(const Layer&)>;

/// Applies `step` 2 n_t times starting from a level-0 layer.
inline PeriodResult run_period(const Layer& layer0, const Forcing& forcing, const GasParams& gp,
                               const SchemeOptions& opt = {},
                               const LayerObserver& observer = {}) {
  if (layer0.level != 0) throw ConfigurationError("run_period: start layer must be level 0");
  if (layer0.grid.n_t < 1) throw ConfigurationError("run_period: empty period (n_t = 0)");
  PeriodResult res;
  res.trace.reserve(static_cast<std::size_t>(layer0.grid.period_steps()) + 1);
  res.trace.push_back(make_record(layer0, gp, EntropyProduction{}));
  if (observer) observer(layer0);
  Layer cur = layer0;
  for (int n = 0; n < layer0.grid.period_steps(); ++n) {
    StepResult s = step_detailed(cur, forcing, gp, opt);
    DiagnosticsRecord rec = make_record(s.layer, gp, s.entropy);
    rec.cut_nodes = s.cut_nodes;
    rec.vacuum_nodes = s.vacuum_nodes;
    res.any_clipped = res.any_clipped || s.entropy.clipped;
    res.trace.push_back(rec);
    cur = std::move(s.layer);
    if (observer) observer(cur);
  }
  res.final_layer = std::move(cur);
  return res;
}

} // namespace tpeuler
