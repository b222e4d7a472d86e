#pragma once
//
// Cell Riemann problems for the isentropic system: wave-curve intersection
// for the middle state, the four wave patterns, the shock speed S(rho, rho0)
// and the piecewise-constant 1-rarefaction fan.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tpeuler/errors.hpp"
#include "tpeuler/gas.hpp"

namespace tpeuler {

enum class WaveCase { R1S2, S1R2, R1R2, S1S2 };

inline const char* to_string(WaveCase c) {
  switch (c) {
    case WaveCase::R1S2: return "R1S2";
    case WaveCase::S1R2: return "S1R2";
    case WaveCase::R1R2: return "R1R2";
    case WaveCase::S1S2: return "S1S2";
  }
  return "?";
}

struct FanParams {
  double alpha_fan = 0.75;
  double beta_fan = 0.1;

  /// Throws unless beta < alpha, 1/2 + beta/2 < alpha < 1 - 2 beta,
  /// beta < 2/(gamma+5) and (9 - 3 gamma) beta / 2 < alpha.
  void validate(double gamma) const {
    const double a = alpha_fan;
    const double b = beta_fan;
    const bool ok = a > 0.5 && a < 1.0 && b > 0.0 && b < a && 0.5 + b / 2.0 < a &&
                    a < 1.0 - 2.0 * b && b < 2.0 / (gamma + 5.0) &&
                    (9.0 - 3.0 * gamma) * b / 2.0 < a;
    if (!ok) throw ConfigurationError("fan exponents violate the admissible box");
  }
};

struct ShockData {
  double sigma = 0.0;
  ConservedState middle;
};

struct RiemannFan {
  std::vector<RiemannPair> states; ///< (z_i*, w_L), i = 1..p
  std::vector<double> speeds;      ///< edge speed between states i and i+1
  int p = 0;
  std::optional<ShockData> shock;
};

struct MiddleState {
  ConservedState u;
  WaveCase kind = WaveCase::R1R2;
  double sigma1 = std::numeric_limits<double>::quiet_NaN(); ///< set when the 1-wave is a shock
  double sigma2 = std::numeric_limits<double>::quiet_NaN(); ///< set when the 2-wave is a shock
  int iterations = 0;
  bool bisection_fallback = false;
};

/// Relative speed of a shock joining densities rho0 (ahead) and rho.
inline double shock_speed_S(double rho, double rho0, const GasParams& gp) {
  if (!(rho0 > 0.0)) throw DomainError("shock_speed_S: reference density must be positive");
  if (!(rho >= 0.0)) throw DomainError("shock_speed_S: negative density");
  if (rho == rho0) return std::pow(rho0, gp.theta); // sqrt(p'(rho0))
  const double dp = pressure(rho, gp) - pressure(rho0, gp);
  return std::sqrt(rho * dp / (rho0 * (rho - rho0)));
}

/// Rankine-Hugoniot defect f(uR) - f(uL) - sigma (uR - uL).
inline std::pair<double, double> rh_residual(double sigma, const ConservedState& uL,
                                             const ConservedState& uR, const GasParams& gp) {
  auto check = [](const ConservedState& u) {
    if (!(u.rho >= 0.0)) throw DomainError("rh_residual: negative density");
    if (u.rho == 0.0 && u.m != 0.0) throw DomainError("rh_residual: momentum at vacuum");
  };
  check(uL);
  check(uR);
  return {(uR.m - uL.m) - sigma * (uR.rho - uL.rho),
          (momentum_flux(uR, gp) - momentum_flux(uL, gp)) - sigma * (uR.m - uL.m)};
}

namespace detail {

// Velocity on the wave curve through (rhoK, vK) at density rho, and its
// derivative in rho. sign = -1 for the forward 1-curve, +1 for the backward
// 2-curve.
struct CurvePoint {
  double v;
  double dv;
};

inline CurvePoint wave_curve(double rho, double rhoK, double vK, double sign,
                             const GasParams& gp) {
  const double th = gp.theta;
  if (rho <= rhoK) {
    const double v = vK + sign * (std::pow(rho, th) - std::pow(rhoK, th)) / th;
    const double dv = rho > 0.0 ? sign * std::pow(rho, th - 1.0) : sign * 1e300;
    return {v, dv};
  }
  const double dp = pressure(rho, gp) - pressure(rhoK, gp);
  const double drho = rho - rhoK;
  const double h = dp * drho / (rho * rhoK);
  const double root = std::sqrt(h);
  double dv;
  if (root > 0.0) {
    const double dh = (std::pow(rho, gp.gamma - 1.0) * drho + dp) / (rho * rhoK) -
                      dp * drho / (rho * rho * rhoK);
    dv = dh / (2.0 * root);
  } else {
    dv = std::pow(rhoK, th - 1.0);
  }
  return {vK + sign * root, sign * dv};
}

} // namespace detail

/// Middle state of the Riemann problem (uL, uR) by safeguarded Newton on
/// the density, falling back to bisection.
inline MiddleState solve_middle(const ConservedState& uL, const ConservedState& uR,
                                const GasParams& gp) {
  if (!(uL.rho > 0.0) || !(uR.rho > 0.0)) {
    throw DomainError("solve_middle: vacuum input");
  }
  const double vL = uL.m / uL.rho;
  const double vR = uR.m / uR.rho;
  auto f = [&](double rho) {
    const auto a = detail::wave_curve(rho, uL.rho, vL, -1.0, gp);
    const auto b = detail::wave_curve(rho, uR.rho, vR, +1.0, gp);
    return detail::CurvePoint{a.v - b.v, a.dv - b.dv};
  };
  const double wL = to_invariants(uL, gp).w;
  const double zR = to_invariants(uR, gp).z;
  if (!(wL > zR)) {
    throw NearVacuumError("solve_middle: wave curves meet at vacuum (w_L <= z_R)");
  }

  // Bracket [lo, hi] with f(lo) > 0 > f(hi); f is strictly decreasing.
  double lo = 0.0;
  double guess = density_from_invariants(zR, wL, gp);
  double hi = std::max({guess, uL.rho, uR.rho});
  while (f(hi).v > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw DomainError("solve_middle: failed to bracket");
  }
  double rho = std::clamp(guess, lo, hi);
  if (rho == 0.0) rho = 0.5 * hi;

  MiddleState out;
  constexpr int max_newton = 50;
  constexpr double tol = 1e-12;
  bool converged = false;
  for (int it = 0; it < max_newton; ++it) {
    const auto val = f(rho);
    out.iterations = it + 1;
    if (val.v == 0.0) {
      converged = true;
      break;
    }
    if (val.v > 0.0) lo = rho; else hi = rho;
    double next = rho - val.v / val.dv;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
      out.bisection_fallback = true;
    }
    const double step = std::abs(next - rho);
    rho = next;
    if (step <= tol * std::max(1.0, rho) || hi - lo <= tol * std::max(1.0, rho)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    out.bisection_fallback = true;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f(mid).v > 0.0) lo = mid; else hi = mid;
    }
    rho = 0.5 * (lo + hi);
  }

  const double vM = detail::wave_curve(rho, uL.rho, vL, -1.0, gp).v;
  out.u = {rho, rho * vM};
  constexpr double tie = 1e-12;
  const bool rare1 = rho <= uL.rho * (1.0 + tie);
  const bool rare2 = rho <= uR.rho * (1.0 + tie);
  if (rare1 && rare2) out.kind = WaveCase::R1R2;
  else if (rare1) out.kind = WaveCase::R1S2;
  else if (rare2) out.kind = WaveCase::S1R2;
  else out.kind = WaveCase::S1S2;
  if (!rare1) out.sigma1 = vL - shock_speed_S(rho, uL.rho, gp);
  if (!rare2) out.sigma2 = vR + shock_speed_S(rho, uR.rho, gp);
  return out;
}

inline WaveCase classify(const ConservedState& uL, const ConservedState& uR,
                         const GasParams& gp) {
  return solve_middle(uL, uR, gp).kind;
}

/// Piecewise-constant 1-rarefaction fan from uL up to z = zM, states spaced
/// (dx)^alpha apart in z.
inline RiemannFan build_fan(const ConservedState& uL, double zM, double dx,
                            const FanParams& fp, const GasParams& gp) {
  if (!(uL.rho > 0.0)) throw DomainError("build_fan: vacuum left state");
  const RiemannPair left = to_invariants(uL, gp);
  if (zM < left.z) throw DomainError("build_fan: z_M < z_L is not a 1-rarefaction");
  const double spacing = std::pow(dx, fp.alpha_fan);
  const int p = std::max(static_cast<int>(std::floor((zM - left.z) / spacing)) + 1, 2);

  RiemannFan fan;
  fan.p = p;
  fan.states.reserve(static_cast<std::size_t>(p));
  for (int i = 1; i < p; ++i) fan.states.push_back({left.z + (i - 1) * spacing, left.w});
  fan.states.push_back({zM, left.w});

  fan.speeds.reserve(static_cast<std::size_t>(p - 1));
  for (int i = 0; i + 1 < p; ++i) {
    const auto& a = fan.states[static_cast<std::size_t>(i)];
    const auto& b = fan.states[static_cast<std::size_t>(i) + 1];
    const double rho_a = density_from_invariants(a.z, a.w, gp);
    const double rho_b = density_from_invariants(b.z, b.w, gp);
    const double v_a = 0.5 * (a.w + a.z);
    fan.speeds.push_back(v_a - shock_speed_S(rho_b, rho_a, gp));
  }
  return fan;
}

/// Middle-state solve plus the fan of a 1-rarefaction and the data of a
/// 2-shock, when present.
inline RiemannFan riemann_fan(const ConservedState& uL, const ConservedState& uR, double dx,
                              const FanParams& fp, const GasParams& gp) {
  const MiddleState mid = solve_middle(uL, uR, gp);
  const RiemannPair left = to_invariants(uL, gp);
  const double zM = std::max(to_invariants(mid.u, gp).z, left.z);
  RiemannFan fan = build_fan(uL, mid.kind == WaveCase::R1S2 || mid.kind == WaveCase::R1R2
                                     ? zM
                                     : left.z,
                             dx, fp, gp);
  if (!std::isnan(mid.sigma2)) fan.shock = ShockData{mid.sigma2, mid.u};
  return fan;
}

} // namespace tpeuler
