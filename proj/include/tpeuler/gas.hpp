#pragma once
//
// Barotropic gas law p = rho^gamma / gamma, its Riemann invariants, the
// mechanical energy pair and the zeta/V/g functionals that define the
// mass-energy dependent invariant region.
//
// Vacuum (rho == 0) is treated as a single point: v = 0, z = w = 0.
//

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "tpeuler/errors.hpp"

namespace tpeuler {

struct GasParams {
  double gamma = 1.4;
  double theta = 0.2;      ///< (gamma - 1) / 2
  double eps = 0.01;
  double big_m = 10.0;     ///< invariant-region scale M
  double K = 1.0;          ///< M^{2(gamma-1)/(gamma+1) - eps}
  double alpha_zeta = 1.0; ///< coefficient of rho in zeta
  double rho_bar = 1.0;    ///< mean initial density
  double energy0 = 0.0;    ///< integral of eta*(u0)
};

struct ConservedState {
  double rho = 0.0;
  double m = 0.0;

  bool is_vacuum() const noexcept { return rho == 0.0; }
  friend bool operator==(const ConservedState&, const ConservedState&) = default;
};

struct RiemannPair {
  double z = 0.0;
  double w = 0.0;
};

struct WaveSpeeds {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

struct EntropyPair {
  double eta = 0.0;
  double q = 0.0;
};

struct SourcePair {
  double g1 = 0.0;
  double g2 = 0.0;
};

/// Exponent of M in K: 2(gamma-1)/(gamma+1) - eps.
inline double k_exponent(double gamma, double eps) {
  return 2.0 * (gamma - 1.0) / (gamma + 1.0) - eps;
}

/// Builds parameters coupled so that K = alpha * rho_bar - energy0 - 1.
inline GasParams make_gas_params(double gamma, double big_m, double rho_bar, double energy0,
                                 double eps = 0.01) {
  if (!(gamma > 1.0 && gamma <= 5.0 / 3.0)) {
    throw ConfigurationError("gamma must lie in (1, 5/3], got " + std::to_string(gamma));
  }
  if (!(big_m > 0.0)) throw ConfigurationError("M must be positive");
  if (!(eps > 0.0)) throw ConfigurationError("eps must be positive");
  if (!(rho_bar > 0.0)) throw ConfigurationError("mean density must be positive");
  GasParams gp;
  gp.gamma = gamma;
  gp.theta = (gamma - 1.0) / 2.0;
  gp.eps = eps;
  gp.big_m = big_m;
  gp.K = std::pow(big_m, k_exponent(gamma, eps));
  gp.rho_bar = rho_bar;
  gp.energy0 = energy0;
  gp.alpha_zeta = (gp.K + energy0 + 1.0) / rho_bar;
  return gp;
}

namespace detail {
inline void require_density(double rho, const char* where) {
  if (!(rho >= 0.0)) {
    throw DomainError(std::string(where) + ": negative or NaN density " + std::to_string(rho));
  }
}
} // namespace detail

inline double velocity(const ConservedState& u) { return u.rho > 0.0 ? u.m / u.rho : 0.0; }

inline double pressure(double rho, const GasParams& gp) {
  detail::require_density(rho, "pressure");
  return std::pow(rho, gp.gamma) / gp.gamma;
}

/// Momentum flux m^2/rho + p(rho); zero at vacuum.
inline double momentum_flux(const ConservedState& u, const GasParams& gp) {
  if (u.is_vacuum()) return 0.0;
  return u.m * u.m / u.rho + pressure(u.rho, gp);
}

inline RiemannPair to_invariants(const ConservedState& u, const GasParams& gp) {
  detail::require_density(u.rho, "to_invariants");
  if (u.is_vacuum()) return {};
  const double v = u.m / u.rho;
  const double c = std::pow(u.rho, gp.theta) / gp.theta;
  return {v - c, v + c};
}

/// Density on the line (z, w): (theta (w - z) / 2)^{1/theta}.
inline double density_from_invariants(double z, double w, const GasParams& gp) {
  if (!(w >= z)) throw DomainError("from_invariants: w < z");
  return std::pow(gp.theta * (w - z) / 2.0, 1.0 / gp.theta);
}

inline ConservedState from_invariants(const RiemannPair& p, const GasParams& gp) {
  const double rho = density_from_invariants(p.z, p.w, gp);
  if (rho == 0.0) return {};
  return {rho, rho * (p.w + p.z) / 2.0};
}

inline WaveSpeeds eigenvalues(const ConservedState& u, const GasParams& gp) {
  detail::require_density(u.rho, "eigenvalues");
  if (u.is_vacuum()) return {};
  const double v = u.m / u.rho;
  const double c = std::pow(u.rho, gp.theta);
  return {v - c, v + c};
}

/// Mechanical energy eta* and its flux q*.
inline EntropyPair entropy_pair(const ConservedState& u, const GasParams& gp) {
  detail::require_density(u.rho, "entropy_pair");
  if (u.is_vacuum()) return {};
  const double v = u.m / u.rho;
  const double g = gp.gamma;
  const double eta = 0.5 * u.m * v + std::pow(u.rho, g) / (g * (g - 1.0));
  const double q = u.m * (0.5 * v * v + std::pow(u.rho, g - 1.0) / (g - 1.0));
  return {eta, q};
}

inline double energy_density(const ConservedState& u, const GasParams& gp) {
  return entropy_pair(u, gp).eta;
}

/// Gradient of eta* with respect to (rho, m); requires rho > 0.
inline std::pair<double, double> energy_gradient(const ConservedState& u, const GasParams& gp) {
  if (!(u.rho > 0.0)) throw DomainError("energy_gradient: needs positive density");
  const double v = u.m / u.rho;
  return {-0.5 * v * v + std::pow(u.rho, gp.gamma - 1.0) / (gp.gamma - 1.0), v};
}

inline double zeta(const ConservedState& u, const GasParams& gp) {
  return energy_density(u, gp) - gp.alpha_zeta * u.rho + gp.K;
}

inline double v_flux(const ConservedState& u, const GasParams& gp) {
  return entropy_pair(u, gp).q - gp.alpha_zeta * u.m;
}

/// Source terms of the transported invariants z~ and w~.
/// `force_moment` approximates the integral of F m from 0 to x.
inline SourcePair g_source(const ConservedState& u, double force, double force_moment,
                           const GasParams& gp) {
  detail::require_density(u.rho, "g_source");
  const double forcing = force - force_moment;
  if (u.is_vacuum()) return {forcing, forcing};
  const double g = gp.gamma;
  const double th = gp.theta;
  const double rho = u.rho;
  const double v = u.m / rho;
  const double rho_th = std::pow(rho, th);
  const double rho_th1 = rho_th * rho;
  const double powers = std::pow(rho, g + th) / (g * (g - 1.0)) + std::pow(rho, g) * v / g +
                        0.5 * rho_th1 * v * v - gp.alpha_zeta * rho_th1;
  const double lambda1 = v - rho_th;
  const double lambda2 = v + rho_th;
  return {-gp.K * lambda1 + powers + forcing, -gp.K * lambda2 - powers + forcing};
}

/// Constant weighting the quadratic remainder in the entropy-production functional.
inline double c_gamma(double gamma) {
  const double th = (gamma - 1.0) / 2.0;
  const double a = std::pow(2.0, th) * (th + 1.0);
  const double b = 2.0 * gamma * (gamma - 1.0) / (gamma - 2.0 + std::pow(0.5, gamma - 1.0));
  return std::max(a, b);
}

} // namespace tpeuler
