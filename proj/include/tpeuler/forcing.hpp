#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>

#include "tpeuler/errors.hpp"

namespace tpeuler {

/// Time-periodic outer force F(x, t) with period 1 in t.
class Forcing {
public:
  using Evaluator = std::function<double(double x, double t)>;

  Forcing() : eval_([](double, double) { return 0.0; }) {}
  Forcing(Evaluator eval, double amplitude, std::string name = "custom")
      : eval_(std::move(eval)), amplitude_(amplitude), name_(std::move(name)) {}

  double operator()(double x, double t) const { return eval_(x, t); }
  /// Sup-norm estimate of |F|.
  double amplitude() const noexcept { return amplitude_; }
  const std::string& name() const noexcept { return name_; }
  bool is_zero() const noexcept { return amplitude_ == 0.0; }

private:
  Evaluator eval_;
  double amplitude_ = 0.0;
  std::string name_ = "zero";
};

/// zero, sin_t, sin_xt, gravity_pulse.
inline Forcing builtin_forcing(const std::string& name, double amplitude) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double a = amplitude;
  // sin(2 pi t) is evaluated through the fractional part so that t = 0 and
  // t = 1 give bit-identical values.
  auto periodic_sin = [two_pi](double t) {
    const double frac = t - std::floor(t);
    return frac == 0.0 ? 0.0 : std::sin(two_pi * frac);
  };
  if (name == "zero") return Forcing([](double, double) { return 0.0; }, 0.0, name);
  if (name == "sin_t") {
    return Forcing([a, periodic_sin](double, double t) { return a * periodic_sin(t); },
                   std::abs(a), name);
  }
  if (name == "sin_xt") {
    return Forcing(
        [a, periodic_sin](double x, double t) {
          return a * periodic_sin(t) * std::sin(std::numbers::pi * x);
        },
        std::abs(a), name);
  }
  if (name == "gravity_pulse") {
    return Forcing(
        [a, two_pi](double x, double t) {
          const double frac = t - std::floor(t);
          return a * (1.0 - std::cos(two_pi * frac)) / 2.0 * x * (1.0 - x);
        },
        std::abs(a) / 4.0, name);
  }
  throw ConfigurationError("unknown forcing '" + name + "'");
}

} // namespace tpeuler
