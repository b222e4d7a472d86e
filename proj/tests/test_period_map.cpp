#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tpeuler/period_map.hpp"

using namespace tpeuler;

namespace {

struct Fixture {
  GasParams gp;
  Grid grid;
};

Fixture setup(int n_x = 25, double m = 9.0) {
  Fixture s{make_gas_params(1.4, m, 1.0, 1.0 / 0.56), {}};
  s.grid = build_grid(n_x, s.gp);
  return s;
}

Layer uniform(const Fixture& s, ConservedState u, int level = 0) {
  return make_layer(s.grid, level,
                    std::vector<ConservedState>(static_cast<std::size_t>(s.grid.node_count(level)), u), s.gp);
}

Layer random_layer(const Fixture& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.5, 1.5), v(-0.3, 0.3);
  std::vector<ConservedState> vals(static_cast<std::size_t>(s.grid.node_count(0)));
  for (auto& u : vals) {
    u.rho = r(rng);
    u.m = u.rho * v(rng);
  }
  return make_layer(s.grid, 0, std::move(vals), s.gp);
}

} // namespace

TEST(Encode, ConstantClosedForm) {
  const Fixture s = setup(6);
  const ConservedState u{1.0, 0.0};
  const MapPoint p = encode(uniform(s, u), s.gp);
  ASSERT_EQ(p.coords.size(), static_cast<std::size_t>(4 * 6 + 2));
  const double zb = zeta(u, s.gp);
  for (int j = 0; j <= s.grid.last_node(); ++j) {
    EXPECT_NEAR(p.z(j), -5.0 - zb * s.grid.x(j), 1e-13);
    EXPECT_NEAR(p.w(j), 5.0 - zb * s.grid.x(j), 1e-13);
  }
}

TEST(Encode, VacuumLayer) {
  const Fixture s = setup(4);
  const MapPoint p = encode(uniform(s, {}), s.gp);
  for (int j = 0; j <= s.grid.last_node(); ++j) {
    EXPECT_NEAR(p.z(j), -s.gp.K * s.grid.x(j), 1e-13);
    EXPECT_EQ(p.z(j), p.w(j));
  }
}

TEST(Encode, RejectsOddLevel) {
  const Fixture s = setup(4);
  EXPECT_THROW(encode(uniform(s, {1.0, 0.0}, 1), s.gp), ConfigurationError);
}

TEST(Decode, RoundTripRandomLayers) {
  const Fixture s = setup(25);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Layer l = random_layer(s, rng);
    const MapPoint p = encode(l, s.gp);
    const DecodeResult d = decode_detailed(p, {}, s.grid, s.gp);
    EXPECT_LE(d.sweeps, 5);
    for (std::size_t k = 0; k < l.size(); ++k) {
      const RiemannPair a = to_invariants(l.values[k], s.gp);
      const RiemannPair b = to_invariants(d.layer.values[k], s.gp);
      EXPECT_NEAR(a.z, b.z, 1e-12 * std::max(1.0, std::abs(a.z)));
      EXPECT_NEAR(a.w, b.w, 1e-12 * std::max(1.0, std::abs(a.w)));
      EXPECT_NEAR(l.i_vals[k], d.layer.i_vals[k], 1e-12);
    }
    EXPECT_LE(sup_distance(encode(d.layer, s.gp), p), 1e-10);
  }
}

TEST(Decode, ConstantPointGivesConstantLayer) {
  const Fixture s = setup(8);
  const Layer l = decode(encode(uniform(s, {0.8, 0.0}), s.gp), {}, s.grid, s.gp);
  for (const auto& u : l.values) {
    EXPECT_NEAR(u.rho, 0.8, 1e-13);
    EXPECT_NEAR(u.m, 0.0, 1e-13);
  }
}

TEST(Decode, RejectsUnphysicalPoint) {
  const Fixture s = setup(4);
  MapPoint p = encode(uniform(s, {1.0, 0.0}), s.gp);
  p.w(3) = p.z(3) - 1.0;
  EXPECT_THROW(decode(p, {}, s.grid, s.gp), DecodeError);
}

TEST(ApplyF, EquilibriumIdentity) {
  const Fixture s = setup(25);
  const MapPoint p = encode(uniform(s, {1.0, 0.0}), s.gp);
  EXPECT_LE(sup_distance(apply_F(p, Forcing{}, s.gp, s.grid), p), 1e-12);
}

TEST(ApplyF, VacuumFixed) {
  const Fixture s = setup(5);
  const MapPoint p = encode(uniform(s, {}), s.gp);
  EXPECT_LE(sup_distance(apply_F(p, Forcing{}, s.gp, s.grid), p), 1e-12);
}

TEST(ApplyF, ResponseScalesWithForcing) {
  const Fixture s = setup(10);
  const MapPoint p = encode(uniform(s, {1.0, 0.0}), s.gp);
  const double r1 = sup_distance(apply_F(p, builtin_forcing("sin_t", 1e-3), s.gp, s.grid), p);
  const double r2 = sup_distance(apply_F(p, builtin_forcing("sin_t", 2e-3), s.gp, s.grid), p);
  EXPECT_GT(r1, 0.0);
  EXPECT_NEAR(r2 / r1, 2.0, 0.1);
}

TEST(FixedPoint, EquilibriumConvergesImmediately) {
  const Fixture s = setup(25);
  const auto rep = fixed_point(encode(uniform(s, {1.0, 0.0}), s.gp), Forcing{}, {}, s.gp, s.grid);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_EQ(rep.residual_history.size(), 1u);
  EXPECT_LE(rep.residual_history[0], 1e-12);
}

TEST(FixedPoint, PerturbedStartWithoutForcing) {
  const Fixture s = setup(10);
  const Layer l = init_layer(
      [](double x) { return ConservedState{1.0 + 0.05 * std::sin(2.0 * std::numbers::pi * x), 0.0}; },
      s.grid, s.gp);
  FixedPointOptions fo;
  fo.max_iter = 500;
  const auto rep = fixed_point(encode(l, s.gp), Forcing{}, fo, s.gp, s.grid);
  EXPECT_TRUE(rep.converged);
  for (std::size_t i = 1; i < rep.residual_history.size(); ++i) {
    EXPECT_LE(rep.residual_history[i], rep.residual_history[i - 1] * (1 + 1e-9));
  }
}

TEST(FixedPoint, SmallPeriodicForcing) {
  const Fixture s = setup(25);
  const auto rep = fixed_point(encode(uniform(s, {1.0, 0.0}), s.gp), builtin_forcing("sin_t", 0.005),
                               {}, s.gp, s.grid);
  ASSERT_TRUE(rep.converged);
  EXPECT_LE(rep.residual_history.back(), 1e-8);
  EXPECT_LT(rep.contraction_factor, 1.0);
  EXPECT_LE(rep.periodicity_defect, 1e-6);
  EXPECT_EQ(rep.band_violations, 0);
  EXPECT_EQ(rep.boundedness_violations, 0);
  EXPECT_LE(rep.mass_drift, 10 * s.grid.dx);
  EXPECT_EQ(rep.trace.size(), static_cast<std::size_t>(rep.iterations));
}

TEST(FixedPoint, OptionGuards) {
  const Fixture s = setup(4);
  const MapPoint p = encode(uniform(s, {1.0, 0.0}), s.gp);
  EXPECT_THROW(fixed_point(p, Forcing{}, {0.0, 1e-8, 10}, s.gp, s.grid), ConfigurationError);
  EXPECT_THROW(fixed_point(p, Forcing{}, {0.5, 0.0, 10}, s.gp, s.grid), ConfigurationError);
  EXPECT_THROW(fixed_point(p, Forcing{}, {0.5, 1e-8, 0}, s.gp, s.grid), ConfigurationError);
}
