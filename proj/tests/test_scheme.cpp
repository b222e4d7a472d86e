#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support/recurrence_oracle.hpp"
#include "tpeuler/diagnostics.hpp"
#include "tpeuler/scheme.hpp"

using namespace tpeuler;

namespace {

struct Fixture {
  GasParams gp;
  Grid grid;
};

Fixture setup(int n_x, double m = 9.0, double gamma = 1.4) {
  const double e0 = 1.0 / (gamma * (gamma - 1.0));
  Fixture s{make_gas_params(gamma, m, 1.0, e0), {}};
  s.grid = build_grid(n_x, s.gp);
  return s;
}

Layer constant_layer(const Fixture& s, ConservedState u, int level = 0) {
  return make_layer(s.grid, level,
                    std::vector<ConservedState>(static_cast<std::size_t>(s.grid.node_count(level)), u),
                    s.gp);
}

Layer random_layer(const Fixture& s, int level, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.5, 2.0), v(-0.5, 0.5);
  std::vector<ConservedState> vals(static_cast<std::size_t>(s.grid.node_count(level)));
  for (auto& u : vals) {
    u.rho = r(rng);
    u.m = u.rho * v(rng);
  }
  return make_layer(s.grid, level, std::move(vals), s.gp);
}

SchemeOptions raw() {
  SchemeOptions o;
  o.cutoff = false;
  return o;
}

} // namespace

TEST(InitLayer, Constant) {
  const Fixture s = setup(5);
  const Layer l = init_layer([](double) { return ConservedState{1.7, 0.0}; }, s.grid, s.gp);
  ASSERT_EQ(l.size(), 5u);
  for (const auto& u : l.values) {
    EXPECT_DOUBLE_EQ(u.rho, 1.7);
    EXPECT_EQ(u.m, 0.0);
  }
}

TEST(InitLayer, LinearDensity) {
  const Fixture s = setup(2, 0.4);
  const Layer l = init_layer([](double x) { return ConservedState{x, 0.0}; }, s.grid, s.gp);
  EXPECT_NEAR(l.values[0].rho, 0.25, 1e-15);
  EXPECT_NEAR(l.values[1].rho, 0.75, 1e-15);
}

TEST(InitLayer, BumpAverages) {
  const Fixture s = setup(25);
  const Layer l = init_layer(
      [](double x) { return ConservedState{1.0 + 0.1 * std::sin(2.0 * std::numbers::pi * x), 0.0}; },
      s.grid, s.gp);
  EXPECT_NEAR(l.values[s.grid.position(0, 1)].rho, 1.0125003630067498987, 1e-6);
  EXPECT_NEAR(l.values[s.grid.position(0, 13)].rho, 1.0995402100544348852, 1e-6);
  EXPECT_NEAR(l.values[s.grid.position(0, 49)].rho, 0.98749963699325010133, 1e-6);
}

TEST(InitLayer, RejectsNegativeDensity) {
  const Fixture s = setup(4);
  EXPECT_THROW(init_layer([](double x) { return ConservedState{x - 0.5, 0.0}; }, s.grid, s.gp),
               DomainError);
}

TEST(FunctionalI, VacuumAndConstant) {
  const Fixture s = setup(6);
  for (int level : {0, 1}) {
    const Layer vac = constant_layer(s, {}, level);
    const Layer con = constant_layer(s, {1.3, 0.2}, level);
    const double zc = zeta({1.3, 0.2}, s.gp);
    for (std::size_t k = 0; k < vac.size(); ++k) {
      EXPECT_NEAR(vac.i_vals[k], s.gp.K * vac.x(k), 1e-14);
      EXPECT_NEAR(con.i_vals[k], zc * con.x(k), 1e-14);
    }
  }
}

TEST(FunctionalI, HandSummedTwoValueLayers) {
  const Fixture s = setup(2, 0.4);
  const double dx = s.grid.dx;
  const ConservedState a{1.0, 0.1}, b{0.5, -0.2}, c{2.0, 0.0};
  const double za = zeta(a, s.gp), zb = zeta(b, s.gp), zc = zeta(c, s.gp);
  const Layer even = make_layer(s.grid, 0, {a, b}, s.gp);
  EXPECT_NEAR(even.i_vals[0], dx * za, 1e-14);
  EXPECT_NEAR(even.i_vals[1], 2 * dx * za + dx * zb, 1e-14);
  const Layer odd = make_layer(s.grid, 1, {a, b, c}, s.gp);
  EXPECT_EQ(odd.i_vals[0], 0.0);
  EXPECT_NEAR(odd.i_vals[1], dx * za + dx * zb, 1e-14);
  EXPECT_NEAR(odd.i_vals[2], dx * za + 2 * dx * zb + dx * zc, 1e-14);
  EXPECT_NEAR(point_I(odd, 3), dx * za + 2 * dx * zb, 1e-14);
  EXPECT_NEAR(point_I(even, 4), 2 * dx * (za + zb), 1e-14);
}

TEST(Cutoff, Semantics) {
  const Fixture s = setup(10);
  const double th = 1e-3;
  const ConservedState e{1.0, 0.2};
  const RiemannPair zw = to_invariants(e, s.gp);
  auto in = cutoff(e, zw.z - 1, zw.w + 1, th, s.gp);
  EXPECT_EQ(in.u, e);
  EXPECT_FALSE(in.clamped);
  auto vac = cutoff({0.5 * th, 0.1}, -10, 10, th, s.gp);
  EXPECT_TRUE(vac.u.is_vacuum());
  EXPECT_TRUE(vac.floored);
  auto lo = cutoff(e, zw.z + 1, zw.w + 1, th, s.gp);
  const RiemannPair out = to_invariants(lo.u, s.gp);
  EXPECT_NEAR(out.z, zw.z + 1, 1e-12);
  EXPECT_NEAR(out.w, zw.w, 1e-12);
  EXPECT_TRUE(lo.clamped);
  EXPECT_THROW(cutoff(e, 1.0, 0.0, th, s.gp), ConfigurationError);
}

TEST(SourceTerms, VacuumLayerIsZero) {
  const Fixture s = setup(5);
  const Layer l = constant_layer(s, {}, 1);
  const auto st = source_terms(l, builtin_forcing("sin_xt", 0.3), s.gp);
  for (std::size_t k = 0; k < l.size(); ++k) {
    EXPECT_EQ(st.R[k], 0.0);
    EXPECT_EQ(st.S[k], 0.0);
    EXPECT_EQ(st.G[k], 0.0);
    EXPECT_EQ(st.H[k], 0.0);
    EXPECT_EQ(st.xi[k], 0.0);
  }
}

TEST(SourceTerms, ConstantStateTermwise) {
  const Fixture s = setup(5);
  const ConservedState u{1.2, 0.3};
  const Layer l = constant_layer(s, u, 0);
  const auto st = source_terms(l, Forcing{}, s.gp);
  const double rho = u.rho, v = u.m / u.rho, c = std::pow(rho, s.gp.theta);
  const double G = -s.gp.K * (v - c) + std::pow(rho, 1.6) / 0.56 + std::pow(rho, 1.4) * v / 1.4 +
                   std::pow(rho, 1.2) * v * v / 2 - s.gp.alpha_zeta * std::pow(rho, 1.2);
  const double H = -s.gp.K * (v + c) - (G + s.gp.K * (v - c));
  const double coef = s.grid.dt * s.grid.dt / (8 * s.grid.dx);
  for (std::size_t k = 0; k < l.size(); ++k) {
    EXPECT_NEAR(st.G[k], G, 1e-12);
    EXPECT_NEAR(st.H[k], H, 1e-12);
    EXPECT_NEAR(st.R[k], coef * (rho * (G + H) + u.m / c * (H - G)), 1e-15);
  }
}

TEST(SourceTerms, MomentMatchesDirectSum) {
  const Fixture s = setup(6);
  std::mt19937_64 rng(1);
  Layer l = random_layer(s, 0, rng);
  l.level = 0;
  const Forcing f = builtin_forcing("sin_xt", 0.7);
  const double t = 0.3;
  Layer lt = l;
  // evaluate at a level with t_n != 0 and the same parity
  lt.level = 2 * static_cast<int>(std::round(t / (2 * s.grid.dt)));
  const auto st = source_terms(lt, f, s.gp);
  const double tn = s.grid.t(lt.level);
  const double dx = s.grid.dx, dt = s.grid.dt;
  auto flux = [&](const ConservedState& u) { return u.m * u.m / u.rho + std::pow(u.rho, 1.4) / 1.4; };
  for (std::size_t k = 0; k < l.size(); ++k) {
    const int j = l.node(k);
    double moment = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const auto& a = l.values[i];
      const auto& b = l.values[i + 1];
      const double xi = (b.m + a.m) * dx - 2 * dt / 3 * (flux(b) - flux(a));
      if (i + 1 < l.size()) {
        EXPECT_NEAR(st.xi[i], xi, 1e-15);
      }
      moment += f(s.grid.x(l.node(i) + 1), tn) * xi;
    }
    const auto g = g_source(l.values[k], f(s.grid.x(j), tn), moment, s.gp);
    EXPECT_NEAR(st.G[k], g.g1, 1e-12);
    EXPECT_NEAR(st.H[k], g.g2, 1e-12);
  }
}

TEST(Step, EquilibriumPreserved) {
  const Fixture s = setup(25);
  Layer l = constant_layer(s, {1.0, 0.0});
  for (int n = 0; n < 6; ++n) {
    l = step(l, Forcing{}, s.gp);
    for (const auto& u : l.values) {
      EXPECT_NEAR(u.rho, 1.0, 1e-14);
      EXPECT_NEAR(u.m, 0.0, 1e-14);
    }
  }
}

TEST(Step, VacuumStaysVacuum) {
  const Fixture s = setup(5);
  Layer l = constant_layer(s, {});
  for (int n = 0; n < 4; ++n) {
    l = step(l, Forcing{}, s.gp);
    for (const auto& u : l.values) EXPECT_TRUE(u.is_vacuum());
  }
}

TEST(Step, OutputNodesAlternate) {
  const Fixture s = setup(4);
  Layer l = constant_layer(s, {1.0, 0.0});
  for (int n = 0; n < 3; ++n) {
    l = step(l, Forcing{}, s.gp);
    EXPECT_EQ(l.level, n + 1);
    EXPECT_EQ(static_cast<int>(l.size()), s.grid.node_count(n + 1));
    EXPECT_EQ(l.node(0), Grid::first_node(n + 1));
  }
}

TEST(Step, MatchesThreeCellOracle) {
  const Fixture s = setup(3, 5.0);
  std::mt19937_64 rng(42);
  const Forcing f = builtin_forcing("sin_xt", 0.8);
  for (int trial = 0; trial < 40; ++trial) {
    const int level = trial % 4;
    const Layer l = random_layer(s, level, rng);
    const Layer next = step(l, f, s.gp, raw());

    std::vector<ConservedState> by_node(static_cast<std::size_t>(s.grid.last_node() + 1));
    for (std::size_t k = 0; k < l.size(); ++k) by_node[static_cast<std::size_t>(l.node(k))] = l.values[k];
    const oracle::Params p{s.gp.gamma, s.gp.K, s.gp.alpha_zeta, s.grid.dx, s.grid.dt};
    const auto want = oracle::step(by_node, level, s.grid.t(level), [&](double x, double t) { return f(x, t); }, p);
    for (std::size_t k = 0; k < next.size(); ++k) {
      const auto& w = want[static_cast<std::size_t>(next.node(k))];
      EXPECT_NEAR(next.values[k].rho, w.rho, 1e-14 * std::max(1.0, std::abs(w.rho)));
      EXPECT_NEAR(next.values[k].m, w.m, 1e-14 * std::max(1.0, std::abs(w.m)));
    }
  }
}

TEST(Step, MassTelescopesWithoutCutoff) {
  const Fixture s = setup(16);
  std::mt19937_64 rng(8);
  Layer l = random_layer(s, 0, rng);
  const double m0 = mass_energy(l, s.gp).mass;
  const Forcing f = builtin_forcing("sin_xt", 0.05);
  for (int n = 0; n < 20; ++n) {
    l = step(l, f, s.gp, raw());
    EXPECT_NEAR(mass_energy(l, s.gp).mass, m0, 1e-13 * m0);
  }
}

TEST(Step, BandHoldsAfterCutoff) {
  const Fixture s = setup(12);
  Layer l = init_layer(
      [](double x) { return ConservedState{1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * x), 0.0}; },
      s.grid, s.gp);
  const Forcing f = builtin_forcing("sin_t", 2.0);
  for (int n = 0; n < 60; ++n) {
    l = step(l, f, s.gp);
    const BandReport b = band_check(l, l.l_band, s.gp);
    ASSERT_EQ(b.violations, 0) << "level " << l.level;
  }
}

TEST(Step, EnergyNonIncreasingWithoutForcing) {
  const Fixture s = setup(25);
  Layer l = init_layer(
      [](double x) {
        const double rho = 1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * x);
        return ConservedState{rho, 0.2 * rho * std::sin(std::numbers::pi * x)};
      },
      s.grid, s.gp);
  double e = mass_energy(l, s.gp).energy;
  for (int n = 0; n < s.grid.period_steps(); ++n) {
    l = step(l, Forcing{}, s.gp);
    const double next = mass_energy(l, s.gp).energy;
    ASSERT_LE(next, e + 1e-12) << "level " << l.level;
    e = next;
  }
}

TEST(Step, InstabilityCarriesCflDiagnostic) {
  const Fixture s = setup(10);
  Layer l = constant_layer(s, {1.0, 0.0});
  const Forcing f = builtin_forcing("sin_t", 1e6);
  try {
    for (int n = 0; n < s.grid.period_steps(); ++n) l = step(l, f, s.gp, raw());
    FAIL() << "expected an instability";
  } catch (const InstabilityError& e) {
    EXPECT_NE(std::string(e.what()).find("CFL"), std::string::npos);
  }
}

TEST(RunPeriod, EquilibriumDrift) {
  const Fixture s = setup(25);
  const Layer l0 = constant_layer(s, {1.0, 0.0});
  const PeriodResult r = run_period(l0, Forcing{}, s.gp);
  EXPECT_EQ(r.final_layer.level, s.grid.period_steps());
  EXPECT_EQ(r.trace.size(), static_cast<std::size_t>(s.grid.period_steps() + 1));
  for (std::size_t k = 0; k < l0.size(); ++k) {
    EXPECT_NEAR(r.final_layer.values[k].rho, 1.0, 1e-12);
    EXPECT_NEAR(r.final_layer.values[k].m, 0.0, 1e-12);
  }
}

TEST(RunPeriod, Guards) {
  const Fixture s = setup(4);
  EXPECT_THROW(run_period(constant_layer(s, {1.0, 0.0}, 1), Forcing{}, s.gp), ConfigurationError);
  Layer l0 = constant_layer(s, {1.0, 0.0});
  l0.grid.n_t = 0;
  EXPECT_THROW(run_period(l0, Forcing{}, s.gp), ConfigurationError);
}

TEST(RunPeriod, SmallForcingConservesMass) {
  const Fixture s = setup(25);
  const Layer l0 = constant_layer(s, {1.0, 0.0});
  const PeriodResult r = run_period(l0, builtin_forcing("sin_t", 0.01), s.gp);
  EXPECT_NEAR(mass_energy(r.final_layer, s.gp).mass, 1.0, 1e-10);
}
