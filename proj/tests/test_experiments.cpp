#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pmod/experiments.hpp"

using namespace pmod;

namespace {

AccessibilityScenario disc_scenario() {
  const Point x0 = make_point({1.0, 0.0});
  return AccessibilityScenario{Domain::ball(make_point({0.0, 0.0}), 1.0), x0,
                               Domain::ball(x0, 0.6), Domain::ball(x0, 0.3),
                               Domain::ball(make_point({-0.3, 0.0}), 0.3)};
}

CellMask disc_mask(const AccessibilityScenario& s, double h) {
  return rasterize(s.D, Grid::cover(s.D.bounding_box(), h, 1));
}

CombParams small_comb() {
  CombParams comb;
  comb.base = Box{make_point({0.0, 0.0}), make_point({1.0, 1.0})};
  comb.teeth_count = 3;
  comb.slit_height = 0.5;
  comb.width = 0.5;
  // wide enough for a 1/64 grid to resolve every tooth
  comb.halfwidths = {0.06, 0.035, 0.022};
  return comb;
}

}  // namespace

TEST_CASE("generate_F_sets produces connected in-domain continua") {
  const AccessibilityScenario s = disc_scenario();
  const CellMask mask = disc_mask(s, 1.0 / 16);
  const auto F_sets = generate_F_sets(s, mask, 8, 2);
  CHECK(F_sets.size() >= 4);
  for (const auto& F : F_sets) {
    CHECK(!F.empty());
    for (long c : F) CHECK(mask.test(c));
    GridGraph graph(mask);
    const long probe[] = {F.front()};
    CHECK(reachable(graph, probe, F));
  }
}

TEST_CASE("estimate_delta on the unit disc") {
  const AccessibilityScenario s = disc_scenario();
  const CellMask mask = disc_mask(s, 1.0 / 16);
  SolverOptions opts;
  const ProbeResult res = estimate_delta(s, 2.0, mask, opts, 6, 3);
  CHECK(res.generated > 0);
  CHECK(!res.moduli.empty());
  CHECK(res.delta > 0.0);
  for (double m : res.moduli) CHECK(m >= res.delta);
  CHECK(res.all_converged);
}

TEST_CASE("scenario validation") {
  AccessibilityScenario s = disc_scenario();
  const CellMask mask = disc_mask(s, 1.0 / 16);
  SUBCASE("V must sit inside U") {
    std::swap(s.U, s.V);
    SolverOptions opts;
    CHECK_THROWS_AS(estimate_delta(s, 2.0, mask, opts, 4), std::invalid_argument);
  }
  SUBCASE("x0 must touch the domain") {
    s.x0 = make_point({3.0, 0.0});
    SolverOptions opts;
    CHECK_THROWS_AS(estimate_delta(s, 2.0, mask, opts, 4), std::invalid_argument);
  }
}

TEST_CASE("continuum_swap_check rejects overlapping continua") {
  const AccessibilityScenario s = disc_scenario();
  const CellMask mask = disc_mask(s, 1.0 / 16);
  SolverOptions opts;
  CHECK_THROWS_AS(continuum_swap_check(s, s.E, 2.0, mask, opts, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(continuum_swap_check(s, s.E, 0.9, mask, opts, 4),
                  std::invalid_argument);
}

TEST_CASE("continuum_swap_check report structure") {
  AccessibilityScenario s = disc_scenario();
  s.E = Domain::ball(make_point({-0.4, 0.0}), 0.2);
  const CellMask mask = disc_mask(s, 1.0 / 12);
  SolverOptions opts;
  const Domain E_star = Domain::ball(make_point({0.1, 0.45}), 0.18);
  const SwapReport rep = continuum_swap_check(s, E_star, 2.0, mask, opts, 4, 5);
  CHECK(rep.r > 0.0);
  CHECK(rep.q >= 1);
  CHECK(static_cast<int>(rep.delta_i.size()) == rep.q);
  CHECK(rep.delta > 0.0);
  CHECK(rep.ring_r > 0.0);
  CHECK(rep.ring_2r > 0.0);
  CHECK(rep.delta_star > 0.0);
  CHECK(rep.delta_star <= std::pow(3.0, -2.0) * rep.delta / rep.q * (1 + 1e-9));
  CHECK(std::isfinite(rep.empirical_min));
}

TEST_CASE("uniformity_probe") {
  const Domain D = Domain::box(make_point({0, 0}), make_point({1, 1}));
  const CellMask mask = rasterize(D, Grid::cover(D.bounding_box(), 1.0 / 16));
  SolverOptions opts;
  CHECK_THROWS_AS(uniformity_probe(D, 2.0, 1.5, mask, opts, 2),
                  std::invalid_argument);
  const UniformityReport rep = uniformity_probe(D, 2.0, 0.25, mask, opts, 3, 7);
  CHECK(rep.pairs == 3);
  CHECK(rep.delta > 0.0);
  CHECK(std::isfinite(rep.delta));
}

TEST_CASE("vanishing_modulus_probe on a small comb") {
  const CombParams comb = small_comb();
  const Domain D = Domain::comb(comb);
  const CellMask mask = rasterize(D, Grid::cover(comb.base, 1.0 / 64));
  const Point x0 = make_point({0.0, 0.0});
  const Domain F =
      Domain::box(make_point({0.7, 0.0}), make_point({1.0, 1.0}));
  SolverOptions opts;
  opts.admissibility_tol = 5e-3;
  const std::vector<int> ks{2, 3};
  const VanishingReport rep =
      vanishing_modulus_probe(comb, x0, 0.3, 0.45, F, 2.0, mask, opts, ks);
  REQUIRE(rep.entries.size() == 2);
  for (const auto& e : rep.entries) {
    CHECK(e.measure > 0.0);
    CHECK(e.measure_small);
    CHECK(e.bound == doctest::Approx(e.measure / std::pow(0.15, 2.0)));
    CHECK(e.density_admissible);
    CHECK(e.converged);
    CHECK(e.solver_value > 0.0);
  }
  CHECK(rep.entries[1].measure < rep.entries[0].measure);
  CHECK(rep.bound_monotone);
  CHECK(rep.solver_below_bound);

  SUBCASE("csv trend") {
    std::ostringstream os;
    write_trend_csv(os, rep);
    const std::string out = os.str();
    CHECK(out.rfind("k,measure,bound,solver_value\n", 0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 3);
  }
}

TEST_CASE("vanishing_modulus_probe input validation") {
  const CombParams comb = small_comb();
  const Domain D = Domain::comb(comb);
  const CellMask mask = rasterize(D, Grid::cover(comb.base, 1.0 / 64));
  const Point x0 = make_point({0.0, 0.0});
  const Domain F = Domain::box(make_point({0.7, 0.0}), make_point({1.0, 1.0}));
  SolverOptions opts;
  const std::vector<int> ks{2};
  CHECK_THROWS_AS(
      vanishing_modulus_probe(comb, x0, 0.5, 0.45, F, 2.0, mask, opts, ks),
      std::invalid_argument);
  const Domain F_close =
      Domain::box(make_point({0.0, 0.0}), make_point({1.0, 1.0}));
  CHECK_THROWS_AS(
      vanishing_modulus_probe(comb, x0, 0.3, 0.45, F_close, 2.0, mask, opts, ks),
      std::invalid_argument);
}
