#include <doctest.h>

#include <cmath>

#include "pmod/bounds.hpp"

using namespace pmod;

TEST_CASE("ring_lower_bound formula") {
  const double beta = 0.37;
  BoundParams params{2, 1.5, beta, 1.0};
  // 2^2 beta / 0.5 * (4^0.5 - 1) = 8 beta
  CHECK(ring_lower_bound(params, 1.0, 4.0) == doctest::Approx(8.0 * beta));

  SUBCASE("p = n uses the log limit") {
    params.p = 2.0;
    CHECK(ring_lower_bound(params, 1.0, std::exp(1.0)) ==
          doctest::Approx(4.0 * beta));
  }
  SUBCASE("degenerate ring vanishes") {
    CHECK(ring_lower_bound(params, 1.0, 1.0 + 1e-9) ==
          doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("monotone in both radii") {
    double prev = 0.0;
    for (double b : {1.5, 2.0, 3.0, 4.5}) {
      const double v = ring_lower_bound(params, 1.0, b);
      CHECK(v > prev);
      prev = v;
    }
    CHECK(ring_lower_bound(params, 1.2, 4.0) <
          ring_lower_bound(params, 1.0, 4.0));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(ring_lower_bound(params, 4.0, 1.0), std::invalid_argument);
    params.p = 0.9;  // <= n - 1
    CHECK_THROWS_AS(ring_lower_bound(params, 1.0, 4.0), std::invalid_argument);
  }
}

TEST_CASE("ring_lower_bound continuity at p = n") {
  for (int n : {2, 3}) {
    const BoundParams at{n, static_cast<double>(n), 1.0, 1.0};
    const BoundParams lo{n, n - 1e-4, 1.0, 1.0};
    const BoundParams hi{n, n + 1e-4, 1.0, 1.0};
    const double mid = ring_lower_bound(at, 1.0, 3.0);
    CHECK(std::abs(ring_lower_bound(lo, 1.0, 3.0) - mid) < 1e-3);
    CHECK(std::abs(ring_lower_bound(hi, 1.0, 3.0) - mid) < 1e-3);
    const BoundParams tight_lo{n, n - 1e-9, 1.0, 1.0};
    CHECK(std::abs(ring_lower_bound(tight_lo, 1.0, 3.0) - mid) < 1e-8);
  }
}

TEST_CASE("theorem1_bound") {
  const double beta = 1.3;
  BoundParams params{2, 1.5, beta, 1.0};
  CHECK(theorem1_bound(params, 1.0) ==
        doctest::Approx(ring_lower_bound(params, 1.0, 2.0)));

  params.K_np = 2.0;
  // (1/2) * 8 beta (sqrt(2) - 1)
  CHECK(theorem1_bound(params, 1.0) ==
        doctest::Approx(4.0 * beta * (std::sqrt(2.0) - 1.0)));

  SUBCASE("doubling K halves the bound") {
    BoundParams twice = params;
    twice.K_np = 4.0;
    CHECK(theorem1_bound(twice, 1.0) ==
          doctest::Approx(0.5 * theorem1_bound(params, 1.0)));
  }
  SUBCASE("positivity for a sweep of radii") {
    for (double r : {1e-3, 0.1, 1.0, 10.0})
      CHECK(theorem1_bound(params, r) > 0.0);
  }
  CHECK_THROWS_AS(theorem1_bound(params, 0.0), std::invalid_argument);
}

TEST_CASE("choose_r") {
  const Domain D = Domain::box(make_point({-20, -20}), make_point({20, 20}));
  const Grid g = Grid::cover(D.bounding_box(), 1.0);

  SUBCASE("continuum diameter term") {
    // segments at distance 4, A* of diameter 10, deep inside the box
    std::vector<Point> A{make_point({0.0, 0.0}), make_point({0.0, 2.0})};
    std::vector<Point> A_star;
    for (int i = 0; i <= 10; ++i)
      A_star.push_back(make_point({4.0, static_cast<double>(i) - 4.0}));
    const double r = choose_r(A, A_star, D, g);
    CHECK(r == doctest::Approx(2.0).epsilon(0.2));
  }
  SUBCASE("boundary term governs") {
    std::vector<Point> A{make_point({-10.0, 0.0})};
    std::vector<Point> A_star;
    for (int i = 0; i <= 10; ++i)
      A_star.push_back(make_point({0.0, 19.0 - i}));
    // d(A, A*) = 10 at best, A* touches the boundary at distance about 1
    const double r = choose_r(A, A_star, D, g);
    CHECK(r < 1.0);
  }
  SUBCASE("intersecting continua rejected") {
    std::vector<Point> A{make_point({0.0, 0.0})};
    std::vector<Point> B{make_point({0.0, 0.0}), make_point({1.0, 0.0})};
    CHECK_THROWS_AS(choose_r(A, B, D, g), std::invalid_argument);
  }
  SUBCASE("degenerate continuum rejected") {
    std::vector<Point> A{make_point({5.0, 5.0})};
    std::vector<Point> B{make_point({0.0, 0.0})};
    CHECK_THROWS_AS(choose_r(A, B, D, g), std::invalid_argument);
  }
}

TEST_CASE("delta_star") {
  BoundParams params{2, 2.0, 1.0, 1.0};
  const std::vector<double> deltas{1.0, 1.0, 1.0, 1.0};

  const double ring1 = ring_lower_bound(params, 1.0, 2.0);
  const double ring2 = ring_lower_bound(params, 2.0, 4.0);
  const double expect =
      std::pow(3.0, -2.0) * std::min({1.0 / 4.0, 1.0, ring1, ring2});
  CHECK(delta_star(1.0, 4, deltas, 1.0, params) == doctest::Approx(expect));

  SUBCASE("huge delta leaves the ring terms in charge") {
    const std::vector<double> big{100.0};
    const double v = delta_star(1e9, 1, big, 0.1, params);
    const double r1 = ring_lower_bound(params, 0.1, 0.2);
    const double r2 = ring_lower_bound(params, 0.2, 0.4);
    CHECK(v == doctest::Approx(std::pow(3.0, -2.0) * std::min(r1, r2)));
  }
  SUBCASE("nonpositive inputs rejected") {
    CHECK_THROWS_AS(delta_star(0.0, 4, deltas, 1.0, params),
                    std::invalid_argument);
    const std::vector<double> bad{1.0, -1.0};
    CHECK_THROWS_AS(delta_star(1.0, 2, bad, 1.0, params),
                    std::invalid_argument);
  }
}

TEST_CASE("cylinder_exact") {
  CHECK(cylinder_exact(1.0, 1.0, 2.0) == doctest::Approx(1.0));
  CHECK(cylinder_exact(1.0, 2.0, 2.0) == doctest::Approx(0.5));
  CHECK(cylinder_exact(3.0, 1.0, 3.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(cylinder_exact(0.0, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("spherical_ring_exact") {
  CHECK(spherical_ring_exact(2, 2.0, 1.0, std::exp(1.0)) ==
        doctest::Approx(6.283185307179586));
  CHECK(spherical_ring_exact(3, 3.0, 1.0, std::exp(1.0)) ==
        doctest::Approx(12.566370614359172));
  SUBCASE("degenerating ring blows up") {
    CHECK(spherical_ring_exact(2, 2.0, 1.0, 1.0 + 1e-9) > 1e8);
  }
  SUBCASE("p = 1.5 closed form in the plane") {
    // integral of t^{-2} from 1 to 2 is 1/2; omega_1 (1/2)^{-1/2}
    CHECK(spherical_ring_exact(2, 1.5, 1.0, 2.0) ==
          doctest::Approx(2.0 * 3.141592653589793 * std::sqrt(2.0)));
  }
}

TEST_CASE("calibrated ring constant stays below the exact modulus") {
  for (int n : {2, 3}) {
    for (double p : {n - 0.5, static_cast<double>(n)}) {
      const double b_np = calibrate_b_np(n, p);
      CHECK(b_np > 0.0);
      CHECK(b_np <= 1.0);
      BoundParams params{n, p, b_np, 1.0};
      for (double a : {0.5, 1.0, 2.0})
        for (double q : {1.5, 2.0, 4.0})
          CHECK(ring_lower_bound(params, a, a * q) <=
                spherical_ring_exact(n, p, a, a * q) * (1.0 + 1e-9));
    }
  }
}
