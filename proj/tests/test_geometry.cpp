#include <doctest.h>

#include <cmath>

#include "pmod/geometry.hpp"

using namespace pmod;

TEST_CASE("euclid_dist") {
  CHECK(euclid_dist(make_point({0, 0}), make_point({3, 4})) == doctest::Approx(5.0));
  CHECK(euclid_dist(make_point({1, 2, 3}), make_point({1, 2, 3})) == 0.0);
  CHECK_THROWS_AS(euclid_dist(make_point({0, 0}), make_point({0, 0, 0})),
                  std::invalid_argument);
}

TEST_CASE("spherical distance") {
  const ExtendedPoint origin{make_point({0.0, 0.0})};
  const ExtendedPoint e1{make_point({1.0, 0.0})};
  const ExtendedPoint inf = ExtendedPoint::infinity();

  CHECK(spherical_dist(origin, inf) == doctest::Approx(1.0));
  CHECK(spherical_dist(e1, inf) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(spherical_dist(origin, e1) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(spherical_dist(inf, inf) == 0.0);
  CHECK(spherical_dist(origin, origin) == 0.0);

  SUBCASE("symmetry and unit bound on samples") {
    for (int i = 0; i < 50; ++i) {
      const double a = -3.0 + 0.13 * i, b = 2.0 - 0.09 * i;
      const ExtendedPoint x{make_point({a, b})};
      const ExtendedPoint y{make_point({b, -a})};
      CHECK(spherical_dist(x, y) == doctest::Approx(spherical_dist(y, x)));
      CHECK(spherical_dist(x, y) <= 1.0 + 1e-12);
      CHECK(spherical_dist(x, inf) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("spherical_diameter") {
  const std::vector<ExtendedPoint> pair{ExtendedPoint{make_point({0.0, 0.0})},
                                        ExtendedPoint::infinity()};
  CHECK(spherical_diameter(pair) == doctest::Approx(1.0));

  const std::vector<Point> segment{make_point({0.0, 0.0}),
                                   make_point({0.5, 0.0}),
                                   make_point({1.0, 0.0})};
  CHECK(spherical_diameter(segment) == doctest::Approx(1.0 / std::sqrt(2.0)));

  CHECK_THROWS_AS(spherical_diameter(std::span<const Point>{}),
                  std::invalid_argument);
}

TEST_CASE("unit ball volume and sphere area") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(3.141592653589793));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.1887902047863905));
  CHECK(sphere_surface_area(2) == doctest::Approx(6.283185307179586));
  CHECK(sphere_surface_area(3) == doctest::Approx(12.566370614359172));
  CHECK_THROWS_AS(unit_ball_volume(0), std::invalid_argument);
}

TEST_CASE("sphere_crossings") {
  const Sphere unit{make_point({0.0, 0.0}), 1.0};

  SUBCASE("transversal crossing") {
    const std::vector<Point> line{make_point({0.0, 0.0}), make_point({2.0, 0.0})};
    auto xs = sphere_crossings(line, unit);
    REQUIRE(xs.size() == 1);
    CHECK(xs[0].segment == 0);
    CHECK(xs[0].t == doctest::Approx(0.5));
  }
  SUBCASE("chord in and out") {
    const std::vector<Point> line{make_point({-2.0, 0.0}), make_point({2.0, 0.0})};
    auto xs = sphere_crossings(line, unit);
    CHECK(xs.size() == 2);
  }
  SUBCASE("tangent line does not cross") {
    const std::vector<Point> line{make_point({-2.0, 1.0}), make_point({2.0, 1.0})};
    CHECK(sphere_crossings(line, unit).empty());
  }
  SUBCASE("interior polyline") {
    const std::vector<Point> line{make_point({-0.5, 0.0}), make_point({0.5, 0.2})};
    CHECK(sphere_crossings(line, unit).empty());
  }
}
