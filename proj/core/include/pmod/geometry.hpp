#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

namespace pmod {

/// Euclidean point in R^n. The dimension is data, not a template
/// parameter, so one binary handles n = 2..5.
using Point = Eigen::VectorXd;

Point make_point(std::initializer_list<double> coords);

/// Point of the one-point compactification R^n + {inf}.
struct ExtendedPoint {
  std::optional<Point> p;  // empty = the point at infinity

  ExtendedPoint() = default;
  ExtendedPoint(Point pt) : p(std::move(pt)) {}
  static ExtendedPoint infinity() { return ExtendedPoint{}; }
  bool is_infinity() const { return !p.has_value(); }
};

struct Ball {
  Point center;
  double radius;  // > 0
};

struct Sphere {
  Point center;
  double radius;  // > 0
};

/// Open spherical shell r1 < |x - center| < r2.
struct Ring {
  Point center;
  double r1;
  double r2;  // 0 < r1 < r2
};

double euclid_dist(const Point& a, const Point& b);

/// Chordal distance on R^n + {inf}; always in [0, 1].
double spherical_dist(const ExtendedPoint& a, const ExtendedPoint& b);

double spherical_diameter(std::span<const ExtendedPoint> set);
double spherical_diameter(std::span<const Point> set);

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// Surface area of the unit sphere S^{n-1} in R^n (n * unit_ball_volume(n)).
double sphere_surface_area(int n);

struct SphereCrossing {
  int segment;  // index of the polyline segment
  double t;     // parameter in [0, 1] along that segment
};

/// Transversal crossings of a polyline with a sphere: parameters where the
/// distance-to-center function crosses the radius. Tangential touches that
/// do not change side are not reported.
std::vector<SphereCrossing> sphere_crossings(std::span<const Point> polyline,
                                             const Sphere& s);

}  // namespace pmod
