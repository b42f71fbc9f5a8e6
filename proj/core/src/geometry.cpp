#include "pmod/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace pmod {

Point make_point(std::initializer_list<double> coords) {
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p[i++] = c;
  return p;
}

double euclid_dist(const Point& a, const Point& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("euclid_dist: dimension mismatch");
  return (a - b).norm();
}

double spherical_dist(const ExtendedPoint& a, const ExtendedPoint& b) {
  if (a.is_infinity() && b.is_infinity()) return 0.0;
  if (a.is_infinity() || b.is_infinity()) {
    const Point& x = a.is_infinity() ? *b.p : *a.p;
    return 1.0 / std::sqrt(1.0 + x.squaredNorm());
  }
  const Point& x = *a.p;
  const Point& y = *b.p;
  if (x.size() != y.size())
    throw std::invalid_argument("spherical_dist: dimension mismatch");
  return (x - y).norm() /
         (std::sqrt(1.0 + x.squaredNorm()) * std::sqrt(1.0 + y.squaredNorm()));
}

double spherical_diameter(std::span<const ExtendedPoint> set) {
  if (set.empty())
    throw std::invalid_argument("spherical_diameter: empty set");
  double d = 0.0;
  for (size_t i = 0; i < set.size(); ++i)
    for (size_t j = i + 1; j < set.size(); ++j)
      d = std::max(d, spherical_dist(set[i], set[j]));
  return d;
}

double spherical_diameter(std::span<const Point> set) {
  if (set.empty())
    throw std::invalid_argument("spherical_diameter: empty set");
  double d = 0.0;
  for (size_t i = 0; i < set.size(); ++i)
    for (size_t j = i + 1; j < set.size(); ++j)
      d = std::max(d, spherical_dist(ExtendedPoint(set[i]),
                                     ExtendedPoint(set[j])));
  return d;
}

double unit_ball_volume(int n) {
  if (n < 1) throw std::invalid_argument("unit_ball_volume: n < 1");
  return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

double sphere_surface_area(int n) {
  if (n < 1) throw std::invalid_argument("sphere_surface_area: n < 1");
  return n * unit_ball_volume(n);
}

std::vector<SphereCrossing> sphere_crossings(std::span<const Point> polyline,
                                             const Sphere& s) {
  if (polyline.size() < 2)
    throw std::invalid_argument("sphere_crossings: need >= 2 vertices");
  std::vector<SphereCrossing> out;
  const double r2 = s.radius * s.radius;
  for (size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Point a = polyline[i] - s.center;
    const Point b = polyline[i + 1] - s.center;
    const Point d = b - a;
    // |a + t d|^2 = r^2
    const double A = d.squaredNorm();
    const double B = 2.0 * a.dot(d);
    const double C = a.squaredNorm() - r2;
    if (A == 0.0) continue;  // degenerate segment
    double disc = B * B - 4.0 * A * C;
    if (disc < -1e-12 * std::max(1.0, B * B)) continue;
    if (disc < 0.0) disc = 0.0;
    const double sq = std::sqrt(disc);
    for (double root : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)}) {
      if (root < 0.0 || root > 1.0) continue;
      // transversal only: the squared-distance function must change sign;
      // a tangent touch leaves it nonnegative on both sides
      const double tb = std::max(0.0, root - 1e-6);
      const double ta = std::min(1.0, root + 1e-6);
      const double before = C + B * tb + A * tb * tb;
      const double after = C + B * ta + A * ta * ta;
      if (!(before * after < 0.0)) continue;
      if (!out.empty() && out.back().segment == static_cast<int>(i) &&
          std::abs(out.back().t - root) < 1e-12)
        continue;
      out.push_back({static_cast<int>(i), root});
    }
  }
  return out;
}

}  // namespace pmod
