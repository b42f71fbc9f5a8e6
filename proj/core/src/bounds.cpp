#include "pmod/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pmod/geometry.hpp"

namespace pmod {

namespace {

// (b^(n-p) - a^(n-p)) / (n - p), continued across p = n by ln(b/a).
// Written with expm1 so the cancellation near p = n stays benign.
double ring_kernel(int n, double p, double a, double b) {
  const double e = n - p;
  const double lr = std::log(b / a);
  if (e == 0.0) return lr;
  return std::pow(a, e) * std::expm1(e * lr) / e;
}

}  // namespace

double ring_lower_bound(const BoundParams& params, double a, double b) {
  if (!(0.0 < a && a < b))
    throw std::invalid_argument("ring_lower_bound: need 0 < a < b");
  if (params.b_np <= 0.0)
    throw std::invalid_argument("ring_lower_bound: b_np <= 0");
  // stated range is (n-1, n); p = n (and a neighborhood, for continuity
  // checks) is served by the same kernel via its log limit
  if (params.p <= params.n - 1)
    throw std::invalid_argument("ring_lower_bound: outside Prop. 2.1 range");
  return std::pow(2.0, params.n) * params.b_np *
         ring_kernel(params.n, params.p, a, b);
}

double theorem1_bound(const BoundParams& params, double r) {
  if (r <= 0.0) throw std::invalid_argument("theorem1_bound: r <= 0");
  if (params.K_np < 1.0)
    throw std::invalid_argument("theorem1_bound: K_np < 1");
  return ring_lower_bound(params, r, 2.0 * r) / params.K_np;
}

double choose_r(std::span<const Point> A, std::span<const Point> A_star,
                const Domain& D, const Grid& grid) {
  if (A.empty() || A_star.empty())
    throw std::invalid_argument("choose_r: empty point set");
  double d_AA = std::numeric_limits<double>::infinity();
  Point a_star;
  for (const Point& x : A)
    for (const Point& y : A_star) {
      const double d = euclid_dist(x, y);
      if (d < d_AA) {
        d_AA = d;
        a_star = y;
      }
    }
  if (d_AA == 0.0)
    throw std::invalid_argument("choose_r: A and A* intersect");
  double d_max = 0.0;
  for (const Point& y : A_star) d_max = std::max(d_max, euclid_dist(y, a_star));
  if (d_max == 0.0)
    throw std::invalid_argument("choose_r: degenerate continuum");
  // boundary of D via the rasterized mask
  CellMask mask = rasterize(D, grid);
  CellMask bnd = boundary_cells(mask);
  double d_bd = std::numeric_limits<double>::infinity();
  const long nc = grid.cell_count();
  for (long idx = 0; idx < nc; ++idx) {
    if (!bnd.test(idx)) continue;
    const Point c = grid.cell_center(idx);
    for (const Point& y : A_star) d_bd = std::min(d_bd, euclid_dist(y, c));
  }
  return 0.5 * std::min({d_AA, d_bd, d_max});
}

double delta_star(double delta, int q, std::span<const double> deltas,
                  double r, const BoundParams& params) {
  if (delta <= 0.0 || q < 1 || r <= 0.0)
    throw std::invalid_argument("delta_star: nonpositive input");
  double m = delta / q;
  for (double d : deltas) {
    if (d <= 0.0) throw std::invalid_argument("delta_star: nonpositive delta_i");
    m = std::min(m, d);
  }
  m = std::min(m, ring_lower_bound(params, r, 2.0 * r));
  m = std::min(m, ring_lower_bound(params, 2.0 * r, 4.0 * r));
  return std::pow(3.0, -params.p) * m;
}

double cylinder_exact(double cross_section_measure, double L, double p) {
  if (cross_section_measure <= 0.0 || L <= 0.0)
    throw std::invalid_argument("cylinder_exact: nonpositive input");
  return cross_section_measure * std::pow(L, 1.0 - p);
}

double spherical_ring_exact(int n, double p, double a, double b) {
  if (!(0.0 < a && a < b))
    throw std::invalid_argument("spherical_ring_exact: need 0 < a < b");
  if (!(p > 1.0)) throw std::invalid_argument("spherical_ring_exact: p <= 1");
  const double expo = (1.0 - n) / (p - 1.0);
  double integral;
  if (std::abs(expo + 1.0) < 1e-12) {
    integral = std::log(b / a);
  } else {
    integral = (std::pow(b, expo + 1.0) - std::pow(a, expo + 1.0)) / (expo + 1.0);
  }
  return sphere_surface_area(n) * std::pow(integral, 1.0 - p);
}

double calibrate_b_np(int n, double p) {
  BoundParams unit{n, p, 1.0, 1.0};
  double best = 1.0;
  for (double a : {0.5, 1.0, 2.0, 4.0}) {
    for (double q : {1.25, 1.5, 2.0, 4.0, 8.0}) {
      const double b = a * q;
      const double cap = spherical_ring_exact(n, p, a, b) /
                         ring_lower_bound(unit, a, b);
      best = std::min(best, cap);
    }
  }
  return best;
}

}  // namespace pmod
