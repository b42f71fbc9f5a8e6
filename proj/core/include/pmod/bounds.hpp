#pragma once

#include <span>
#include <vector>

#include "pmod/grid.hpp"

namespace pmod {

struct BoundParams {
  int n = 2;           // dimension, >= 2
  double p = 2.0;      // exponent
  double b_np = 1.0;   // ring-bound constant, configurable (> 0)
  double K_np = 1.0;   // quasi-invariance constant (>= 1)
};

/// Lower bound for the modulus of a family crossing the ring a < |x| < b:
/// 2^n b_np / (n - p) * (b^(n-p) - a^(n-p)), with the p = n limit
/// 2^n b_np ln(b/a). Valid for p in (n-1, n].
double ring_lower_bound(const BoundParams& params, double a, double b);

/// Final positivity bound: ring_lower_bound(r, 2r) / K_np.
double theorem1_bound(const BoundParams& params, double r);

/// Radius r = (1/2) min{ d(A, A*), d(A*, boundary D), max_{x in A*} d(x, a*) }
/// where a* in A* realizes d(A, A*). The boundary of D is sampled from the
/// rasterized mask's boundary cells.
double choose_r(std::span<const Point> A, std::span<const Point> A_star,
                const Domain& D, const Grid& grid);

/// 3^(-p) min{ delta/q, delta_1..delta_q, ring(r,2r), ring(2r,4r) }.
double delta_star(double delta, int q, std::span<const double> deltas,
                  double r, const BoundParams& params);

/// Classical cylinder oracle: cross_section * L^(1-p).
double cylinder_exact(double cross_section_measure, double L, double p);

/// Exact p-modulus of the family joining the boundary spheres of the ring
/// a < |x| < b: omega_{n-1} (int_a^b t^((1-n)/(p-1)) dt)^(1-p).
double spherical_ring_exact(int n, double p, double a, double b);

/// Largest constant <= 1 for which ring_lower_bound stays below
/// spherical_ring_exact over a lattice of rings; a conservative default for
/// the otherwise unspecified b_np.
double calibrate_b_np(int n, double p);

}  // namespace pmod
