#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "pmod/domain.hpp"
#include "pmod/solver.hpp"

namespace pmod {

using MapFn = std::function<Point(const Point&)>;

/// Rigid motion x -> A x + b with orthogonal A.
struct SimilarityMap {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  Point apply(const Point& x) const { return A * x + b; }
  Point apply_inverse(const Point& y) const { return A.transpose() * (y - b); }
  double orthogonality_residual() const;

  static SimilarityMap identity(int n);
  static SimilarityMap translation(Point t);
  /// Frame mapping a0 -> d0 e_n and a1 -> (d0 + |a1 - a0|) e_n.
  static SimilarityMap align_segment(const Point& a0, const Point& a1,
                                     double d0);
};

enum class ConeRegion { Outside, Shell, LowerCone, UpperCone };

/// The explicit piecewise homeomorphism moving d0 e_n to d1 e_n inside the
/// cylinder C = { |x - x_n e_n| <= d0, 0 <= x_n <= d0 + d1 } while fixing
/// its exterior. An optional similarity frame carries a world segment onto
/// the canonical axis position.
struct ConeStretchMap {
  double d0 = 1.0;
  double d1 = 2.0;  // d0 < d1
  int n = 2;
  SimilarityMap frame;  // world -> canonical

  static ConeStretchMap canonical(int n, double d0, double d1);
  /// Cone stretch carrying a0 to a1 along their segment, with cylinder
  /// radius d0.
  static ConeStretchMap on_segment(const Point& a0, const Point& a1,
                                   double d0);

  /// Region of a canonical point; boundary ties resolve in the order
  /// lower cone, upper cone, shell, outside.
  ConeRegion classify(const Point& canonical_x) const;

  Point apply(const Point& world_x) const;
  Point apply_inverse(const Point& world_y) const;
  Point apply_canonical(const Point& x) const;
  Point invert_canonical(const Point& y) const;

  /// Closed-form derivative on the region interior containing x.
  Eigen::MatrixXd analytic_jacobian(const Point& canonical_x) const;
  /// Central differences; throws "straddles region boundary" when the
  /// stencil is not contained in one region. step 0 = 1e-6 (1 + |x|).
  Eigen::MatrixXd numeric_jacobian(const Point& canonical_x,
                                   double step = 0.0) const;
};

struct Dilatations {
  double op_norm = 0.0;      // largest singular value
  double min_stretch = 0.0;  // smallest singular value
  double jacobian = 0.0;     // determinant
  double K_I = 1.0;          // inner dilatation of order q
  double K_O = 1.0;          // outer dilatation of order p
};

/// Dilatations of a derivative matrix: K_{I,q} = |J| / l^q and
/// K_{O,p} = ||J'||^p / |J| when J != 0; 1 when the derivative vanishes,
/// +infinity otherwise.
Dilatations dilatations(const Eigen::MatrixXd& deriv, double p, double q);

/// Central finite differences of an arbitrary map.
Eigen::MatrixXd jacobian_numeric(const MapFn& f, const Point& x,
                                 double step = 0.0);

struct DilatationSample {
  Point x;
  ConeRegion region;
  Dilatations d;
};

struct DilatationReport {
  double p = 0.0;
  double bound = 0.0;  // (d1/d0)^(p(n-1))
  double max_K_I = 0.0;
  bool pass = false;
  std::vector<DilatationSample> samples;
};

/// Samples interior points of all four regions and checks
/// max K_{I,p} <= (d1/d0)^(p(n-1)) (1 + 1e-4).
DilatationReport verify_dilatation_bound(const ConeStretchMap& m, double p,
                                         int samples, unsigned seed = 1);

/// Ordered composition f = steps.back() o ... o steps.front().
struct CompositeMap {
  std::vector<std::variant<SimilarityMap, ConeStretchMap>> steps;

  int dim() const;
  Point apply(const Point& x) const;
  Point apply_inverse(const Point& y) const;
  MapFn fn() const;
  MapFn inverse_fn() const;
  /// Product of the per-step constants (d1/d0)^(p(n-1)); similarities
  /// contribute 1.
  double stretch_constant(double p) const;
  /// Upper bound on the pointwise inner dilatation at x: product of the
  /// per-step region values, falling back to the step constant near region
  /// boundaries.
  double inner_dilatation_bound(const Point& x, double p,
                                double boundary_margin) const;
};

/// Chain of cone stretches along the waypoint polyline, identity outside
/// D0. Per-step cylinder radius is margin_factor * d(polyline, boundary
/// D0) / sqrt(n), the boundary being sampled at boundary_res cells across
/// the bounding box.
CompositeMap build_chain(std::span<const Point> waypoints, const Domain& D0,
                         double margin_factor = 0.5, int boundary_res = 64);

struct QuasiInvarianceReport {
  double modulus = 0.0;
  double image_modulus = 0.0;
  double K = 1.0;
  double pointwise_bound = 0.0;  // sum K_{I,p}(x) rho^p h^n, extremal rho
  double tolerance = 0.0;
  bool holds = false;
  bool conclusive = false;  // both solver runs converged
};

/// Verifies M_p(f(Gamma)) <= K M_p(Gamma) (1 + rel_tol) numerically, with
/// the image family resolved on the same grid through the inverse map.
QuasiInvarianceReport quasi_invariance_check(const CompositeMap& f,
                                             const JoinFamily& fam,
                                             double grid_h,
                                             const SolverOptions& opts,
                                             double rel_tol = 0.05);

}  // namespace pmod
