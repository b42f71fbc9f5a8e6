#include "pmod/qc_maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace pmod {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double SimilarityMap::orthogonality_residual() const {
  return (A.transpose() * A -
          Eigen::MatrixXd::Identity(A.rows(), A.cols()))
      .norm();
}

SimilarityMap SimilarityMap::identity(int n) {
  return {Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n)};
}

SimilarityMap SimilarityMap::translation(Point t) {
  const int n = static_cast<int>(t.size());
  return {Eigen::MatrixXd::Identity(n, n), -t};  // world -> canonical shift
}

SimilarityMap SimilarityMap::align_segment(const Point& a0, const Point& a1,
                                           double d0) {
  const int n = static_cast<int>(a0.size());
  const Point diff = a1 - a0;
  const double len = diff.norm();
  if (len == 0.0)
    throw std::invalid_argument("align_segment: coincident endpoints");
  const Point u = diff / len;
  Eigen::VectorXd en = Eigen::VectorXd::Zero(n);
  en[n - 1] = 1.0;
  Eigen::MatrixXd A;
  const Point v = u - en;
  if (v.norm() < 1e-14) {
    A = Eigen::MatrixXd::Identity(n, n);
  } else {
    A = Eigen::MatrixXd::Identity(n, n) -
        2.0 * (v * v.transpose()) / v.squaredNorm();
  }
  Eigen::VectorXd b = d0 * en - A * a0;
  return {std::move(A), std::move(b)};
}

ConeStretchMap ConeStretchMap::canonical(int n, double d0, double d1) {
  if (!(0.0 < d0 && d0 < d1))
    throw std::invalid_argument("cone stretch: need 0 < d0 < d1");
  return {d0, d1, n, SimilarityMap::identity(n)};
}

ConeStretchMap ConeStretchMap::on_segment(const Point& a0, const Point& a1,
                                          double d0) {
  const double len = (a1 - a0).norm();
  if (len == 0.0)
    throw std::invalid_argument("cone stretch: coincident endpoints");
  ConeStretchMap m;
  m.d0 = d0;
  m.d1 = d0 + len;
  m.n = static_cast<int>(a0.size());
  m.frame = SimilarityMap::align_segment(a0, a1, d0);
  return m;
}

ConeRegion ConeStretchMap::classify(const Point& x) const {
  const double z = x[n - 1];
  const double s = x.head(n - 1).norm();
  if (z >= 0.0 && z <= d0 && s <= d0 - z) return ConeRegion::LowerCone;
  if (z >= d0 && z <= d0 + d1 && s <= d0 * (z - d0) / d1)
    return ConeRegion::UpperCone;
  if (s <= d0 && z >= 0.0 && z <= d0 + d1) return ConeRegion::Shell;
  return ConeRegion::Outside;
}

Point ConeStretchMap::apply_canonical(const Point& x) const {
  const double z = x[n - 1];
  const double s = x.head(n - 1).norm();
  double disp = 0.0;
  switch (classify(x)) {
    case ConeRegion::Outside:
      break;
    case ConeRegion::Shell:
      disp = (d1 - d0) / d0 * (d0 - s);
      break;
    case ConeRegion::LowerCone:
      disp = (d1 - d0) / d0 * z;
      break;
    case ConeRegion::UpperCone:
      disp = (d1 - d0) / d1 * (d0 + d1 - z);
      break;
  }
  Point y = x;
  y[n - 1] += disp;
  return y;
}

Point ConeStretchMap::invert_canonical(const Point& y) const {
  const double w = y[n - 1];
  const double s = y.head(n - 1).norm();
  if (s >= d0 || w <= 0.0 || w >= d0 + d1) return y;
  const double c = (d1 - d0) / d0;
  Point x = y;
  // lower cone: w = z (1 + c), valid while z <= d0 - s
  double z = w * d0 / d1;
  if (z <= d0 - s) {
    x[n - 1] = z;
    return x;
  }
  // shell: constant displacement c (d0 - s)
  z = w - c * (d0 - s);
  if (z >= d0 - s && z <= d0 + d1 * s / d0) {
    x[n - 1] = z;
    return x;
  }
  // upper cone: d0 + d1 - w = (d0 + d1 - z) d0 / d1
  z = d0 + d1 - (d0 + d1 - w) * d1 / d0;
  x[n - 1] = z;
  return x;
}

Point ConeStretchMap::apply(const Point& x) const {
  return frame.apply_inverse(apply_canonical(frame.apply(x)));
}

Point ConeStretchMap::apply_inverse(const Point& y) const {
  return frame.apply_inverse(invert_canonical(frame.apply(y)));
}

Eigen::MatrixXd ConeStretchMap::analytic_jacobian(const Point& x) const {
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
  switch (classify(x)) {
    case ConeRegion::Outside:
      break;
    case ConeRegion::LowerCone:
      J(n - 1, n - 1) = d1 / d0;
      break;
    case ConeRegion::UpperCone:
      J(n - 1, n - 1) = d0 / d1;
      break;
    case ConeRegion::Shell: {
      const double s = x.head(n - 1).norm();
      const double c = (d1 - d0) / d0;
      for (int j = 0; j < n - 1; ++j) J(n - 1, j) = -c * x[j] / s;
      break;
    }
  }
  return J;
}

Eigen::MatrixXd ConeStretchMap::numeric_jacobian(const Point& x,
                                                 double step) const {
  if (step <= 0.0) step = 1e-6 * (1.0 + x.norm());
  const ConeRegion region = classify(x);
  for (int j = 0; j < n; ++j) {
    Point lo = x, hi = x;
    lo[j] -= step;
    hi[j] += step;
    if (classify(lo) != region || classify(hi) != region)
      throw std::runtime_error("numeric_jacobian: straddles region boundary");
  }
  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    Point lo = x, hi = x;
    lo[j] -= step;
    hi[j] += step;
    J.col(j) = (apply_canonical(hi) - apply_canonical(lo)) / (2.0 * step);
  }
  return J;
}

Dilatations dilatations(const Eigen::MatrixXd& deriv, double p, double q) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(deriv);
  Dilatations d;
  d.op_norm = svd.singularValues()(0);
  d.min_stretch = svd.singularValues()(svd.singularValues().size() - 1);
  d.jacobian = deriv.determinant();
  const double absJ = std::abs(d.jacobian);
  if (absJ > 0.0) {
    d.K_I = absJ / std::pow(d.min_stretch, q);
    d.K_O = std::pow(d.op_norm, p) / absJ;
  } else if (d.op_norm == 0.0) {
    d.K_I = d.K_O = 1.0;
  } else {
    d.K_I = d.K_O = kInf;
  }
  return d;
}

Eigen::MatrixXd jacobian_numeric(const MapFn& f, const Point& x, double step) {
  if (step <= 0.0) step = 1e-6 * (1.0 + x.norm());
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    Point lo = x, hi = x;
    lo[j] -= step;
    hi[j] += step;
    J.col(j) = (f(hi) - f(lo)) / (2.0 * step);
  }
  return J;
}

DilatationReport verify_dilatation_bound(const ConeStretchMap& m, double p,
                                         int samples, unsigned seed) {
  if (!(p > 1.0))
    throw std::invalid_argument("verify_dilatation_bound: p <= 1");
  DilatationReport rep;
  rep.p = p;
  rep.bound = std::pow(m.d1 / m.d0, p * (m.n - 1));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uz(-0.2 * (m.d0 + m.d1),
                                            1.2 * (m.d0 + m.d1));
  std::uniform_real_distribution<double> us(-1.3 * m.d0, 1.3 * m.d0);
  const double margin = 1e-5 * m.d0;
  const int per_region = std::max(1, samples / 4);
  int counts[4] = {0, 0, 0, 0};
  int attempts = 0;
  while (attempts < 1000 * samples &&
         (counts[0] < per_region || counts[1] < per_region ||
          counts[2] < per_region || counts[3] < per_region)) {
    ++attempts;
    Point x(m.n);
    for (int j = 0; j < m.n - 1; ++j) x[j] = us(rng);
    x[m.n - 1] = uz(rng);
    const ConeRegion region = m.classify(x);
    bool interior = true;
    for (int j = 0; j < m.n && interior; ++j) {
      Point lo = x, hi = x;
      lo[j] -= margin;
      hi[j] += margin;
      interior = m.classify(lo) == region && m.classify(hi) == region;
    }
    if (!interior) continue;
    const int ri = static_cast<int>(region);
    if (counts[ri] >= per_region) continue;
    ++counts[ri];
    DilatationSample smp;
    smp.x = x;
    smp.region = region;
    smp.d = dilatations(m.analytic_jacobian(x), p, p);
    rep.max_K_I = std::max(rep.max_K_I, smp.d.K_I);
    rep.samples.push_back(std::move(smp));
  }
  rep.pass = rep.max_K_I <= rep.bound * (1.0 + 1e-4);
  return rep;
}

int CompositeMap::dim() const {
  if (steps.empty()) throw std::invalid_argument("composite map: empty chain");
  if (const auto* s = std::get_if<SimilarityMap>(&steps.front()))
    return static_cast<int>(s->b.size());
  return std::get<ConeStretchMap>(steps.front()).n;
}

Point CompositeMap::apply(const Point& x) const {
  Point y = x;
  for (const auto& st : steps)
    y = std::visit([&](const auto& s) { return s.apply(y); }, st);
  return y;
}

Point CompositeMap::apply_inverse(const Point& y) const {
  Point x = y;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it)
    x = std::visit([&](const auto& s) { return s.apply_inverse(x); }, *it);
  return x;
}

MapFn CompositeMap::fn() const {
  return [self = *this](const Point& x) { return self.apply(x); };
}

MapFn CompositeMap::inverse_fn() const {
  return [self = *this](const Point& y) { return self.apply_inverse(y); };
}

double CompositeMap::stretch_constant(double p) const {
  double K = 1.0;
  for (const auto& st : steps) {
    if (const auto* c = std::get_if<ConeStretchMap>(&st))
      K *= std::pow(c->d1 / c->d0, p * (c->n - 1));
  }
  return K;
}

double CompositeMap::inner_dilatation_bound(const Point& x, double p,
                                            double boundary_margin) const {
  double K = 1.0;
  Point cur = x;
  for (const auto& st : steps) {
    if (const auto* c = std::get_if<ConeStretchMap>(&st)) {
      const Point canon = c->frame.apply(cur);
      const ConeRegion region = c->classify(canon);
      bool interior = true;
      for (int j = 0; j < c->n && interior; ++j) {
        Point lo = canon, hi = canon;
        lo[j] -= boundary_margin;
        hi[j] += boundary_margin;
        interior = c->classify(lo) == region && c->classify(hi) == region;
      }
      if (interior) {
        K *= dilatations(c->analytic_jacobian(canon), p, p).K_I;
      } else {
        K *= std::pow(c->d1 / c->d0, p * (c->n - 1));
      }
    }
    cur = std::visit([&](const auto& s) { return s.apply(cur); }, st);
  }
  return K;
}

namespace {

double point_segment_dist(const Point& x, const Point& a, const Point& b) {
  const Point d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (x - a).norm();
  const double t = std::clamp((x - a).dot(d) / len2, 0.0, 1.0);
  return (x - (a + t * d)).norm();
}

}  // namespace

CompositeMap build_chain(std::span<const Point> waypoints, const Domain& D0,
                         double margin_factor, int boundary_res) {
  if (waypoints.size() < 2)
    throw std::invalid_argument("build_chain: need >= 2 waypoints");
  const int n = static_cast<int>(waypoints[0].size());
  // polyline clearance against the rasterized boundary of D0
  const Box bb = D0.bounding_box();
  const double h = (bb.hi - bb.lo).maxCoeff() / boundary_res;
  CellMask mask = rasterize(D0, Grid::cover(bb, h, 2));
  CellMask bnd = boundary_cells(mask);
  double clearance = std::numeric_limits<double>::infinity();
  const long nc = mask.grid.cell_count();
  for (long idx = 0; idx < nc; ++idx) {
    if (!bnd.test(idx)) continue;
    const Point c = mask.grid.cell_center(idx);
    for (size_t i = 0; i + 1 < waypoints.size(); ++i)
      clearance =
          std::min(clearance, point_segment_dist(c, waypoints[i], waypoints[i + 1]));
  }
  const double d0 = margin_factor * clearance / std::sqrt(static_cast<double>(n));
  if (!(d0 > 0.0) || !std::isfinite(d0))
    throw std::invalid_argument("build_chain: polyline too close to boundary of D0");
  CompositeMap chain;
  for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
    if ((waypoints[i + 1] - waypoints[i]).norm() == 0.0) continue;
    chain.steps.emplace_back(
        ConeStretchMap::on_segment(waypoints[i], waypoints[i + 1], d0));
  }
  if (chain.steps.empty())
    chain.steps.emplace_back(SimilarityMap::identity(n));
  return chain;
}

QuasiInvarianceReport quasi_invariance_check(const CompositeMap& f,
                                             const JoinFamily& fam,
                                             double grid_h,
                                             const SolverOptions& opts,
                                             double rel_tol) {
  QuasiInvarianceReport rep;
  rep.tolerance = rel_tol;
  rep.K = f.stretch_constant(opts.p);

  const Box db = fam.D.bounding_box();
  // conservative hull of the domain and its image
  Box hull = db;
  const int n = db.dim();
  const int probes = 5;
  long total = 1;
  for (int j = 0; j < n; ++j) total *= probes;
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    Point x(n);
    for (int j = 0; j < n; ++j) {
      const int c = static_cast<int>(rem % probes);
      rem /= probes;
      x[j] = db.lo[j] + (db.hi[j] - db.lo[j]) * c / (probes - 1.0);
    }
    const Point y = f.apply(x);
    hull.lo = hull.lo.cwiseMin(y);
    hull.hi = hull.hi.cwiseMax(y);
  }
  const Grid grid = Grid::cover(hull, grid_h, 2);

  CellMask mask = rasterize(
      Domain::unite(Domain::unite(fam.D, fam.E), fam.F), grid);
  auto base = compute_modulus(Family{fam}, mask, opts);
  rep.modulus = base.value;

  auto image_domain = [&](const Domain& d) {
    return Domain::mapped(d, f.inverse_fn(), hull);
  };
  JoinFamily image{image_domain(fam.E), image_domain(fam.F),
                   image_domain(fam.D)};
  CellMask imask = rasterize(
      Domain::unite(Domain::unite(image.D, image.E), image.F), grid);
  auto img = compute_modulus(Family{image}, imask, opts);
  rep.image_modulus = img.value;

  // sharper right side: integral of K_{I,p}(x, f) rho^p dm with the
  // computed extremal density
  const double margin = 1e-3 * grid.h;
  double acc = 0.0;
  const long ncells = grid.cell_count();
  for (long c = 0; c < ncells; ++c) {
    const double r = base.density.at(c);
    if (r == 0.0) continue;
    acc += f.inner_dilatation_bound(grid.cell_center(c), opts.p, margin) *
           std::pow(r, opts.p);
  }
  rep.pointwise_bound = acc * grid.cell_volume();

  rep.conclusive = base.converged && img.converged;
  rep.holds = rep.image_modulus <= rep.K * rep.modulus * (1.0 + rel_tol);
  return rep;
}

}  // namespace pmod
