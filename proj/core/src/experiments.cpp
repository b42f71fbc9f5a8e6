#include "pmod/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>

#include "pmod/geometry.hpp"

namespace pmod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// set cells inside d with a face neighbor whose center is outside d
std::vector<long> boundary_band(const Domain& d, const CellMask& mask) {
  const Grid& g = mask.grid;
  const int n = g.dim();
  std::vector<long> out;
  const long nc = g.cell_count();
  for (long idx = 0; idx < nc; ++idx) {
    if (!mask.test(idx)) continue;
    if (!d.contains(g.cell_center(idx))) continue;
    const std::vector<int> c = g.coords(idx);
    bool edge = false;
    for (int ax = 0; ax < n && !edge; ++ax) {
      for (int dir : {-1, 1}) {
        std::vector<int> nb = c;
        nb[ax] += dir;
        if (nb[ax] < 0 || nb[ax] >= g.dims[ax]) continue;
        if (!d.contains(g.cell_center(g.index(nb)))) {
          edge = true;
          break;
        }
      }
    }
    if (edge) out.push_back(idx);
  }
  return out;
}

void thicken(std::vector<long>& cells, const CellMask& mask) {
  const Grid& g = mask.grid;
  const int n = g.dim();
  std::set<long> grown(cells.begin(), cells.end());
  for (long idx : cells) {
    const std::vector<int> c = g.coords(idx);
    for (int ax = 0; ax < n; ++ax) {
      for (int dir : {-1, 1}) {
        std::vector<int> nb = c;
        nb[ax] += dir;
        if (nb[ax] < 0 || nb[ax] >= g.dims[ax]) continue;
        const long j = g.index(nb);
        if (mask.test(j)) grown.insert(j);
      }
    }
  }
  cells.assign(grown.begin(), grown.end());
}

std::vector<long> path_cells(const DiscretePath& p, const CellMask& mask) {
  std::vector<long> cells;
  for (const auto& [cell, coeff] : path_cell_coefficients(p, mask.grid)) {
    if (!mask.test(cell)) return {};  // leaves the domain
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace

void AccessibilityScenario::validate(const CellMask& mask) const {
  const Grid& g = mask.grid;
  const long nc = g.cell_count();
  const double reach = g.h * std::sqrt(static_cast<double>(g.dim()));
  double d_x0 = kInf;
  for (long idx = 0; idx < nc; ++idx) {
    if (!mask.test(idx)) continue;
    const Point c = g.cell_center(idx);
    if (V.contains(c) && !U.contains(c))
      throw std::invalid_argument("scenario: V not contained in U");
    d_x0 = std::min(d_x0, euclid_dist(c, x0));
  }
  if (d_x0 > reach)
    throw std::invalid_argument("scenario: x0 not in the closure of D");
}

std::vector<std::vector<long>> generate_F_sets(const AccessibilityScenario& s,
                                               const CellMask& mask, int num_F,
                                               unsigned seed) {
  const std::vector<long> bandU = boundary_band(s.U, mask);
  const std::vector<long> bandV = boundary_band(s.V, mask);
  if (bandU.empty() || bandV.empty())
    throw std::invalid_argument("generate_F_sets: empty boundary band");
  GridGraph graph(mask);
  const DensityField ones = DensityField::constant(mask.grid, 1.0);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<long>> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < num_F && attempts < 50 * num_F) {
    ++attempts;
    const long a = bandU[rng() % bandU.size()];
    const long b = bandV[rng() % bandV.size()];
    std::vector<long> cells;
    if (attempts % 2 == 0) {
      DiscretePath seg;
      seg.v = {mask.grid.cell_center(a), mask.grid.cell_center(b)};
      cells = path_cells(seg, mask);
      if (cells.empty()) continue;
    } else {
      try {
        const long ec[1] = {a};
        const long fc[1] = {b};
        DiscretePath sp = shortest_rho_path(graph, ec, fc, ones);
        for (const Point& v : sp.v) cells.push_back(mask.grid.cell_at(v));
      } catch (const std::runtime_error&) {
        continue;  // disconnected endpoints
      }
    }
    cells.push_back(a);
    cells.push_back(b);
    thicken(cells, mask);
    out.push_back(std::move(cells));
  }
  return out;
}

ProbeResult estimate_delta(const AccessibilityScenario& s, double p,
                           const CellMask& mask, const SolverOptions& opts,
                           int num_F, unsigned seed) {
  s.validate(mask);
  const std::vector<long> E_cells = rasterize_cells(s.E, mask);
  if (E_cells.empty())
    throw std::invalid_argument("estimate_delta: E misses the grid");
  SolverOptions o = opts;
  o.p = p;
  ProbeResult res;
  const auto F_sets = generate_F_sets(s, mask, num_F, seed);
  res.generated = static_cast<int>(F_sets.size());
  res.skipped = num_F - res.generated;
  for (const auto& F : F_sets) {
    const ModulusResult m = compute_modulus_cells(mask, E_cells, F, o);
    if (std::isinf(m.value)) {
      ++res.infinite;
      continue;
    }
    if (!m.converged) {
      res.all_converged = false;
      continue;
    }
    res.moduli.push_back(m.value);
  }
  if (res.moduli.empty())
    throw std::runtime_error("estimate_delta: no usable F instance");
  res.delta = *std::min_element(res.moduli.begin(), res.moduli.end());
  return res;
}

SwapReport continuum_swap_check(const AccessibilityScenario& s,
                                const Domain& E_star, double p,
                                const CellMask& mask, const SolverOptions& opts,
                                int num_F, unsigned seed, double b_np) {
  const int n = mask.grid.dim();
  if (!(p > n - 1))
    throw std::invalid_argument("continuum_swap_check: need p > n - 1");
  const std::vector<long> E_cells = rasterize_cells(s.E, mask);
  const std::vector<long> Es_cells = rasterize_cells(E_star, mask);
  if (E_cells.empty() || Es_cells.empty())
    throw std::invalid_argument("continuum_swap_check: set misses the grid");
  {
    std::set<long> es(Es_cells.begin(), Es_cells.end());
    for (long c : E_cells)
      if (es.count(c))
        throw std::invalid_argument("continuum_swap_check: E and E* intersect");
  }
  SolverOptions o = opts;
  o.p = p;
  SwapReport rep;

  std::vector<Point> A, A_star;
  for (long c : E_cells) A.push_back(mask.grid.cell_center(c));
  for (long c : Es_cells) A_star.push_back(mask.grid.cell_center(c));

  // 4r = min{ dist(E, E*), dist(E, boundary D), dist(E, B(x0, t0)) } with
  // t0 = dist(x0, E) / 2
  double d_EEs = kInf;
  for (const Point& a : A)
    for (const Point& b : A_star) d_EEs = std::min(d_EEs, euclid_dist(a, b));
  const CellMask bnd = boundary_cells(mask);
  double d_Ebd = kInf;
  const long nc_all = mask.grid.cell_count();
  for (long idx = 0; idx < nc_all; ++idx) {
    if (!bnd.test(idx)) continue;
    const Point c = mask.grid.cell_center(idx);
    for (const Point& a : A) d_Ebd = std::min(d_Ebd, euclid_dist(a, c));
  }
  double d_Ex0 = kInf;
  for (const Point& a : A) d_Ex0 = std::min(d_Ex0, euclid_dist(a, s.x0));
  rep.r = 0.25 * std::min({d_EEs, d_Ebd, 0.5 * d_Ex0});
  if (!(rep.r > 0.0))
    throw std::runtime_error("continuum_swap_check: E too close to boundary");

  // greedy ball cover of the E cells at radius r
  std::vector<Point> centers;
  std::vector<char> covered(E_cells.size(), 0);
  for (size_t i = 0; i < E_cells.size(); ++i) {
    if (covered[i]) continue;
    const Point c = A[i];
    centers.push_back(c);
    for (size_t j = i; j < E_cells.size(); ++j)
      if (!covered[j] && euclid_dist(A[j], c) <= rep.r) covered[j] = 1;
  }
  rep.q = static_cast<int>(centers.size());

  rep.delta = estimate_delta(s, p, mask, o, num_F, seed).delta;

  for (const Point& c : centers) {
    std::vector<long> Ei;
    for (size_t j = 0; j < E_cells.size(); ++j)
      if (euclid_dist(A[j], c) <= rep.r) Ei.push_back(E_cells[j]);
    const ModulusResult m = compute_modulus_cells(mask, Ei, Es_cells, o);
    if (!m.converged) rep.all_converged = false;
    rep.delta_i.push_back(m.value);
  }

  const BoundParams bp{n, p, b_np, 1.0};
  rep.ring_r = ring_lower_bound(bp, rep.r, 2.0 * rep.r);
  rep.ring_2r = ring_lower_bound(bp, 2.0 * rep.r, 4.0 * rep.r);
  rep.delta_star = delta_star(rep.delta, rep.q, rep.delta_i, rep.r, bp);

  rep.empirical_min = kInf;
  for (const auto& F : generate_F_sets(s, mask, num_F, seed + 1)) {
    const ModulusResult m = compute_modulus_cells(mask, Es_cells, F, o);
    if (std::isinf(m.value)) {
      ++rep.infinite;
      continue;
    }
    if (!m.converged) {
      rep.all_converged = false;
      continue;
    }
    rep.empirical_min = std::min(rep.empirical_min, m.value);
  }
  rep.holds = rep.empirical_min >= rep.delta_star * (1.0 - 1e-9);
  return rep;
}

namespace {

// random walk from a seed cell until the collected set reaches the target
// spherical diameter
std::vector<long> grow_blob(const GridGraph& graph, std::mt19937_64& rng,
                            long seed_cell, double target, int max_steps) {
  const Grid& g = graph.mask().grid;
  std::vector<long> cells{seed_cell};
  std::vector<ExtendedPoint> pts{ExtendedPoint{g.cell_center(seed_cell)}};
  double diam = 0.0;
  int node = graph.node_of(seed_cell);
  for (int s = 0; s < max_steps && diam < target; ++s) {
    const auto nb = graph.neighbors(node);
    if (nb.empty()) break;
    node = nb[rng() % nb.size()];
    const long c = graph.cell_of(node);
    const ExtendedPoint pc{g.cell_center(c)};
    for (const auto& q : pts) diam = std::max(diam, spherical_dist(pc, q));
    cells.push_back(c);
    pts.push_back(pc);
  }
  if (diam < target) return {};
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

}  // namespace

UniformityReport uniformity_probe(const Domain& D, double p, double r,
                                  const CellMask& mask,
                                  const SolverOptions& opts, int num_pairs,
                                  unsigned seed) {
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("uniformity_probe: r outside (0,1)");
  (void)D;  // membership already encoded in the mask
  std::vector<long> set_cells;
  const long nc = mask.grid.cell_count();
  for (long idx = 0; idx < nc; ++idx)
    if (mask.test(idx)) set_cells.push_back(idx);
  if (set_cells.empty())
    throw std::invalid_argument("uniformity_probe: empty mask");
  GridGraph graph(mask);
  SolverOptions o = opts;
  o.p = p;
  std::mt19937_64 rng(seed);
  const int max_steps = 20000;
  UniformityReport rep;
  rep.r = r;
  rep.delta = kInf;
  int attempts = 0;
  while (rep.pairs < num_pairs && attempts < 20 * num_pairs) {
    ++attempts;
    auto Fs = grow_blob(graph, rng, set_cells[rng() % set_cells.size()], r,
                        max_steps);
    auto F = grow_blob(graph, rng, set_cells[rng() % set_cells.size()], r,
                       max_steps);
    if (Fs.empty() || F.empty()) continue;
    std::vector<long> inter;
    std::set_intersection(Fs.begin(), Fs.end(), F.begin(), F.end(),
                          std::back_inserter(inter));
    if (!inter.empty()) continue;  // intersecting continua, modulus infinite
    const ModulusResult m = compute_modulus_cells(mask, Fs, F, o);
    if (!m.converged) {
      rep.all_converged = false;
      continue;
    }
    ++rep.pairs;
    rep.delta = std::min(rep.delta, m.value);
  }
  if (rep.pairs == 0)
    throw std::runtime_error("uniformity_probe: no valid pairs at this r");
  return rep;
}

VanishingReport vanishing_modulus_probe(const CombParams& comb,
                                        const Point& x0, double r, double r0,
                                        const Domain& F, double p,
                                        const CellMask& mask,
                                        const SolverOptions& opts,
                                        std::span<const int> k_range) {
  if (!(0.0 < r && r < r0))
    throw std::invalid_argument("vanishing_modulus_probe: need 0 < r < r0");
  comb.validate();
  const Grid& g = mask.grid;

  const std::vector<long> F_cells = rasterize_cells(F, mask);
  if (F_cells.empty())
    throw std::invalid_argument("vanishing_modulus_probe: F misses the grid");
  for (long c : F_cells)
    if (euclid_dist(g.cell_center(c), x0) < r0)
      throw std::invalid_argument(
          "vanishing_modulus_probe: F enters B(x0, r0)");

  // components of B(x0, r0) cap D
  CellMask restr = mask;
  const long nc = g.cell_count();
  for (long idx = 0; idx < nc; ++idx)
    if (restr.test(idx) && euclid_dist(g.cell_center(idx), x0) >= r0)
      restr.bits[static_cast<size_t>(idx)] = 0;
  const Components comps = connected_components(restr);

  GridGraph graph(mask);
  SolverOptions o = opts;
  o.p = p;
  VanishingReport rep;
  rep.r = r;
  rep.r0 = r0;
  const double rho_val = 1.0 / (r0 - r);

  for (int k : k_range) {
    const Point anchor = comb.tooth_anchor(k);
    const long acell = g.cell_at(anchor);
    if (acell < 0 || !restr.test(acell) ||
        comps.labels[static_cast<size_t>(acell)] == 0)
      throw std::runtime_error("vanishing_modulus_probe: refine grid");
    const int label = comps.labels[static_cast<size_t>(acell)];

    VanishingEntry e;
    e.k = k;
    e.measure = component_measure(restr, comps, label);
    e.measure_small = e.measure < 1.0 / k;
    e.bound = e.measure / std::pow(r0 - r, p);

    std::vector<long> start;
    DensityField rho = DensityField::constant(g, 0.0);
    for (long idx = 0; idx < nc; ++idx) {
      if (comps.labels[static_cast<size_t>(idx)] != label) continue;
      rho.values[static_cast<size_t>(idx)] = rho_val;
      if (euclid_dist(g.cell_center(idx), x0) < r) start.push_back(idx);
    }
    if (start.empty())
      throw std::runtime_error("vanishing_modulus_probe: refine grid");

    try {
      const DiscretePath sp = shortest_rho_path(graph, start, F_cells, rho);
      const double len = rho_length(sp, rho);
      e.density_admissible =
          len >= 1.0 - 2.0 * g.h / (r0 - r) - o.admissibility_tol;
    } catch (const std::runtime_error&) {
      e.density_admissible = true;  // no joining path at all
    }

    const ModulusResult m = compute_modulus_cells(mask, start, F_cells, o);
    e.solver_value = m.value;
    e.converged = m.converged;
    rep.entries.push_back(std::move(e));
  }

  rep.bound_monotone = true;
  rep.solver_monotone = true;
  rep.solver_below_bound = true;
  for (size_t i = 0; i < rep.entries.size(); ++i) {
    const auto& e = rep.entries[i];
    if (i > 0) {
      if (e.bound > rep.entries[i - 1].bound * (1.0 + 1e-12))
        rep.bound_monotone = false;
      if (e.solver_value > rep.entries[i - 1].solver_value * (1.0 + 1e-6))
        rep.solver_monotone = false;
    }
    if (e.solver_value > e.bound * 1.05 + 10.0 * o.admissibility_tol)
      rep.solver_below_bound = false;
  }
  return rep;
}

void write_trend_csv(std::ostream& os, const VanishingReport& rep) {
  os << "k,measure,bound,solver_value\n";
  const auto prev = os.precision(17);
  for (const auto& e : rep.entries)
    os << e.k << ',' << e.measure << ',' << e.bound << ',' << e.solver_value
       << '\n';
  os.precision(prev);
}

}  // namespace pmod
