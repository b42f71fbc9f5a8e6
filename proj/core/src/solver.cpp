#include "pmod/solver.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <stdexcept>

namespace pmod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Active-set convex program over the cells touched by at least one
/// constraint. Solved in the dual: for multipliers lambda >= 0 the
/// minimizing density is rho_c = (s_c / (p h^n))^(1/(p-1)) with
/// s_c = sum_g lambda_g a_{g,c}; the dual is maximized by cyclic
/// coordinate ascent, each coordinate update driving its constraint
/// length back to 1 (closed form for p = 2, safeguarded Newton else).
class InnerSolver {
 public:
  InnerSolver(double p, double cell_volume)
      : p_(p), vol_(cell_volume), expo_(1.0 / (p - 1.0)) {}

  int add_constraint(std::vector<std::pair<long, double>> coeffs) {
    std::vector<std::pair<int, double>> row;
    row.reserve(coeffs.size());
    for (auto& [cell, w] : coeffs) {
      auto [it, inserted] = slot_of_.try_emplace(cell, static_cast<int>(cells_.size()));
      if (inserted) cells_.push_back(cell);
      row.emplace_back(it->second, w);
    }
    rows_.push_back(std::move(row));
    lambda_.push_back(0.0);
    return static_cast<int>(rows_.size()) - 1;
  }

  void remove_constraints(const std::vector<int>& idx_sorted_desc) {
    for (int i : idx_sorted_desc) {
      rows_.erase(rows_.begin() + i);
      lambda_.erase(lambda_.begin() + i);
    }
  }

  int constraint_count() const { return static_cast<int>(rows_.size()); }
  const std::vector<long>& support_cells() const { return cells_; }
  const std::vector<double>& multipliers() const { return lambda_; }

  /// Maximizes the dual to relative gap <= tol. Returns the feasible
  /// (rescaled) density over the support, its objective value, and the
  /// achieved gap.
  struct Solution {
    std::vector<double> rho;  // indexed by support slot, feasible
    double value = 0.0;
    double gap = kInf;
    double min_active_length = kInf;
    int iters = 0;
  };

  Solution solve(double tol, int max_sweeps) {
    const int m = constraint_count();
    const int nc = static_cast<int>(cells_.size());
    Solution sol;
    sol.rho.assign(static_cast<size_t>(nc), 0.0);
    if (m == 0) {
      sol.value = 0.0;
      sol.gap = 0.0;
      return sol;
    }
    std::vector<double> rho(static_cast<size_t>(nc));
    std::vector<double> grad(static_cast<size_t>(m));

    double best_primal = kInf;
    std::vector<double> best_rho;
    double best_min_len = 0.0;

    double g_lam = dual_value(lambda_, rho, grad);  // also refreshes s_
    update_best(rho, grad, best_primal, best_rho, best_min_len);

    double g_prev = g_lam;
    int stall = 0;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
      if (std::isfinite(best_primal)) {
        const double gap = best_primal - g_lam;
        sol.gap = gap;
        if (gap <= tol * std::max(1.0, std::abs(best_primal))) break;
      }
      for (int k = 0; k < m; ++k) coordinate_update(k);
      g_lam = dual_value(lambda_, rho, grad);
      update_best(rho, grad, best_primal, best_rho, best_min_len);
      // bail out once the dual stops moving at machine precision
      if (g_lam - g_prev <= 1e-14 * std::max(1.0, std::abs(g_lam))) {
        if (++stall >= 5) break;
      } else {
        stall = 0;
      }
      g_prev = g_lam;
    }
    sol.iters = sweep;  // == max_sweeps exactly when the sweep cap bound
    if (!best_rho.empty()) {
      sol.rho = std::move(best_rho);
      sol.value = objective(sol.rho);
      sol.min_active_length = best_min_len;
      sol.gap = sol.value - g_lam;
    }
    return sol;
  }

  double objective(const std::vector<double>& rho) const {
    double s = 0.0;
    for (double r : rho) s += pow_p(r);
    return vol_ * s;
  }

 private:
  // x^expo_ and r^p with fast paths for the common exponents
  double pow_expo(double x) const {
    if (expo_ == 1.0) return x;
    if (expo_ == 2.0) return x * x;
    if (expo_ == 0.5) return std::sqrt(x);
    return std::pow(x, expo_);
  }
  double pow_p(double r) const {
    if (p_ == 2.0) return r * r;
    if (p_ == 3.0) return r * r * r;
    if (p_ == 1.5) return r * std::sqrt(r);
    return std::pow(r, p_);
  }
  double rho_of(double s) const {
    return s > 0.0 ? pow_expo(s / (p_ * vol_)) : 0.0;
  }

  // Exact maximization of the dual over lambda_k, all others fixed:
  // move lambda_k (clamped at 0) until the rho-length of row k is 1.
  // Relies on s_ being in sync with lambda_; keeps it in sync.
  void coordinate_update(int k) {
    const auto& row = rows_[static_cast<size_t>(k)];
    const double lam_k = lambda_[static_cast<size_t>(k)];
    auto len_at = [&](double delta) {
      double len = 0.0;
      for (const auto& [slot, w] : row)
        len += w * rho_of(s_[static_cast<size_t>(slot)] + delta * w);
      return len;
    };
    const double lo = -lam_k;
    double delta;
    if (p_ == 2.0) {
      // rho is linear in s: len(delta) = len(0) + delta * sum w^2 / (2 vol)
      double sw2 = 0.0;
      for (const auto& [slot, w] : row) sw2 += w * w;
      if (sw2 <= 0.0) return;
      delta = (1.0 - len_at(0.0)) * (p_ * vol_) / sw2;
      if (delta < lo) delta = lo;
    } else {
      const double len0 = len_at(0.0);
      double a, b;  // bracket with len(a) <= 1 <= len(b)
      if (len0 >= 1.0) {
        a = lo;
        b = 0.0;
        if (len_at(a) >= 1.0) {
          apply_delta(k, lo);
          return;
        }
      } else {
        a = 0.0;
        b = std::max(1.0, lam_k);
        int guard = 0;
        while (len_at(b) < 1.0 && guard++ < 200) b *= 2.0;
        if (len_at(b) < 1.0) return;  // row cannot reach length 1
      }
      // Newton from the midpoint, bisection whenever it leaves the bracket
      delta = 0.5 * (a + b);
      for (int it = 0; it < 40; ++it) {
        const double len = len_at(delta);
        if (std::abs(len - 1.0) <= 1e-12) break;
        if (len < 1.0) a = delta; else b = delta;
        double dlen = 0.0;
        for (const auto& [slot, w] : row) {
          const double x = s_[static_cast<size_t>(slot)] + delta * w;
          if (x > 0.0)
            dlen += w * w * expo_ / (p_ * vol_) *
                    std::pow(x / (p_ * vol_), expo_ - 1.0);
        }
        double next = dlen > 0.0 ? delta + (1.0 - len) / dlen : a;
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (b - a <= 1e-15 * std::max(1.0, std::abs(delta))) break;
        delta = next;
      }
    }
    apply_delta(k, delta);
  }

  void apply_delta(int k, double delta) {
    if (delta == 0.0) return;
    const auto& row = rows_[static_cast<size_t>(k)];
    for (const auto& [slot, w] : row) s_[static_cast<size_t>(slot)] += delta * w;
    lambda_[static_cast<size_t>(k)] += delta;
    if (lambda_[static_cast<size_t>(k)] < 0.0) lambda_[static_cast<size_t>(k)] = 0.0;
  }

  // dual value at lam; fills rho(lam) and the gradient 1 - A rho
  double dual_value(const std::vector<double>& lam, std::vector<double>& rho,
                    std::vector<double>& grad) {
    const int nc = static_cast<int>(cells_.size());
    const int m = constraint_count();
    s_.assign(static_cast<size_t>(nc), 0.0);
    for (int g = 0; g < m; ++g) {
      const double l = lam[static_cast<size_t>(g)];
      if (l == 0.0) continue;
      for (const auto& [slot, w] : rows_[static_cast<size_t>(g)])
        s_[static_cast<size_t>(slot)] += l * w;
    }
    double sum_rho_p = 0.0;
    rho.resize(static_cast<size_t>(nc));
    for (int c = 0; c < nc; ++c) {
      const double r = rho_of(s_[static_cast<size_t>(c)]);
      rho[static_cast<size_t>(c)] = r;
      sum_rho_p += pow_p(r);
    }
    double g_val = 0.0;
    grad.resize(static_cast<size_t>(m));
    for (int g = 0; g < m; ++g) {
      double len = 0.0;
      for (const auto& [slot, w] : rows_[static_cast<size_t>(g)])
        len += w * rho[static_cast<size_t>(slot)];
      grad[static_cast<size_t>(g)] = 1.0 - len;
      g_val += lam[static_cast<size_t>(g)];
    }
    g_val -= (p_ - 1.0) * vol_ * sum_rho_p;
    return g_val;
  }

  // rescale rho(lam) to feasibility and keep the best primal value
  void update_best(const std::vector<double>& rho,
                   const std::vector<double>& grad, double& best_primal,
                   std::vector<double>& best_rho, double& best_min_len) {
    double min_len = kInf;
    for (double gviol : grad) min_len = std::min(min_len, 1.0 - gviol);
    if (!(min_len > 0.0)) return;
    const double scale = 1.0 / min_len;
    const double primal = objective(rho) * std::pow(scale, p_);
    if (primal < best_primal) {
      best_primal = primal;
      best_rho.assign(rho.begin(), rho.end());
      for (double& r : best_rho) r *= scale;
      best_min_len = 1.0;  // by construction after rescaling
    }
  }

  double p_;
  double vol_;
  double expo_;
  std::map<long, int> slot_of_;
  std::vector<long> cells_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
  std::vector<double> lambda_;
  std::vector<double> s_;
};

DensityField support_to_field(const Grid& g, const std::vector<long>& cells,
                              const std::vector<double>& rho) {
  DensityField f = DensityField::constant(g, 0.0);
  for (size_t i = 0; i < cells.size(); ++i)
    f.values[static_cast<size_t>(cells[i])] = rho[i];
  return f;
}

ModulusResult infinite_result(const Grid& g) {
  ModulusResult r;
  r.value = kInf;
  r.density = DensityField::constant(g, 0.0);
  r.min_path_rho_length = 0.0;
  r.converged = true;
  return r;
}

ModulusResult zero_result(const Grid& g) {
  ModulusResult r;
  r.value = 0.0;
  r.density = DensityField::constant(g, 0.0);
  r.min_path_rho_length = kInf;
  r.converged = true;
  return r;
}

void validate_options(const SolverOptions& o) {
  if (!(o.p > 1.0))
    throw std::invalid_argument("solver: p must be > 1");
  if (o.inner_tol <= 0.0 || o.admissibility_tol <= 0.0)
    throw std::invalid_argument("solver: tolerances must be positive");
}

ModulusResult solve_explicit(const std::vector<DiscretePath>& paths,
                             const CellMask& mask, const SolverOptions& opts) {
  const Grid& g = mask.grid;
  if (paths.empty()) throw std::invalid_argument("solver: empty family");
  for (const auto& p : paths)
    if (p.constant() || euclid_length(p) == 0.0) return infinite_result(g);
  InnerSolver inner(opts.p, g.cell_volume());
  for (const auto& p : paths)
    inner.add_constraint(path_cell_coefficients(p, g));
  auto sol = inner.solve(opts.inner_tol, opts.max_inner_iters);
  ModulusResult r;
  r.value = sol.value;
  r.density = support_to_field(g, inner.support_cells(), sol.rho);
  r.active_paths = paths;
  double min_len = kInf;
  for (const auto& p : paths)
    min_len = std::min(min_len, rho_length(p, r.density));
  r.min_path_rho_length = min_len;
  r.outer_iters = 1;
  r.converged =
      sol.gap <= std::max(opts.inner_tol, 1e-7) * std::max(1.0, sol.value) &&
      min_len >= 1.0 - std::max(opts.admissibility_tol, 1.5e-8);
  return r;
}

}  // namespace

std::vector<long> rasterize_cells(const Domain& d, const CellMask& mask) {
  std::vector<long> cells;
  const long n = mask.grid.cell_count();
  for (long idx = 0; idx < n; ++idx)
    if (mask.test(idx) && d.contains(mask.grid.cell_center(idx)))
      cells.push_back(idx);
  return cells;
}

ModulusResult compute_modulus_cells(const CellMask& mask,
                                    std::span<const long> E_cells,
                                    std::span<const long> F_cells,
                                    const SolverOptions& opts) {
  validate_options(opts);
  const Grid& g = mask.grid;
  if (E_cells.empty() || F_cells.empty())
    throw std::invalid_argument("solver: empty endpoint set at working grid");
  // a shared cell admits the constant path
  {
    std::vector<long> e(E_cells.begin(), E_cells.end());
    std::sort(e.begin(), e.end());
    for (long f : F_cells)
      if (std::binary_search(e.begin(), e.end(), f)) return infinite_result(g);
  }
  GridGraph graph(mask);
  if (!reachable(graph, E_cells, F_cells)) return zero_result(g);

  const double diam = (g.extent().hi - g.extent().lo).norm();
  DensityField rho = DensityField::constant(g, 1.0 / diam);

  InnerSolver inner(opts.p, g.cell_volume());
  std::vector<DiscretePath> active;
  std::vector<std::vector<std::pair<long, double>>> active_coeffs;
  const int batch_F =
      opts.cut_batch > 0
          ? opts.cut_batch
          : std::min<int>(static_cast<int>(F_cells.size()), 128);
  const int batch_E =
      opts.cut_batch > 0
          ? opts.cut_batch
          : std::min<int>(static_cast<int>(E_cells.size()), 128);
  const int cap = opts.max_active_paths > 0
                      ? opts.max_active_paths
                      : std::max(64, 20 * (batch_E + batch_F));
  // cutting rounds cap the inner sweeps; a full-budget finish at the same
  // tolerance runs only if the certificate passes while the gap is still
  // large. The tolerance must stay well below the certificate slack or rho
  // noise keeps the certificate from ever passing.
  const int cut_sweeps = std::min(opts.max_inner_iters, 40);
  // the dual is quadratic around its optimum, so sqrt(eps) is the smallest
  // gap and certificate slack double precision can resolve
  const double adm = std::max(opts.admissibility_tol, 1.5e-8);
  const double cut_tol = std::max(opts.inner_tol, 0.1 * adm);

  ModulusResult r;
  r.density = rho;
  bool converged = false;
  int outer = 0;
  InnerSolver::Solution sol;
  for (; outer < opts.max_outer_iters; ++outer) {
    DiscretePath shortest = shortest_rho_path(graph, E_cells, F_cells, rho);
    double min_len = rho_length(shortest, rho);
    r.min_path_rho_length = min_len;
    // convergence needs both the shortest-path certificate and a small
    // duality gap on the active set; the sweep cap can leave the gap large
    // even when the certificate passes
    if (min_len >= 1.0 - adm && outer > 0) {
      const double scale = std::max(1.0, std::abs(inner.objective(sol.rho)));
      if (std::getenv("PMOD_TRACE"))
        std::fprintf(stderr, "cert %d: min_len=%.12g gap=%.3g iters=%d\n",
                     outer, min_len, sol.gap, sol.iters);
      // primal rescaling noise keeps the measured gap a small multiple of
      // sqrt(eps) even at the exact dual optimum
      if (sol.gap <= std::max(cut_tol, 1e-7) * scale) {
        converged = true;
        break;
      }
      if (sol.iters < cut_sweeps) break;  // inner solve stalled; cannot certify
      sol = inner.solve(cut_tol, opts.max_inner_iters);
      rho = support_to_field(g, inner.support_cells(), sol.rho);
      continue;
    }
    // one cut per F endpoint plus one per E endpoint (the graph is
    // symmetric, so the reverse search reuses the same machinery)
    auto cuts = violated_paths(graph, E_cells, F_cells, rho,
                               1.0 - adm, batch_F);
    auto rev = violated_paths(graph, F_cells, E_cells, rho,
                              1.0 - adm, batch_E);
    cuts.insert(cuts.end(), std::make_move_iterator(rev.begin()),
                std::make_move_iterator(rev.end()));
    if (cuts.empty() && outer == 0) cuts.push_back(shortest);
    bool added = false;
    for (auto& c : cuts) {
      auto coeffs = path_cell_coefficients(c, g);
      std::sort(coeffs.begin(), coeffs.end());
      bool dup = false;
      for (const auto& ac : active_coeffs)
        if (ac == coeffs) { dup = true; break; }
      if (dup) continue;
      inner.add_constraint(coeffs);
      active_coeffs.push_back(std::move(coeffs));
      active.push_back(std::move(c));
      added = true;
    }
    if (!added) break;  // no new information; stop with converged = false
    if (static_cast<int>(active.size()) > cap) {
      // drop oldest zero-multiplier constraints that are not violated;
      // they do not support rho, so they cannot be rediscovered as cuts
      const auto& lam = inner.multipliers();
      std::vector<int> drop;
      for (size_t i = 0; i < active.size() && static_cast<int>(active.size() - drop.size()) > cap; ++i) {
        if (lam[i] > 0.0) continue;
        double len = 0.0;
        for (const auto& [cell, w] : active_coeffs[i]) len += w * rho.at(cell);
        if (len >= 1.0 - adm)
          drop.push_back(static_cast<int>(i));
      }
      std::sort(drop.rbegin(), drop.rend());
      inner.remove_constraints(drop);
      for (int i : drop) {
        active.erase(active.begin() + i);
        active_coeffs.erase(active_coeffs.begin() + i);
      }
    }
    const auto t0 = std::chrono::steady_clock::now();
    sol = inner.solve(cut_tol, cut_sweeps);
    const auto t1 = std::chrono::steady_clock::now();
    rho = support_to_field(g, inner.support_cells(), sol.rho);
    if (std::getenv("PMOD_TRACE"))
      std::fprintf(stderr, "  inner: %.3fs\n",
                   std::chrono::duration<double>(t1 - t0).count());
    if (std::getenv("PMOD_TRACE"))
      std::fprintf(stderr,
                   "outer %d: active=%zu value=%.9g min_len=%.6f gap=%.3g "
                   "inner_iters=%d\n",
                   outer, active.size(), inner.objective(sol.rho),
                   r.min_path_rho_length, sol.gap, sol.iters);
  }
  r.value = inner.objective(sol.rho);
  r.density = rho;
  r.active_paths = active;
  r.outer_iters = outer;
  r.converged = converged;
  return r;
}

ModulusResult compute_modulus(const Family& fam, const CellMask& mask,
                              const SolverOptions& opts) {
  validate_options(opts);
  if (const auto* ex = std::get_if<ExplicitFamily>(&fam))
    return solve_explicit(ex->paths, mask, opts);
  const auto& join = std::get<JoinFamily>(fam);
  std::vector<long> E = rasterize_cells(join.E, mask);
  std::vector<long> F = rasterize_cells(join.F, mask);
  return compute_modulus_cells(mask, E, F, opts);
}

double exact_small_modulus(std::span<const DiscretePath> paths,
                           const CellMask& mask, double p) {
  if (mask.grid.cell_count() > 64)
    throw std::invalid_argument("exact_small_modulus: more than 64 cells");
  if (!(p > 1.0)) throw std::invalid_argument("exact_small_modulus: p <= 1");
  if (paths.empty()) return 0.0;
  for (const auto& pa : paths)
    if (pa.constant() || euclid_length(pa) == 0.0) return kInf;
  InnerSolver inner(p, mask.grid.cell_volume());
  for (const auto& pa : paths)
    inner.add_constraint(path_cell_coefficients(pa, mask.grid));
  auto sol = inner.solve(1e-11, 5000000);
  return sol.value;
}

SubadditivityReport verify_subadditivity(std::span<const Family> families,
                                         const Family& union_fam,
                                         const CellMask& mask,
                                         const SolverOptions& opts) {
  SubadditivityReport rep;
  rep.all_converged = true;
  for (const Family& f : families) {
    auto r = compute_modulus(f, mask, opts);
    rep.parts.push_back(r.value);
    rep.sum_of_parts += r.value;
    rep.all_converged = rep.all_converged && r.converged;
  }
  auto u = compute_modulus(union_fam, mask, opts);
  rep.union_value = u.value;
  rep.all_converged = rep.all_converged && u.converged;
  rep.holds = rep.union_value <=
              rep.sum_of_parts * (1.0 + 1e-6) + 10.0 * opts.admissibility_tol;
  return rep;
}

ScalingReport scaling_check(const JoinFamily& fam, double s,
                            const CellMask& mask, const SolverOptions& opts) {
  if (s <= 0.0) throw std::invalid_argument("scaling_check: s <= 0");
  ScalingReport rep;
  auto base = compute_modulus(Family{fam}, mask, opts);
  rep.base_value = base.value;

  auto scale_domain = [s](const Domain& d) {
    Box b = d.bounding_box();
    return Domain::mapped(
        d, [s](const Point& y) { return Point(y / s); },
        Box{s * b.lo, s * b.hi});
  };
  JoinFamily scaled{scale_domain(fam.E), scale_domain(fam.F),
                    scale_domain(fam.D)};
  Grid sg = mask.grid;
  sg.origin = s * sg.origin;
  sg.h = s * sg.h;
  CellMask smask{sg, mask.bits};
  auto big = compute_modulus(Family{scaled}, smask, opts);
  rep.scaled_value = big.value;
  rep.ratio = big.value / base.value;
  const double n = static_cast<double>(mask.grid.dim());
  rep.predicted = std::pow(s, n - opts.p);
  return rep;
}

}  // namespace pmod
