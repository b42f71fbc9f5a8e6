#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "pmod/bounds.hpp"
#include "pmod/solver.hpp"

namespace pmod {

/// Accessibility probe at a boundary point x0 of D: E is the fixed compact
/// probe set, test continua F are generated crossing the shell between the
/// neighborhoods U and V of x0.
struct AccessibilityScenario {
  Domain D;
  Point x0;
  Domain U;
  Domain V;
  Domain E;

  /// Checks V subset U and x0 adjacent to D at the mask's grid scale.
  void validate(const CellMask& mask) const;
};

/// Grid continua generated as one-cell-thick shortest paths (even indices)
/// or rasterized straight segments (odd indices) between random cells of the
/// discrete boundaries of U and V, thickened by one cell layer. Instances
/// that leave the mask are skipped.
std::vector<std::vector<long>> generate_F_sets(const AccessibilityScenario& s,
                                               const CellMask& mask, int num_F,
                                               unsigned seed);

struct ProbeResult {
  std::vector<double> moduli;  // converged finite instances only
  double delta = 0.0;          // min of moduli, the empirical accessibility constant
  int generated = 0;
  int skipped = 0;
  int infinite = 0;  // instances with F meeting E
  bool all_converged = true;
};

/// Empirical delta of Gamma(E, F, D) over num_F generated continua F.
ProbeResult estimate_delta(const AccessibilityScenario& s, double p,
                           const CellMask& mask, const SolverOptions& opts,
                           int num_F, unsigned seed = 1);

struct SwapReport {
  double r = 0.0;               // covering-ball radius
  int q = 0;                    // number of covering balls
  double delta = 0.0;           // empirical accessibility constant of (U,V,E)
  std::vector<double> delta_i;  // per-ball moduli M_p(Gamma(E_i, E*, D))
  double ring_r = 0.0;          // ring lower bound on (r, 2r)
  double ring_2r = 0.0;         // ring lower bound on (2r, 4r)
  double delta_star = 0.0;
  double empirical_min = 0.0;  // min over F of M_p(Gamma(E*, F, D))
  int infinite = 0;            // F instances meeting E*, excluded from the min
  bool holds = false;          // empirical_min >= delta_star
  bool all_converged = true;
};

/// Swaps the probe continuum: covers E by q balls of radius choose_r, takes
/// the per-ball moduli against E*, forms delta_star, and verifies that every
/// generated F still gives M_p(Gamma(E*, F, D)) >= delta_star.
SwapReport continuum_swap_check(const AccessibilityScenario& s,
                                const Domain& E_star, double p,
                                const CellMask& mask, const SolverOptions& opts,
                                int num_F, unsigned seed = 1,
                                double b_np = 1.0);

struct UniformityReport {
  double r = 0.0;
  double delta = 0.0;  // min modulus over sampled pairs
  int pairs = 0;       // pairs actually evaluated
  bool all_converged = true;
};

/// Samples num_pairs pairs of grid-connected sets of spherical diameter
/// >= r inside D and reports the minimal joining modulus.
UniformityReport uniformity_probe(const Domain& D, double p, double r,
                                  const CellMask& mask,
                                  const SolverOptions& opts, int num_pairs,
                                  unsigned seed = 1);

struct VanishingEntry {
  int k = 0;
  double measure = 0.0;       // m(E_k)
  double bound = 0.0;         // m(E_k) / (r0 - r)^p
  double solver_value = 0.0;  // M_p of the E_k-crossing subfamily
  bool measure_small = false; // m(E_k) < 1/k
  bool density_admissible = false;
  bool converged = false;
};

struct VanishingReport {
  double r = 0.0;
  double r0 = 0.0;
  std::vector<VanishingEntry> entries;
  bool bound_monotone = false;   // analytic bounds decrease over k
  bool solver_monotone = false;  // solver values decrease over k
  bool solver_below_bound = false;
};

/// Per-tooth moduli of the comb near its corner x0: component E_k of
/// B(x0, r0) cap D is identified through the tooth anchor, the density
/// 1/(r0 - r) on E_k is checked admissible for paths from E_k cap B(x0, r)
/// to F, and the solver value is compared to m(E_k)/(r0 - r)^p.
VanishingReport vanishing_modulus_probe(const CombParams& comb,
                                        const Point& x0, double r, double r0,
                                        const Domain& F, double p,
                                        const CellMask& mask,
                                        const SolverOptions& opts,
                                        std::span<const int> k_range);

/// k, measure, bound, solver_value rows.
void write_trend_csv(std::ostream& os, const VanishingReport& rep);

}  // namespace pmod
