#pragma once

#include <span>
#include <vector>

#include "pmod/path.hpp"

namespace pmod {

struct SolverOptions {
  double p = 2.0;                  // exponent, > 1
  int max_outer_iters = 400;       // constraint-generation rounds
  double inner_tol = 1e-6;         // relative duality gap of the inner solve
  double admissibility_tol = 1e-3; // slack on the shortest-path certificate
  int max_active_paths = 0;        // 0 = 20x the per-round cut budget
  int max_inner_iters = 20000;     // coordinate-ascent sweeps per inner solve
  int cut_batch = 0;               // violated constraints added per round and
                                   // per direction; 0 = one per endpoint
};

struct ModulusResult {
  double value = 0.0;  // +infinity when the family contains a constant path
  DensityField density;
  std::vector<DiscretePath> active_paths;
  double min_path_rho_length = 0.0;
  int outer_iters = 0;
  bool converged = false;
};

/// Set cells of the mask whose center lies in `d`.
std::vector<long> rasterize_cells(const Domain& d, const CellMask& mask);

/// M_p of the family over the masked grid by cutting-plane generation:
/// repeatedly add the shortest-rho-path constraints and re-solve
/// min sum rho^p h^n subject to rho-length >= 1 on the active set.
/// A constant path in the family gives +infinity immediately; E and F in
/// different mask components give 0.
ModulusResult compute_modulus(const Family& fam, const CellMask& mask,
                              const SolverOptions& opts);

/// Same, with endpoint sets given directly as mask cells.
ModulusResult compute_modulus_cells(const CellMask& mask,
                                    std::span<const long> E_cells,
                                    std::span<const long> F_cells,
                                    const SolverOptions& opts);

/// Brute-force oracle: solves the full program with every listed path as a
/// constraint to duality gap <= 1e-9. Only for masks with <= 64 cells.
double exact_small_modulus(std::span<const DiscretePath> paths,
                           const CellMask& mask, double p);

struct SubadditivityReport {
  double union_value = 0.0;
  double sum_of_parts = 0.0;
  std::vector<double> parts;
  bool holds = false;
  bool all_converged = false;
};

/// Checks M_p(union of families) <= sum of the per-family moduli.
SubadditivityReport verify_subadditivity(std::span<const Family> families,
                                         const Family& union_fam,
                                         const CellMask& mask,
                                         const SolverOptions& opts);

struct ScalingReport {
  double base_value = 0.0;
  double scaled_value = 0.0;
  double ratio = 0.0;
  double predicted = 0.0;  // s^(n-p)
};

/// Similarity health check: rescales a join family (and its grid) by s and
/// reports M_p(s Gamma) / M_p(Gamma) against the analytic s^(n-p).
ScalingReport scaling_check(const JoinFamily& fam, double s,
                            const CellMask& mask, const SolverOptions& opts);

}  // namespace pmod
