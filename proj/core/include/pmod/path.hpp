#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "pmod/grid.hpp"

namespace pmod {

/// Polyline through points (typically cell centers). A single vertex is the
/// constant path.
struct DiscretePath {
  std::vector<Point> v;
  bool constant() const { return v.size() <= 1; }
};

double euclid_length(const DiscretePath& p);

/// Nonnegative density per cell center; the rho of the admissibility
/// condition.
struct DensityField {
  Grid grid;
  std::vector<double> values;

  static DensityField constant(const Grid& g, double value);
  double at(long cell) const { return values[static_cast<size_t>(cell)]; }
};

/// Quadrature weights of a path against the grid: midpoint sampling with
/// sub-steps of length <= h/2. rho_length(p, rho) equals the dot product of
/// these coefficients with rho. Throws if the path leaves the grid extent.
std::vector<std::pair<long, double>> path_cell_coefficients(
    const DiscretePath& p, const Grid& g);

double rho_length(const DiscretePath& p, const DensityField& rho);

struct AdmissibilityCheck {
  bool admissible = false;
  double worst_length = 0.0;
  DiscretePath worst;
};

/// True iff rho_length >= 1 - tol for every sampled path; reports the
/// minimizing path.
AdmissibilityCheck is_admissible(const DensityField& rho,
                                 std::span<const DiscretePath> sample,
                                 double tol);

/// Vertex-wise image of a path, with each segment subdivided into steps of
/// length <= substep before mapping so the image tracks the curved map.
DiscretePath push_path(const DiscretePath& p,
                       const std::function<Point(const Point&)>& f,
                       double substep);

/// Path family: either an explicit list or Gamma(E, F, D) given by endpoint
/// domains inside D.
struct ExplicitFamily {
  std::vector<DiscretePath> paths;
};
struct JoinFamily {
  Domain E;
  Domain F;
  Domain D;
};
using Family = std::variant<ExplicitFamily, JoinFamily>;

/// Nodes are the set cells of a mask; edges join face-adjacent set cells and
/// have Euclidean length h.
class GridGraph {
 public:
  explicit GridGraph(const CellMask& mask);

  const CellMask& mask() const { return mask_; }
  int node_count() const { return static_cast<int>(cells_.size()); }
  long cell_of(int node) const { return cells_[static_cast<size_t>(node)]; }
  int node_of(long cell) const { return node_of_[static_cast<size_t>(cell)]; }

  /// Up to 2n neighbors of a node, in fixed axis order.
  std::span<const int> neighbors(int node) const;

 private:
  CellMask mask_;
  std::vector<long> cells_;
  std::vector<int> node_of_;
  std::vector<int> adj_;        // flattened neighbor lists
  std::vector<int> adj_start_;  // size node_count()+1
};

/// Path from some E-cell to some F-cell minimizing rho-length over grid
/// paths. Edge weight is the mean of the endpoint densities times h; ties
/// are broken by fewer edges, then by smaller cell index.
/// Throws "disconnected family" when no F-cell is reachable from E.
DiscretePath shortest_rho_path(const GridGraph& graph,
                               std::span<const long> E_cells,
                               std::span<const long> F_cells,
                               const DensityField& rho);

/// Batch oracle for the solver: one multi-source search from E, then the
/// per-F-endpoint shortest paths with rho-length < threshold, most violated
/// first, at most max_count of them. Returns an empty list when even the
/// globally shortest path meets the threshold.
std::vector<DiscretePath> violated_paths(const GridGraph& graph,
                                         std::span<const long> E_cells,
                                         std::span<const long> F_cells,
                                         const DensityField& rho,
                                         double threshold, int max_count);

/// True iff some F-cell is reachable from E within the graph.
bool reachable(const GridGraph& graph, std::span<const long> E_cells,
               std::span<const long> F_cells);

/// One vertex per row: x_0,...,x_{n-1}.
void write_path_csv(std::ostream& os, const DiscretePath& p);

}  // namespace pmod
