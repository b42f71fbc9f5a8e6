#pragma once

#include <cstdint>
#include <vector>

#include "pmod/domain.hpp"
#include "pmod/geometry.hpp"

namespace pmod {

/// Uniform cell-centered grid. Cell (i_0,...,i_{n-1}) has center
/// origin + (i + 1/2) h per axis; linear indices are row-major with the
/// last axis fastest.
struct Grid {
  Point origin;
  double h = 1.0;
  std::vector<int> dims;

  int dim() const { return static_cast<int>(dims.size()); }
  long cell_count() const;
  double cell_volume() const;

  long index(const std::vector<int>& c) const;
  std::vector<int> coords(long idx) const;
  Point cell_center(long idx) const;
  /// Linear index of the cell containing x, or -1 if outside the grid.
  long cell_at(const Point& x) const;
  Box extent() const;

  /// Smallest grid of spacing h whose extent covers `b`, plus `pad` extra
  /// cell layers on every side.
  static Grid cover(const Box& b, double h, int pad = 0);
};

struct CellMask {
  Grid grid;
  std::vector<std::uint8_t> bits;  // 1 = cell center inside the domain

  bool test(long idx) const { return bits[static_cast<size_t>(idx)] != 0; }
  long count() const;
};

/// Membership sampled at cell centers only.
CellMask rasterize(const Domain& d, const Grid& g);

struct Components {
  std::vector<int> labels;  // 1..count on set cells, 0 elsewhere
  int count = 0;
};

/// Face-adjacent (2n-neighborhood) flood fill.
Components connected_components(const CellMask& m);

/// Lebesgue measure of one labeled component: cell count times h^n.
double component_measure(const CellMask& m, const Components& comps, int label);

/// Set cells with at least one unset or out-of-grid face neighbor.
CellMask boundary_cells(const CellMask& m);

}  // namespace pmod
