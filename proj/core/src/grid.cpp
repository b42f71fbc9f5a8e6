#include "pmod/grid.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace pmod {

long Grid::cell_count() const {
  long n = 1;
  for (int d : dims) n *= d;
  return n;
}

double Grid::cell_volume() const { return std::pow(h, dim()); }

long Grid::index(const std::vector<int>& c) const {
  long idx = 0;
  for (size_t i = 0; i < dims.size(); ++i) {
    idx = idx * dims[i] + c[i];
  }
  return idx;
}

std::vector<int> Grid::coords(long idx) const {
  std::vector<int> c(dims.size());
  for (size_t i = dims.size(); i-- > 0;) {
    c[i] = static_cast<int>(idx % dims[i]);
    idx /= dims[i];
  }
  return c;
}

Point Grid::cell_center(long idx) const {
  std::vector<int> c = coords(idx);
  Point p(dim());
  for (int i = 0; i < dim(); ++i) p[i] = origin[i] + (c[i] + 0.5) * h;
  return p;
}

long Grid::cell_at(const Point& x) const {
  long idx = 0;
  for (int i = 0; i < dim(); ++i) {
    const double f = (x[i] - origin[i]) / h;
    const int c = static_cast<int>(std::floor(f));
    if (c < 0 || c >= dims[i]) return -1;
    idx = idx * dims[i] + c;
  }
  return idx;
}

Box Grid::extent() const {
  Point hi(dim());
  for (int i = 0; i < dim(); ++i) hi[i] = origin[i] + dims[i] * h;
  return Box{origin, hi};
}

Grid Grid::cover(const Box& b, double h, int pad) {
  if (h <= 0.0) throw std::invalid_argument("Grid::cover: h <= 0");
  Grid g;
  g.h = h;
  g.origin = b.lo - Point::Constant(b.dim(), pad * h);
  g.dims.resize(b.dim());
  for (int i = 0; i < b.dim(); ++i) {
    const double len = b.hi[i] - b.lo[i];
    g.dims[i] = std::max(1, static_cast<int>(std::ceil(len / h - 1e-12))) +
                2 * pad;
  }
  return g;
}

long CellMask::count() const {
  long c = 0;
  for (auto b : bits) c += b;
  return c;
}

CellMask rasterize(const Domain& d, const Grid& g) {
  Box db = d.bounding_box();
  Box ge = g.extent();
  for (int i = 0; i < g.dim(); ++i) {
    // unbounded primitives (halfspaces) carry sentinel boxes; clip those
    if (db.lo[i] > -1e29 && db.lo[i] < ge.lo[i] - 1e-9)
      throw std::invalid_argument("rasterize: grid does not cover domain");
    if (db.hi[i] < 1e29 && db.hi[i] > ge.hi[i] + 1e-9)
      throw std::invalid_argument("rasterize: grid does not cover domain");
  }
  CellMask m{g, std::vector<std::uint8_t>(static_cast<size_t>(g.cell_count()), 0)};
  const long n = g.cell_count();
  for (long idx = 0; idx < n; ++idx)
    m.bits[static_cast<size_t>(idx)] = d.contains(g.cell_center(idx)) ? 1 : 0;
  return m;
}

namespace {

// face neighbors of idx; returns count, fills out
int face_neighbors(const Grid& g, long idx, long* out) {
  std::vector<int> c = g.coords(idx);
  int cnt = 0;
  for (size_t ax = 0; ax < g.dims.size(); ++ax) {
    long stride = 1;
    for (size_t j = ax + 1; j < g.dims.size(); ++j) stride *= g.dims[j];
    if (c[ax] > 0) out[cnt++] = idx - stride;
    if (c[ax] + 1 < g.dims[ax]) out[cnt++] = idx + stride;
  }
  return cnt;
}

}  // namespace

Components connected_components(const CellMask& m) {
  const long n = m.grid.cell_count();
  Components comps;
  comps.labels.assign(static_cast<size_t>(n), 0);
  std::vector<long> nb(2 * m.grid.dims.size());
  std::deque<long> queue;
  for (long seed = 0; seed < n; ++seed) {
    if (!m.test(seed) || comps.labels[static_cast<size_t>(seed)] != 0) continue;
    const int label = ++comps.count;
    comps.labels[static_cast<size_t>(seed)] = label;
    queue.push_back(seed);
    while (!queue.empty()) {
      const long cur = queue.front();
      queue.pop_front();
      const int cnt = face_neighbors(m.grid, cur, nb.data());
      for (int i = 0; i < cnt; ++i) {
        const long v = nb[i];
        if (m.test(v) && comps.labels[static_cast<size_t>(v)] == 0) {
          comps.labels[static_cast<size_t>(v)] = label;
          queue.push_back(v);
        }
      }
    }
  }
  return comps;
}

double component_measure(const CellMask& m, const Components& comps,
                         int label) {
  if (label < 1 || label > comps.count)
    throw std::invalid_argument("component_measure: unknown label");
  long cells = 0;
  for (int l : comps.labels) cells += (l == label);
  return cells * m.grid.cell_volume();
}

CellMask boundary_cells(const CellMask& m) {
  CellMask out{m.grid,
               std::vector<std::uint8_t>(m.bits.size(), 0)};
  const long n = m.grid.cell_count();
  std::vector<long> nb(2 * m.grid.dims.size());
  for (long idx = 0; idx < n; ++idx) {
    if (!m.test(idx)) continue;
    const int cnt = face_neighbors(m.grid, idx, nb.data());
    bool bnd = cnt < 2 * m.grid.dim();  // touches the grid hull
    for (int i = 0; i < cnt && !bnd; ++i) bnd = !m.test(nb[i]);
    out.bits[static_cast<size_t>(idx)] = bnd ? 1 : 0;
  }
  return out;
}

}  // namespace pmod
