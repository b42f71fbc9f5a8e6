#include "pmod/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace pmod {

double euclid_length(const DiscretePath& p) {
  double len = 0.0;
  for (size_t i = 0; i + 1 < p.v.size(); ++i) len += (p.v[i + 1] - p.v[i]).norm();
  return len;
}

DensityField DensityField::constant(const Grid& g, double value) {
  return DensityField{g, std::vector<double>(static_cast<size_t>(g.cell_count()),
                                             value)};
}

std::vector<std::pair<long, double>> path_cell_coefficients(
    const DiscretePath& p, const Grid& g) {
  std::vector<std::pair<long, double>> coeffs;
  for (size_t i = 0; i + 1 < p.v.size(); ++i) {
    const Point& a = p.v[i];
    const Point& b = p.v[i + 1];
    const double len = (b - a).norm();
    if (len == 0.0) continue;
    const int steps = std::max(1, static_cast<int>(std::ceil(len / (g.h / 2.0))));
    const double dl = len / steps;
    for (int s = 0; s < steps; ++s) {
      const double t = (s + 0.5) / steps;
      const Point mid = a + t * (b - a);
      const long cell = g.cell_at(mid);
      if (cell < 0)
        throw std::invalid_argument("path_cell_coefficients: path leaves grid");
      coeffs.emplace_back(cell, dl);
    }
  }
  // merge duplicates
  std::sort(coeffs.begin(), coeffs.end());
  size_t w = 0;
  for (size_t r = 0; r < coeffs.size(); ++r) {
    if (w > 0 && coeffs[w - 1].first == coeffs[r].first)
      coeffs[w - 1].second += coeffs[r].second;
    else
      coeffs[w++] = coeffs[r];
  }
  coeffs.resize(w);
  return coeffs;
}

double rho_length(const DiscretePath& p, const DensityField& rho) {
  double sum = 0.0;
  for (const auto& [cell, w] : path_cell_coefficients(p, rho.grid))
    sum += w * rho.at(cell);
  return sum;
}

AdmissibilityCheck is_admissible(const DensityField& rho,
                                 std::span<const DiscretePath> sample,
                                 double tol) {
  if (sample.empty())
    throw std::invalid_argument("is_admissible: empty sample");
  AdmissibilityCheck out;
  out.worst_length = std::numeric_limits<double>::infinity();
  for (const DiscretePath& p : sample) {
    const double l = rho_length(p, rho);
    if (l < out.worst_length) {
      out.worst_length = l;
      out.worst = p;
    }
  }
  out.admissible = out.worst_length >= 1.0 - tol;
  return out;
}

DiscretePath push_path(const DiscretePath& p,
                       const std::function<Point(const Point&)>& f,
                       double substep) {
  if (substep <= 0.0) throw std::invalid_argument("push_path: substep <= 0");
  DiscretePath out;
  if (p.v.empty()) return out;
  out.v.push_back(f(p.v[0]));
  for (size_t i = 0; i + 1 < p.v.size(); ++i) {
    const Point& a = p.v[i];
    const Point& b = p.v[i + 1];
    const double len = (b - a).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len / substep)));
    for (int s = 1; s <= steps; ++s) {
      const Point x = a + (static_cast<double>(s) / steps) * (b - a);
      Point y = f(x);
      if ((y - out.v.back()).norm() > 0.0) out.v.push_back(std::move(y));
    }
  }
  return out;
}

GridGraph::GridGraph(const CellMask& mask) : mask_(mask) {
  const long n = mask_.grid.cell_count();
  node_of_.assign(static_cast<size_t>(n), -1);
  for (long idx = 0; idx < n; ++idx) {
    if (mask_.test(idx)) {
      node_of_[static_cast<size_t>(idx)] = static_cast<int>(cells_.size());
      cells_.push_back(idx);
    }
  }
  const int dims = mask_.grid.dim();
  adj_start_.assign(cells_.size() + 1, 0);
  adj_.reserve(cells_.size() * dims);
  std::vector<long> strides(dims);
  {
    long s = 1;
    for (int ax = dims; ax-- > 0;) {
      strides[static_cast<size_t>(ax)] = s;
      s *= mask_.grid.dims[static_cast<size_t>(ax)];
    }
  }
  for (size_t u = 0; u < cells_.size(); ++u) {
    const long cell = cells_[u];
    const std::vector<int> c = mask_.grid.coords(cell);
    for (int ax = 0; ax < dims; ++ax) {
      for (int dir : {-1, +1}) {
        const int cc = c[static_cast<size_t>(ax)] + dir;
        if (cc < 0 || cc >= mask_.grid.dims[static_cast<size_t>(ax)]) continue;
        const long ncell = cell + dir * strides[static_cast<size_t>(ax)];
        const int v = node_of_[static_cast<size_t>(ncell)];
        if (v >= 0) adj_.push_back(v);
      }
    }
    adj_start_[u + 1] = static_cast<int>(adj_.size());
  }
}

std::span<const int> GridGraph::neighbors(int node) const {
  const size_t u = static_cast<size_t>(node);
  return {adj_.data() + adj_start_[u],
          static_cast<size_t>(adj_start_[u + 1] - adj_start_[u])};
}

namespace {

struct SearchState {
  std::vector<double> dist;
  std::vector<int> hops;
  std::vector<int> pred;
};

// Multi-source Dijkstra from E over the graph, weight per edge
// h * (rho_u + rho_v) / 2; lexicographic (dist, hops, cell index) keys keep
// the result deterministic.
SearchState dijkstra(const GridGraph& g, std::span<const long> E_cells,
                     const DensityField& rho) {
  const int n = g.node_count();
  SearchState st;
  st.dist.assign(static_cast<size_t>(n),
                 std::numeric_limits<double>::infinity());
  st.hops.assign(static_cast<size_t>(n), 0);
  st.pred.assign(static_cast<size_t>(n), -1);
  using Key = std::tuple<double, int, long>;  // dist, hops, cell
  std::priority_queue<std::pair<Key, int>, std::vector<std::pair<Key, int>>,
                      std::greater<>>
      pq;
  for (long cell : E_cells) {
    const int u = g.node_of(cell);
    if (u < 0) continue;
    st.dist[static_cast<size_t>(u)] = 0.0;
    pq.push({{0.0, 0, cell}, u});
  }
  const double h = rho.grid.h;
  while (!pq.empty()) {
    const auto [key, u] = pq.top();
    pq.pop();
    const auto [d, hp, cell] = key;
    const size_t ui = static_cast<size_t>(u);
    if (d > st.dist[ui] || (d == st.dist[ui] && hp > st.hops[ui])) continue;
    const double ru = rho.at(g.cell_of(u));
    for (int v : g.neighbors(u)) {
      const double w = h * 0.5 * (ru + rho.at(g.cell_of(v)));
      const double nd = d + w;
      const int nh = hp + 1;
      const size_t vi = static_cast<size_t>(v);
      bool improve = nd < st.dist[vi];
      if (!improve && nd == st.dist[vi] && st.pred[vi] >= 0) {
        // tie break: fewer edges, then smaller predecessor cell index
        improve = nh < st.hops[vi] ||
                  (nh == st.hops[vi] &&
                   g.cell_of(u) < g.cell_of(st.pred[vi]));
      }
      if (improve) {
        st.dist[vi] = nd;
        st.hops[vi] = nh;
        st.pred[vi] = u;
        pq.push({{nd, nh, g.cell_of(v)}, v});
      }
    }
  }
  return st;
}

DiscretePath extract_path(const GridGraph& g, const SearchState& st, int end) {
  std::vector<int> nodes;
  for (int u = end; u >= 0; u = st.pred[static_cast<size_t>(u)])
    nodes.push_back(u);
  std::reverse(nodes.begin(), nodes.end());
  DiscretePath p;
  p.v.reserve(nodes.size());
  for (int u : nodes) p.v.push_back(g.mask().grid.cell_center(g.cell_of(u)));
  return p;
}

}  // namespace

DiscretePath shortest_rho_path(const GridGraph& graph,
                               std::span<const long> E_cells,
                               std::span<const long> F_cells,
                               const DensityField& rho) {
  auto st = dijkstra(graph, E_cells, rho);
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  long best_cell = std::numeric_limits<long>::max();
  for (long cell : F_cells) {
    const int u = graph.node_of(cell);
    if (u < 0) continue;
    const double d = st.dist[static_cast<size_t>(u)];
    if (d < best_d || (d == best_d && cell < best_cell)) {
      best = u;
      best_d = d;
      best_cell = cell;
    }
  }
  if (best < 0 || !std::isfinite(best_d))
    throw std::runtime_error("disconnected family");
  return extract_path(graph, st, best);
}

std::vector<DiscretePath> violated_paths(const GridGraph& graph,
                                         std::span<const long> E_cells,
                                         std::span<const long> F_cells,
                                         const DensityField& rho,
                                         double threshold, int max_count) {
  auto st = dijkstra(graph, E_cells, rho);
  std::vector<std::pair<double, int>> ends;  // dist, node
  for (long cell : F_cells) {
    const int u = graph.node_of(cell);
    if (u < 0) continue;
    const double d = st.dist[static_cast<size_t>(u)];
    if (std::isfinite(d) && d < threshold) ends.emplace_back(d, u);
  }
  std::sort(ends.begin(), ends.end(),
            [&](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first < b.first;
              return graph.cell_of(a.second) < graph.cell_of(b.second);
            });
  // stratified thinning keeps the most violated endpoint and an even
  // spread over the rest, instead of one tight cluster
  const int total = static_cast<int>(ends.size());
  if (total > max_count) {
    std::vector<std::pair<double, int>> picked;
    picked.reserve(static_cast<size_t>(max_count));
    for (int i = 0; i < max_count; ++i)
      picked.push_back(
          ends[static_cast<size_t>(static_cast<long>(i) * total / max_count)]);
    ends = std::move(picked);
  }
  std::vector<DiscretePath> out;
  out.reserve(ends.size());
  for (const auto& [d, u] : ends) out.push_back(extract_path(graph, st, u));
  return out;
}

bool reachable(const GridGraph& graph, std::span<const long> E_cells,
               std::span<const long> F_cells) {
  DensityField zero = DensityField::constant(graph.mask().grid, 0.0);
  auto st = dijkstra(graph, E_cells, zero);
  for (long cell : F_cells) {
    const int u = graph.node_of(cell);
    if (u >= 0 && std::isfinite(st.dist[static_cast<size_t>(u)])) return true;
  }
  return false;
}

void write_path_csv(std::ostream& os, const DiscretePath& p) {
  for (const Point& x : p.v) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (i) os << ',';
      os << x[i];
    }
    os << '\n';
  }
}

}  // namespace pmod
