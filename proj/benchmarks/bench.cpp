#include <benchmark/benchmark.h>

#include "pmod/solver.hpp"

using namespace pmod;

namespace {

CellMask square_mask(int res) {
  const Domain D = Domain::box(make_point({0, 0}), make_point({1, 1}));
  const Domain E = Domain::halfspace(make_point({1, 0}), 0.0);
  const Domain F = Domain::halfspace(make_point({-1, 0}), -1.0);
  const Grid g = Grid::cover(Box{make_point({0, 0}), make_point({1, 1})},
                             1.0 / res, 1);
  return rasterize(Domain::unite(Domain::unite(D, E), F), g);
}

void BM_ComputeModulus(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const CellMask mask = square_mask(res);
  const JoinFamily fam{Domain::halfspace(make_point({1, 0}), 0.0),
                       Domain::halfspace(make_point({-1, 0}), -1.0),
                       Domain::box(make_point({0, 0}), make_point({1, 1}))};
  SolverOptions opts;
  for (auto _ : state) {
    const ModulusResult r = compute_modulus(Family{fam}, mask, opts);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_ComputeModulus)->Arg(16)->Arg(32);

void BM_ShortestPath(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const Domain D = Domain::box(make_point({0, 0}), make_point({1, 1}));
  const Grid g = Grid::cover(D.bounding_box(), 1.0 / res);
  const CellMask mask = rasterize(D, g);
  const GridGraph graph(mask);
  const DensityField ones = DensityField::constant(g, 1.0);
  std::vector<long> E, F;
  for (int j = 0; j < res; ++j) {
    E.push_back(g.index({0, j}));
    F.push_back(g.index({res - 1, j}));
  }
  for (auto _ : state) {
    const DiscretePath p = shortest_rho_path(graph, E, F, ones);
    benchmark::DoNotOptimize(p.v.size());
  }
}
BENCHMARK(BM_ShortestPath)->Arg(64)->Arg(128);

void BM_Rasterize(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const Domain D = Domain::subtract(Domain::ball(make_point({0.0, 0.0}), 1.0),
                                    Domain::ball(make_point({0.3, 0.0}), 0.2));
  const Grid g = Grid::cover(D.bounding_box(), 2.0 / res, 1);
  for (auto _ : state) {
    const CellMask mask = rasterize(D, g);
    benchmark::DoNotOptimize(mask.count());
  }
}
BENCHMARK(BM_Rasterize)->Arg(128)->Arg(256);

void BM_ConnectedComponents(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const Domain D = Domain::subtract(Domain::ball(make_point({0.0, 0.0}), 1.0),
                                    Domain::box(make_point({-0.05, -1.0}),
                                                make_point({0.05, 0.5})));
  const Grid g = Grid::cover(D.bounding_box(), 2.0 / res, 1);
  const CellMask mask = rasterize(D, g);
  for (auto _ : state) {
    const Components c = connected_components(mask);
    benchmark::DoNotOptimize(c.count);
  }
}
BENCHMARK(BM_ConnectedComponents)->Arg(128)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
