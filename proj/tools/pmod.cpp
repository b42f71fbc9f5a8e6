#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "pmod/experiments.hpp"
#include "pmod/qc_maps.hpp"

using nlohmann::json;

namespace {

struct Options {
  std::string input;
  std::string output;
  double p = 2.0;
  int res = 32;
  unsigned seed = 1;
  double tol = 1e-6;
};

json load_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file: " + path);
  json j;
  in >> j;
  return j;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text << '\n';
}

json finite_or_tag(double v) {
  if (std::isinf(v)) return json("inf");
  return json(v);
}

pmod::Point point_from_json(const json& j, const char* where) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(std::string("expected point array at ") +
                                where);
  pmod::Point x(static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) x[static_cast<long>(i)] = j[i].get<double>();
  return x;
}

pmod::Grid grid_for(const pmod::Box& bb, int res) {
  if (res < 4) throw std::invalid_argument("resolution must be >= 4");
  const double h = (bb.hi - bb.lo).maxCoeff() / res;
  return pmod::Grid::cover(bb, h, 2);
}

pmod::SolverOptions solver_options(const Options& o) {
  pmod::SolverOptions so;
  so.p = o.p;
  so.admissibility_tol = o.tol;
  return so;
}

int run_modulus(const Options& o) {
  const json in = load_input(o.input);
  const pmod::Domain D = pmod::Domain::from_json(in.at("D"));
  const pmod::Domain E = pmod::Domain::from_json(in.at("E"));
  const pmod::Domain F = pmod::Domain::from_json(in.at("F"));
  const pmod::Domain all = pmod::Domain::unite(pmod::Domain::unite(D, E), F);
  pmod::Box bb = D.bounding_box();
  const pmod::CellMask mask = pmod::rasterize(all, grid_for(bb, o.res));
  const pmod::JoinFamily fam{E, F, D};
  const pmod::ModulusResult r =
      pmod::compute_modulus(pmod::Family{fam}, mask, solver_options(o));
  json out{{"command", "modulus"},
           {"p", o.p},
           {"res", o.res},
           {"value", finite_or_tag(r.value)},
           {"min_path_rho_length", finite_or_tag(r.min_path_rho_length)},
           {"outer_iters", r.outer_iters},
           {"active_paths", r.active_paths.size()},
           {"converged", r.converged}};
  write_output(o.output, out.dump(2));
  return r.converged ? 0 : 2;
}

int run_bounds(const Options& o) {
  const json in = load_input(o.input);
  const int n = in.at("n").get<int>();
  const double p = in.contains("p") ? in.at("p").get<double>() : o.p;
  const double a = in.at("a").get<double>();
  const double b = in.at("b").get<double>();
  pmod::BoundParams params;
  params.n = n;
  params.p = p;
  params.b_np = in.contains("b_np") ? in.at("b_np").get<double>()
                                    : pmod::calibrate_b_np(n, p);
  params.K_np = in.contains("K_np") ? in.at("K_np").get<double>() : 1.0;
  json out{{"command", "bounds"},
           {"n", n},
           {"p", p},
           {"b_np", params.b_np},
           {"K_np", params.K_np},
           {"ring_lower_bound", pmod::ring_lower_bound(params, a, b)},
           {"spherical_ring_exact", pmod::spherical_ring_exact(n, p, a, b)}};
  if (in.contains("r")) {
    const double r = in.at("r").get<double>();
    out["theorem1_bound"] = pmod::theorem1_bound(params, r);
  }
  write_output(o.output, out.dump(2));
  return 0;
}

int run_qcmap(const Options& o, double d0, double d1, int n, int samples) {
  const pmod::ConeStretchMap m = pmod::ConeStretchMap::canonical(n, d0, d1);
  const pmod::DilatationReport rep =
      pmod::verify_dilatation_bound(m, o.p, samples, o.seed);
  json out{{"command", "qcmap"},
           {"d0", d0},
           {"d1", d1},
           {"n", n},
           {"p", rep.p},
           {"bound", rep.bound},
           {"max_K_I", rep.max_K_I},
           {"samples", rep.samples.size()},
           {"pass", rep.pass}};
  write_output(o.output, out.dump(2));
  return rep.pass ? 0 : 2;
}

pmod::AccessibilityScenario scenario_from_json(const json& in) {
  pmod::AccessibilityScenario s{pmod::Domain::from_json(in.at("D")),
                                point_from_json(in.at("x0"), "x0"),
                                pmod::Domain::from_json(in.at("U")),
                                pmod::Domain::from_json(in.at("V")),
                                pmod::Domain::from_json(in.at("E"))};
  return s;
}

int run_probe(const Options& o) {
  const json in = load_input(o.input);
  const std::string kind = in.at("probe").get<std::string>();
  const pmod::SolverOptions so = solver_options(o);

  if (kind == "delta") {
    const auto s = scenario_from_json(in);
    const int num_F = in.value("num_F", 10);
    const pmod::CellMask mask =
        pmod::rasterize(s.D, grid_for(s.D.bounding_box(), o.res));
    const auto r = pmod::estimate_delta(s, o.p, mask, so, num_F, o.seed);
    json out{{"command", "probe"},        {"probe", "delta"},
             {"delta", r.delta},          {"moduli", r.moduli},
             {"generated", r.generated},  {"skipped", r.skipped},
             {"infinite", r.infinite},    {"all_converged", r.all_converged}};
    write_output(o.output, out.dump(2));
    return r.all_converged ? 0 : 2;
  }
  if (kind == "swap") {
    const auto s = scenario_from_json(in);
    const pmod::Domain E_star = pmod::Domain::from_json(in.at("E_star"));
    const int num_F = in.value("num_F", 10);
    const double b_np = in.value("b_np", 1.0);
    const pmod::CellMask mask =
        pmod::rasterize(s.D, grid_for(s.D.bounding_box(), o.res));
    const auto r = pmod::continuum_swap_check(s, E_star, o.p, mask, so, num_F,
                                              o.seed, b_np);
    json out{{"command", "probe"},
             {"probe", "swap"},
             {"r", r.r},
             {"q", r.q},
             {"delta", r.delta},
             {"delta_i", r.delta_i},
             {"ring_r", r.ring_r},
             {"ring_2r", r.ring_2r},
             {"delta_star", r.delta_star},
             {"empirical_min", finite_or_tag(r.empirical_min)},
             {"infinite", r.infinite},
             {"holds", r.holds},
             {"all_converged", r.all_converged}};
    write_output(o.output, out.dump(2));
    return r.all_converged ? 0 : 2;
  }
  if (kind == "uniformity") {
    const pmod::Domain D = pmod::Domain::from_json(in.at("D"));
    const double r = in.at("r").get<double>();
    const int num_pairs = in.value("num_pairs", 8);
    const pmod::CellMask mask =
        pmod::rasterize(D, grid_for(D.bounding_box(), o.res));
    const auto rep =
        pmod::uniformity_probe(D, o.p, r, mask, so, num_pairs, o.seed);
    json out{{"command", "probe"},
             {"probe", "uniformity"},
             {"r", rep.r},
             {"delta", rep.delta},
             {"pairs", rep.pairs},
             {"all_converged", rep.all_converged}};
    write_output(o.output, out.dump(2));
    return rep.all_converged ? 0 : 2;
  }
  if (kind == "vanishing") {
    const pmod::Domain comb_dom = pmod::Domain::from_json(in.at("comb"));
    const pmod::CombParams* cp = comb_dom.comb_params();
    if (cp == nullptr)
      throw std::invalid_argument("probe vanishing: \"comb\" must be a comb domain");
    const pmod::Point x0 = point_from_json(in.at("x0"), "x0");
    const double r = in.at("r").get<double>();
    const double r0 = in.at("r0").get<double>();
    const pmod::Domain F = pmod::Domain::from_json(in.at("F"));
    std::vector<int> ks;
    for (const auto& k : in.at("k_range")) ks.push_back(k.get<int>());
    const pmod::CellMask mask = pmod::rasterize(
        pmod::Domain::unite(comb_dom, F),
        grid_for(pmod::Box::hull(comb_dom.bounding_box(), F.bounding_box()),
                 o.res));
    const auto rep = pmod::vanishing_modulus_probe(*cp, x0, r, r0, F, o.p,
                                                   mask, so, ks);
    const bool csv = o.output.size() > 4 &&
                     o.output.rfind(".csv") == o.output.size() - 4;
    if (csv) {
      std::ostringstream os;
      pmod::write_trend_csv(os, rep);
      std::string text = os.str();
      if (!text.empty() && text.back() == '\n') text.pop_back();
      write_output(o.output, text);
    } else {
      json entries = json::array();
      for (const auto& e : rep.entries)
        entries.push_back({{"k", e.k},
                           {"measure", e.measure},
                           {"bound", e.bound},
                           {"solver_value", e.solver_value},
                           {"measure_small", e.measure_small},
                           {"density_admissible", e.density_admissible},
                           {"converged", e.converged}});
      json out{{"command", "probe"},
               {"probe", "vanishing"},
               {"r", rep.r},
               {"r0", rep.r0},
               {"entries", entries},
               {"bound_monotone", rep.bound_monotone},
               {"solver_monotone", rep.solver_monotone},
               {"solver_below_bound", rep.solver_below_bound}};
      write_output(o.output, out.dump(2));
    }
    for (const auto& e : rep.entries)
      if (!e.converged) return 2;
    return 0;
  }
  throw std::invalid_argument("unknown probe kind: " + kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-modulus toolkit"};
  app.require_subcommand(1);

  Options o;
  double d0 = 1.0, d1 = 2.0;
  int map_n = 2, samples = 1000;
  bool verify_bound = false;

  auto add_common = [&](CLI::App* cmd, bool needs_input) {
    auto* in = cmd->add_option("--input", o.input, "input JSON file");
    if (needs_input) in->required();
    cmd->add_option("--output", o.output, "output file (default: stdout)");
    cmd->add_option("--p", o.p, "modulus exponent")->check(CLI::Range(1.0 + 1e-12, 1e6));
    cmd->add_option("--res", o.res, "cells across the domain")->check(CLI::Range(4, 4096));
    cmd->add_option("--seed", o.seed, "sampler seed");
    cmd->add_option("--tol", o.tol, "admissibility tolerance");
  };

  auto* modulus = app.add_subcommand("modulus", "p-modulus of a join family");
  add_common(modulus, true);
  auto* bounds = app.add_subcommand("bounds", "analytic bounds and oracles");
  add_common(bounds, true);
  auto* qcmap = app.add_subcommand("qcmap", "cone-stretch dilatation checks");
  add_common(qcmap, false);
  qcmap->add_flag("--verify-bound", verify_bound, "run the dilatation sweep");
  qcmap->add_option("--d0", d0, "inner cone height");
  qcmap->add_option("--d1", d1, "outer cone height");
  qcmap->add_option("--n", map_n, "dimension")->check(CLI::Range(2, 8));
  qcmap->add_option("--samples", samples, "sample budget");
  auto* probe = app.add_subcommand("probe", "accessibility experiments");
  add_common(probe, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*modulus) return run_modulus(o);
    if (*bounds) return run_bounds(o);
    if (*qcmap) {
      if (!verify_bound) {
        std::cerr << "qcmap: nothing to do (use --verify-bound)\n";
        return 1;
      }
      return run_qcmap(o, d0, d1, map_n, samples);
    }
    if (*probe) return run_probe(o);
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << " (see docs/schema.md)\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << " (see docs/schema.md)\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 3;
}
