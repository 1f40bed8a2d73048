#include "nlsurf/surface_terms.hpp"

#include <cmath>
#include <limits>

#include "nlsurf/quadrature.hpp"

namespace nlsurf {

std::string to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::AdjacencyTC: return "adjacency_tc";
    case SurfaceKind::AdjacencyTL: return "adjacency_tl";
    case SurfaceKind::PeriodicMinusFree: return "periodic_minus_free";
    case SurfaceKind::SurfacePressureFree: return "surface_pressure_free";
    case SurfaceKind::SurfacePressurePeriodic: return "surface_pressure_periodic";
  }
  return "unknown";
}

namespace {

// ln Z of a lattice whose bonds draw their disorder from the primary lattice via `map`.
struct LogTerm {
  LatticeSpec lattice;
  std::vector<std::size_t> map;
  double coeff = 1.0;
};

// coeff * (offset + int_0^1 [<S_C>_t] dt) on `lattice`, corridor interpolated as sqrt(t).
struct CorridorTerm {
  LatticeSpec lattice;
  std::vector<std::size_t> map;
  Corridor corridor;
  double coeff = 1.0;
  double offset = 1.0;
  std::optional<std::size_t> center_bond;
};

struct Problem {
  SurfaceKind kind = SurfaceKind::AdjacencyTL;
  Geometry geometry;
  double x = 0.0;
  std::size_t primary_bonds = 0;
  std::size_t primary_sites = 0;
  std::vector<LogTerm> direct;
  std::vector<CorridorTerm> integral;
  double unit = 1.0;  // per-unit-surface divisor
};

std::vector<std::size_t> identity_map(std::size_t n) {
  std::vector<std::size_t> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = i;
  return m;
}

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

void check_x(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("surface terms: x must be finite and >= 0");
}

std::size_t center_corridor_bond(const LatticeSpec& box, const Corridor& corridor) {
  const double mid = 0.5 * (box.side - 1);
  std::size_t best = corridor.bond_indices.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (auto bi : corridor.bond_indices) {
    const Bond& b = box.bonds[bi];
    const auto c = box.coords(b.origin);
    double d2 = 0.0;
    for (std::size_t mu = 0; mu < c.size(); ++mu) {
      const double pos = c[mu] + (static_cast<int>(mu) == b.direction ? 0.5 : 0.0);
      d2 += (pos - mid) * (pos - mid);
    }
    if (d2 < best_d - 1e-12) {
      best_d = d2;
      best = bi;
    }
  }
  return best;
}

Problem adjacency_problem(const LatticeSpec& box, const Decomposition& dec, double x) {
  check_x(x);
  Problem p;
  p.x = x;
  p.primary_bonds = box.n_bonds();
  p.primary_sites = box.n_sites;
  p.direct.push_back({box, identity_map(box.n_bonds()), 1.0});
  for (const auto& sb : dec.sub_boxes) p.direct.push_back({sb.lattice, sb.bond_map, -1.0});
  const double c = static_cast<double>(dec.corridor.cardinality());
  p.integral.push_back({box, identity_map(box.n_bonds()), dec.corridor, c * x * x / 2.0, 1.0,
                        center_corridor_bond(box, dec.corridor)});
  p.geometry = {box.dim, box.side / 2, 0, dec.corridor.cardinality()};
  return p;
}

Problem adjacency_box_problem(int dim, int L, double x) {
  const auto box = build_lattice(dim, 2 * L, Boundary::Free);
  auto p = adjacency_problem(box, decompose_box(box), x);
  p.kind = SurfaceKind::AdjacencyTL;
  p.unit = ipow(L, dim - 1);
  return p;
}

LatticeOptions torus_options(int side) { return LatticeOptions{side == 2}; }

Problem periodic_minus_free_problem(int dim, int L, double x) {
  check_x(x);
  const auto torus = build_lattice(dim, L, Boundary::Periodic, torus_options(L));
  const auto unfolded = unfold_torus(torus);
  Problem p;
  p.kind = SurfaceKind::PeriodicMinusFree;
  p.x = x;
  p.primary_bonds = torus.n_bonds();
  p.primary_sites = torus.n_sites;
  p.direct.push_back({torus, identity_map(torus.n_bonds()), 1.0});
  p.direct.push_back({unfolded.box, unfolded.bond_map, -1.0});
  const double c = static_cast<double>(unfolded.cut.cardinality());
  p.integral.push_back({torus, identity_map(torus.n_bonds()), unfolded.cut, c * x * x / 2.0, 1.0, {}});
  p.geometry = {dim, L, 0, unfolded.cut.cardinality()};
  p.unit = ipow(L, dim - 1);
  return p;
}

Problem surface_free_problem(int dim, int L, double x, int k) {
  check_x(x);
  const auto tt = tiling_interfaces(dim, L, k);
  const double inv = 1.0 / ipow(k, dim);
  Problem p;
  p.kind = SurfaceKind::SurfacePressureFree;
  p.x = x;
  p.primary_bonds = tt.torus.n_bonds();
  p.primary_sites = tt.torus.n_sites;
  p.direct.push_back({tt.torus, identity_map(tt.torus.n_bonds()), -inv});
  for (const auto& sb : tt.tiles.sub_boxes) p.direct.push_back({sb.lattice, sb.bond_map, inv});
  const double c = static_cast<double>(tt.tiles.corridor.cardinality());
  p.integral.push_back({tt.torus, identity_map(tt.torus.n_bonds()), tt.tiles.corridor,
                        -inv * c * x * x / 2.0, 1.0, {}});
  p.geometry = {dim, L, k, tt.tiles.corridor.cardinality()};
  p.unit = ipow(L, dim - 1);
  return p;
}

Problem surface_periodic_problem(int dim, int L, double x, int k) {
  check_x(x);
  const auto tt = tiling_interfaces(dim, L, k);
  const auto small = build_lattice(dim, L, Boundary::Periodic, torus_options(L));
  const auto small_map = embed_bonds(tt.torus, small, std::vector<int>(static_cast<std::size_t>(dim), 0));
  const auto cut = torus_cut(small);
  const double inv = 1.0 / ipow(k, dim);
  Problem p;
  p.kind = SurfaceKind::SurfacePressurePeriodic;
  p.x = x;
  p.primary_bonds = tt.torus.n_bonds();
  p.primary_sites = tt.torus.n_sites;
  p.direct.push_back({small, small_map, 1.0});
  p.direct.push_back({tt.torus, identity_map(tt.torus.n_bonds()), -inv});
  const double c_cut = static_cast<double>(cut.cardinality());
  const double c_int = static_cast<double>(tt.tiles.corridor.cardinality());
  p.integral.push_back({small, small_map, cut, c_cut * x * x / 2.0, 0.0, {}});
  p.integral.push_back({tt.torus, identity_map(tt.torus.n_bonds()), tt.tiles.corridor,
                        -inv * c_int * x * x / 2.0, 0.0, {}});
  p.geometry = {dim, L, k, tt.tiles.corridor.cardinality()};
  p.unit = ipow(L, dim - 1);
  return p;
}

struct Layout {
  std::size_t n_terms = 0;
  std::size_t n_nodes = 0;
  bool center = false;
  std::size_t node(std::size_t term, std::size_t i) const { return 3 + term * n_nodes + i; }
  std::size_t center_node(std::size_t i) const { return 3 + n_terms * n_nodes + i; }
  std::size_t center_total() const { return 3 + n_terms * n_nodes + n_nodes; }
  std::size_t size() const { return center ? center_total() + 1 : 3 + n_terms * n_nodes; }
};

Estimate scaled(const Estimate& e, double f) {
  Estimate r = e;
  r.value *= f;
  r.std_error *= std::abs(f);
  return r;
}

SurfaceTermResult assemble(const Problem& p, const DisorderAverage& avg, const Layout& lay,
                           const QuadratureRule& tq, const AveragingMethod& method, bool direct,
                           bool integral, bool mcmc) {
  auto est = [&](std::size_t k) {
    return Estimate{avg.mean[k], avg.std_error[k], method, p.primary_bonds, p.primary_sites, mcmc};
  };
  SurfaceTermResult r;
  r.kind = p.kind;
  r.geometry = p.geometry;
  r.x = p.x;
  r.t_nodes = integral ? static_cast<int>(lay.n_nodes) : 0;
  if (direct) r.direct = est(0);
  if (integral) {
    r.integral = est(1);
    for (std::size_t term = 0; term < lay.n_terms; ++term) {
      std::vector<IntegrandNode> table;
      for (std::size_t i = 0; i < lay.n_nodes; ++i) {
        table.push_back({tq.nodes[i], tq.weights[i], est(lay.node(term, i))});
      }
      r.integrand.push_back(std::move(table));
    }
    if (lay.center) r.center_bond = est(lay.center_total());
  }
  if (direct && integral) r.route_difference = est(2);
  r.per_unit_surface = scaled(integral ? *r.integral : *r.direct, 1.0 / p.unit);
  return r;
}

struct Scratch {
  std::vector<double> K;
  ExactEngine::Workspace ws;
  GibbsReport rep;
};

SurfaceTermResult run_exact(const Problem& p, const AveragingMethod& method, const SurfaceOptions& opt) {
  const bool want_direct = opt.routes != Routes::Integral;
  const bool want_integral = opt.routes != Routes::Direct;
  if (want_integral && opt.t_nodes < 2) throw InvalidArgument("surface terms: t_nodes must be >= 2");
  check_method(method, p.primary_bonds);

  std::vector<ExactEngine> log_engines;
  if (want_direct) {
    for (const auto& t : p.direct) log_engines.emplace_back(t.lattice, opt.engine);
  }
  std::vector<ExactEngine> corr_engines;
  std::vector<ExactEngine::Observables> corr_obs;
  std::vector<std::vector<char>> in_corridor;
  if (want_integral) {
    for (const auto& t : p.integral) {
      corr_engines.emplace_back(t.lattice, opt.engine);
      corr_obs.push_back(corr_engines.back().compile(GibbsQuery{t.corridor.bond_indices, {}}));
      std::vector<char> mask(t.lattice.n_bonds(), 0);
      for (auto b : t.corridor.bond_indices) mask[b] = 1;
      in_corridor.push_back(std::move(mask));
    }
  }
  const QuadratureRule tq = want_integral ? gauss_legendre_unit(opt.t_nodes) : QuadratureRule{};
  Layout lay;
  lay.n_terms = want_integral ? p.integral.size() : 0;
  lay.n_nodes = tq.nodes.size();
  lay.center = want_integral && p.integral.front().center_bond.has_value();
  std::size_t center_slot = 0;
  if (lay.center) {
    const auto& ci = p.integral.front().corridor.bond_indices;
    center_slot = static_cast<std::size_t>(
        std::find(ci.begin(), ci.end(), *p.integral.front().center_bond) - ci.begin());
  }

  const unsigned workers = resolve_workers(opt.parallel.workers);
  std::vector<Scratch> scratch(workers);
  const double x = p.x;
  const auto avg = average_over_disorder(
      p.primary_bonds, method, lay.size(),
      [&](std::span<const double> g, std::span<double> out, unsigned thread, std::size_t) {
        auto& sc = scratch[thread];
        double direct = 0.0;
        for (std::size_t k = 0; k < log_engines.size(); ++k) {
          const auto& term = p.direct[k];
          sc.K.resize(term.map.size());
          for (std::size_t b = 0; b < sc.K.size(); ++b) sc.K[b] = x * (x + g[term.map[b]]);
          direct += term.coeff * log_engines[k].log_partition(sc.K, sc.ws);
        }
        double integral = 0.0;
        for (std::size_t k = 0; k < corr_engines.size(); ++k) {
          const auto& term = p.integral[k];
          const auto& mask = in_corridor[k];
          sc.K.resize(term.map.size());
          double acc = term.offset;
          for (std::size_t i = 0; i < lay.n_nodes; ++i) {
            const double xc = x * std::sqrt(tq.nodes[i]);
            for (std::size_t b = 0; b < sc.K.size(); ++b) {
              const double xb = mask[b] ? xc : x;
              sc.K[b] = xb * (xb + g[term.map[b]]);
            }
            corr_engines[k].evaluate(sc.K, corr_obs[k], sc.ws, sc.rep);
            double s = 0.0;
            for (double v : sc.rep.bonds) s += v;
            s /= static_cast<double>(sc.rep.bonds.size());
            out[lay.node(k, i)] = s;
            acc += tq.weights[i] * s;
            if (k == 0 && lay.center) out[lay.center_node(i)] = sc.rep.bonds[center_slot];
          }
          integral += term.coeff * acc;
        }
        if (lay.center) {
          double acc = 1.0;
          for (std::size_t i = 0; i < lay.n_nodes; ++i) acc += tq.weights[i] * out[lay.center_node(i)];
          out[lay.center_total()] = p.integral.front().coeff * acc / p.unit;
        }
        out[0] = direct;
        out[1] = integral;
        out[2] = direct - integral;
      },
      opt.parallel);
  return assemble(p, avg, lay, tq, method, want_direct, want_integral, false);
}

SurfaceTermResult run_mcmc(const Problem& p, const McmcPlan& plan, int t_nodes, ParallelOptions par) {
  if (t_nodes < 2) throw InvalidArgument("surface terms: t_nodes must be >= 2");
  plan.config.validate();
  const QuadratureRule tq = gauss_legendre_unit(t_nodes);
  Layout lay;
  lay.n_terms = p.integral.size();
  lay.n_nodes = tq.nodes.size();
  const std::size_t n_out = lay.size() + 2;  // + mean inner error, + flagged fraction
  const double x = p.x;
  const unsigned workers = resolve_workers(par.workers);
  std::vector<std::vector<double>> scratch(workers);
  const AveragingMethod method = DisorderMC{plan.outer_samples, plan.disorder_seed};
  const std::size_t per_sample = lay.n_terms * lay.n_nodes;
  const auto avg = average_over_disorder(
      p.primary_bonds, method, n_out,
      [&](std::span<const double> g, std::span<double> out, unsigned thread, std::size_t sample) {
        auto& K = scratch[thread];
        double integral = 0.0;
        double inner_err = 0.0;
        double flagged = 0.0;
        for (std::size_t k = 0; k < p.integral.size(); ++k) {
          const auto& term = p.integral[k];
          K.resize(term.map.size());
          McmcQuery q;
          q.corridor = term.corridor;
          double acc = term.offset;
          for (std::size_t i = 0; i < lay.n_nodes; ++i) {
            const double xc = x * std::sqrt(tq.nodes[i]);
            for (std::size_t b = 0; b < K.size(); ++b) {
              const double xb = term.corridor.contains(b) ? xc : x;
              K[b] = xb * (xb + g[term.map[b]]);
            }
            const auto r = estimate_correlations(term.lattice, K, q, plan.config,
                                                 sample * per_sample + k * lay.n_nodes + i);
            out[lay.node(k, i)] = r.corridor->value;
            acc += tq.weights[i] * r.corridor->value;
            inner_err += r.corridor->std_error;
            flagged += r.diagnostics.ess_ok ? 0.0 : 1.0;
          }
          integral += term.coeff * acc;
        }
        out[0] = 0.0;
        out[1] = integral;
        out[2] = 0.0;
        out[lay.size()] = inner_err / static_cast<double>(per_sample);
        out[lay.size() + 1] = flagged;
      },
      ParallelOptions{workers});
  auto r = assemble(p, avg, lay, tq, method, false, true, true);
  r.flagged_chains = static_cast<std::size_t>(
      std::llround(avg.mean[lay.size() + 1] * static_cast<double>(plan.outer_samples)));
  return r;
}

}  // namespace

bool routes_agree(const SurfaceTermResult& r, double quad_tol, double n_sigma) {
  if (!r.route_difference) return false;
  const auto& d = *r.route_difference;
  if (std::holds_alternative<Quadrature>(d.method)) return std::abs(d.value) <= quad_tol;
  return std::abs(d.value) <= n_sigma * d.std_error;
}

SurfaceTermResult adjacency(int dim, int L, double x, const AveragingMethod& method,
                            const SurfaceOptions& options) {
  return run_exact(adjacency_box_problem(dim, L, x), method, options);
}

Estimate adjacency_direct(int dim, int L, double x, const AveragingMethod& method,
                          const SurfaceOptions& options) {
  SurfaceOptions o = options;
  o.routes = Routes::Direct;
  return *adjacency(dim, L, x, method, o).direct;
}

Estimate adjacency_integral(int dim, int L, double x, const AveragingMethod& method, int t_nodes,
                            const SurfaceOptions& options) {
  SurfaceOptions o = options;
  o.routes = Routes::Integral;
  o.t_nodes = t_nodes;
  return *adjacency(dim, L, x, method, o).integral;
}

SurfaceTermResult adjacency_pressure(const LatticeSpec& box, const Decomposition& decomposition,
                                     double x, const AveragingMethod& method,
                                     const SurfaceOptions& options) {
  if (decomposition.corridor.cardinality() == 0) throw InvalidArgument("adjacency_pressure: empty corridor");
  auto p = adjacency_problem(box, decomposition, x);
  p.kind = SurfaceKind::AdjacencyTC;
  p.unit = static_cast<double>(decomposition.corridor.cardinality());
  return run_exact(p, method, options);
}

SurfaceTermResult periodic_minus_free(int dim, int L, double x, const AveragingMethod& method,
                                      const SurfaceOptions& options) {
  return run_exact(periodic_minus_free_problem(dim, L, x), method, options);
}

SurfaceTermResult surface_pressure_free(int dim, int L, double x, int k, const AveragingMethod& method,
                                        const SurfaceOptions& options) {
  return run_exact(surface_free_problem(dim, L, x, k), method, options);
}

SurfaceTermResult surface_pressure_periodic(int dim, int L, double x, int k,
                                            const AveragingMethod& method,
                                            const SurfaceOptions& options) {
  return run_exact(surface_periodic_problem(dim, L, x, k), method, options);
}

void add_richardson(SurfaceTermResult& result, const AveragingMethod& method,
                    const SurfaceOptions& options) {
  const auto& g = result.geometry;
  if (result.kind != SurfaceKind::SurfacePressureFree && result.kind != SurfaceKind::SurfacePressurePeriodic) {
    throw InvalidArgument("add_richardson: only defined for surface pressures");
  }
  const auto next = result.kind == SurfaceKind::SurfacePressureFree
                        ? surface_pressure_free(g.dim, g.L, result.x, g.k + 1, method, options)
                        : surface_pressure_periodic(g.dim, g.L, result.x, g.k + 1, method, options);
  const auto& a = result.integral ? *result.integral : *result.direct;
  const auto& b = next.integral ? *next.integral : *next.direct;
  const double wa = ipow(g.k, g.dim);
  const double wb = ipow(g.k + 1, g.dim);
  Estimate r = a;
  r.value = (wb * b.value - wa * a.value) / (wb - wa);
  r.std_error = std::hypot(wb * b.std_error, wa * a.std_error) / (wb - wa);
  result.richardson = r;
}

CompositionCheck check_composition(const SurfaceTermResult& pmf, const SurfaceTermResult& spf,
                                   const SurfaceTermResult& spp, double quad_tol, double n_sigma) {
  if (!pmf.direct || !spf.integral || !spp.integral) {
    throw InvalidArgument("check_composition: needs the direct periodic-minus-free route and both integral surface routes");
  }
  CompositionCheck c;
  c.lhs = *pmf.direct;
  c.rhs = *spp.integral;
  c.rhs.value = spp.integral->value - spf.integral->value;
  // The two surface pressures share disorder; bound their difference's error by the sum.
  c.rhs.std_error = spp.integral->std_error + spf.integral->std_error;
  c.discrepancy = std::abs(c.lhs.value - c.rhs.value);
  c.combined_std_error = std::hypot(c.lhs.std_error, c.rhs.std_error);
  const bool quad = std::holds_alternative<Quadrature>(c.lhs.method) &&
                    std::holds_alternative<Quadrature>(c.rhs.method);
  c.passed = quad ? c.discrepancy <= quad_tol : c.discrepancy <= n_sigma * c.combined_std_error;
  return c;
}

SurfaceTermResult adjacency_mcmc(int dim, int L, double x, const McmcPlan& plan, int t_nodes,
                                 ParallelOptions parallel) {
  return run_mcmc(adjacency_box_problem(dim, L, x), plan, t_nodes, parallel);
}

std::vector<SurfaceTermResult> scaling_sweep(int dim, double x, const std::vector<int>& L_list, int k,
                                             const SweepOptions& options) {
  if (L_list.empty()) throw InvalidArgument("scaling_sweep: empty L list");
  std::vector<SurfaceTermResult> out;
  for (int L : L_list) {
    Problem p;
    switch (options.kind) {
      case SurfaceKind::AdjacencyTL:
      case SurfaceKind::AdjacencyTC: p = adjacency_box_problem(dim, L, x); break;
      case SurfaceKind::PeriodicMinusFree: p = periodic_minus_free_problem(dim, L, x); break;
      case SurfaceKind::SurfacePressureFree: p = surface_free_problem(dim, L, x, k); break;
      case SurfaceKind::SurfacePressurePeriodic: p = surface_periodic_problem(dim, L, x, k); break;
    }
    const bool fits = p.primary_sites <= options.surface.engine.max_sites;
    if (!options.force_mcmc && fits) {
      out.push_back(run_exact(p, options.exact_method, options.surface));
    } else if (options.mcmc) {
      out.push_back(run_mcmc(p, *options.mcmc, options.surface.t_nodes, options.surface.parallel));
    } else {
      throw SizeError("scaling_sweep: L = " + std::to_string(L) +
                      " exceeds the exact engine cap and no MCMC plan was given");
    }
  }
  return out;
}

}  // namespace nlsurf
