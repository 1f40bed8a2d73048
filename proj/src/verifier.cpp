#include "nlsurf/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace nlsurf {

std::string to_string(CheckId id) {
  switch (id) {
    case CheckId::LE: return "LE";
    case CheckId::MQ: return "MQ";
    case CheckId::G1: return "G1";
    case CheckId::G2: return "G2";
    case CheckId::IDSET_A: return "IDSET_A";
    case CheckId::IDSET_B: return "IDSET_B";
    case CheckId::IDSET_C: return "IDSET_C";
  }
  return "unknown";
}

std::size_t SuiteReport::failures() const {
  std::size_t n = 0;
  for (const auto& r : reports) n += r.passed ? 0 : 1;
  for (const auto& m : monotone) n += m.passed ? 0 : 1;
  return n;
}

namespace {

constexpr double kAbsFloor = 1e-12;  // MC bound when the paired error vanishes

bool is_quadrature(const AveragingMethod& m) { return std::holds_alternative<Quadrature>(m); }

// Gibbs data at one disorder point; slots are resolved before the pass.
struct PointData {
  std::span<const double> g;
  const GibbsReport* base = nullptr;                 // all bonds, requested pairs
  const std::vector<GibbsReport>* varied = nullptr;  // all bonds, per (bond, sign) variant

  double s(std::size_t b) const { return base->bonds[b]; }
  double pair(std::size_t slot) const { return base->pairs[slot]; }
  const GibbsReport& at(std::size_t slot) const { return (*varied)[slot]; }
};

using PairSlots = std::map<std::pair<std::size_t, std::size_t>, std::size_t>;
using VariantSlots = std::map<std::pair<std::size_t, int>, std::size_t>;

struct Equality {
  VerificationReport tmpl;
  std::function<std::pair<double, double>(const PointData&)> eval;
  std::function<bool(double rhs)> sign = [](double) { return true; };
};

void check_bond(const LatticeSpec& lattice, std::size_t b) {
  if (b >= lattice.n_bonds()) throw InvalidArgument("verifier: bond index out of range");
}

void check_step(const NishimoriParams& params, std::size_t b, double h) {
  if (!(h > 0.0)) throw InvalidArgument("verifier: step h must be > 0");
  if (params.x[b] != 0.0 && params.x[b] - h < 0.0) {
    throw InvalidArgument("verifier: x_b - h must be >= 0");
  }
}

std::vector<Equality> equalities_for(const CheckSpec& spec, const LatticeSpec& lattice,
                                     const NishimoriParams& params, const VerifyOptions& opt,
                                     const PairSlots& pairs, const VariantSlots& variants) {
  check_bond(lattice, spec.b);
  const std::size_t b = spec.b;
  const std::size_t b2 = spec.b2;
  const double h = opt.h;
  VerificationReport t;
  t.check = spec.check;
  t.dim = lattice.dim;
  t.side = lattice.side;
  t.boundary = lattice.boundary;
  t.x = params.x;
  t.bonds = {b};
  std::vector<Equality> out;
  const bool pair = spec.check == CheckId::G2 || spec.check == CheckId::IDSET_A ||
                    spec.check == CheckId::IDSET_B || spec.check == CheckId::IDSET_C;
  if (pair) {
    check_bond(lattice, b2);
    if (b == b2) throw InvalidArgument("verifier: b and b' must differ");
    t.bonds.push_back(b2);
  }
  switch (spec.check) {
    case CheckId::LE:
      out.push_back({t, [b, &params](const PointData& p) {
                       return std::pair{(params.x[b] + p.g[b]) * p.s(b), params.x[b]};
                     }});
      break;
    case CheckId::MQ:
      out.push_back({t, [b](const PointData& p) { return std::pair{p.s(b), p.s(b) * p.s(b)}; }});
      break;
    case CheckId::G1: {
      check_step(params, b, h);
      const double xb = params.x[b];
      const std::size_t up = variants.at({b, +1});
      const std::size_t dn = variants.at({b, -1});
      Equality e{t, [b, h, xb, up, dn](const PointData& p) {
                   const double fd = (p.at(up).log_z - p.at(dn).log_z) / (2.0 * h);
                   return std::pair{fd, xb * (p.s(b) + 1.0)};
                 }};
      e.sign = [xb](double rhs) { return rhs >= 0.0 && rhs <= 2.0 * xb; };
      out.push_back(std::move(e));
      break;
    }
    case CheckId::G2: {
      check_step(params, b2, h);
      const double xb2 = params.x[b2];
      const std::size_t up = variants.at({b2, +1});
      const std::size_t dn = variants.at({b2, -1});
      const std::size_t q = pairs.at({b, b2});
      Equality e{t, [b, b2, h, xb2, up, dn, q](const PointData& p) {
                   const double fd = (p.at(up).bonds[b] - p.at(dn).bonds[b]) / (2.0 * h);
                   const double c = p.pair(q) - p.s(b) * p.s(b2);
                   return std::pair{fd, 2.0 * xb2 * c * c};
                 }};
      e.sign = [](double rhs) { return rhs >= 0.0; };
      out.push_back(std::move(e));
      break;
    }
    case CheckId::IDSET_A:
      out.push_back({t, [q = pairs.at({b, b2})](const PointData& p) {
                       const double v = p.pair(q);
                       return std::pair{v, v * v};
                     }});
      break;
    case CheckId::IDSET_B: {
      auto t1 = t;
      t1.label = "B1";
      const std::size_t q = pairs.at({b, b2});
      out.push_back({t1, [b, b2, q](const PointData& p) {
                       return std::pair{p.s(b) * p.s(b2), p.pair(q) * p.s(b2)};
                     }});
      auto t2 = t;
      t2.label = "B2";
      out.push_back({t2, [b, b2, q](const PointData& p) {
                       return std::pair{p.pair(q) * p.s(b2), p.s(b) * p.s(b2) * p.pair(q)};
                     }});
      break;
    }
    case CheckId::IDSET_C:
      out.push_back({t, [b, b2](const PointData& p) {
                       const double s1 = p.s(b);
                       const double s2 = p.s(b2);
                       return std::pair{s1 * s2 * s2, s1 * s1 * s2 * s2};
                     }});
      break;
  }
  return out;
}

struct Scratch {
  std::vector<double> K;
  ExactEngine::Workspace ws;
  GibbsReport base;
  std::vector<GibbsReport> varied;
};

void fill_couplings(std::vector<double>& K, const NishimoriParams& params, std::span<const double> g) {
  K.resize(params.x.size());
  for (std::size_t c = 0; c < K.size(); ++c) K[c] = params.x[c] * (params.x[c] + g[c]);
}

}  // namespace

std::vector<VerificationReport> run_checks(const LatticeSpec& lattice, const NishimoriParams& params,
                                           const std::vector<CheckSpec>& specs,
                                           const VerifyOptions& options, const std::string& instance) {
  params.validate();
  if (params.n_bonds() != lattice.n_bonds()) throw InvalidArgument("verifier: params/lattice bond count mismatch");
  check_method(options.method, lattice.n_bonds());

  PairSlots pair_slot;
  VariantSlots variant_slot;
  GibbsQuery base_q;
  for (std::size_t c = 0; c < lattice.n_bonds(); ++c) base_q.bonds.push_back(c);
  for (const auto& s : specs) {
    if (s.check != CheckId::LE && s.check != CheckId::MQ && s.check != CheckId::G1 && s.b != s.b2) {
      if (pair_slot.emplace(std::pair{s.b, s.b2}, base_q.pairs.size()).second) {
        base_q.pairs.emplace_back(s.b, s.b2);
      }
    }
    const std::size_t moved = s.check == CheckId::G1 ? s.b : s.b2;
    if (s.check == CheckId::G1 || s.check == CheckId::G2) {
      for (int sign : {+1, -1}) variant_slot.emplace(std::pair{moved, sign}, variant_slot.size());
    }
  }
  std::vector<Equality> eqs;
  for (const auto& s : specs) {
    for (auto& e : equalities_for(s, lattice, params, options, pair_slot, variant_slot)) {
      e.tmpl.instance = instance;
      eqs.push_back(std::move(e));
    }
  }
  std::vector<std::pair<std::size_t, int>> variants(variant_slot.size());
  for (const auto& [key, slot] : variant_slot) variants[slot] = key;

  const ExactEngine engine(lattice, options.engine);
  const auto base_obs = engine.compile(base_q);
  const auto bond_obs = engine.compile(GibbsQuery{base_q.bonds, {}});
  const unsigned workers = resolve_workers(options.parallel.workers);
  std::vector<Scratch> scratch(workers);
  for (auto& s : scratch) s.varied.resize(variants.size());
  const double h = options.h;

  const auto avg = average_over_disorder(
      lattice.n_bonds(), options.method, 3 * eqs.size(),
      [&](std::span<const double> g, std::span<double> out, unsigned thread, std::size_t) {
        auto& sc = scratch[thread];
        fill_couplings(sc.K, params, g);
        engine.evaluate(sc.K, base_obs, sc.ws, sc.base);
        for (std::size_t v = 0; v < variants.size(); ++v) {
          const auto [bond, sign] = variants[v];
          const double saved = sc.K[bond];
          const double xv = params.x[bond] + sign * h;
          sc.K[bond] = xv * (xv + g[bond]);
          engine.evaluate(sc.K, bond_obs, sc.ws, sc.varied[v]);
          sc.K[bond] = saved;
        }
        PointData p{g, &sc.base, &sc.varied};
        for (std::size_t e = 0; e < eqs.size(); ++e) {
          const auto [l, r] = eqs[e].eval(p);
          out[3 * e] = l;
          out[3 * e + 1] = r;
          out[3 * e + 2] = l - r;
        }
      },
      options.parallel);

  const bool quad = is_quadrature(options.method);
  std::vector<VerificationReport> reports;
  for (std::size_t e = 0; e < eqs.size(); ++e) {
    auto r = eqs[e].tmpl;
    auto est = [&](std::size_t k) {
      return Estimate{avg.mean[k], avg.std_error[k], options.method, lattice.n_bonds(), lattice.n_sites, false};
    };
    r.lhs = est(3 * e);
    r.rhs = est(3 * e + 1);
    r.discrepancy = avg.mean[3 * e + 2];
    r.std_error = avg.std_error[3 * e + 2];
    r.tolerance = quad ? options.tolerance : std::max(options.n_sigma * r.std_error, kAbsFloor);
    r.sign_ok = eqs[e].sign(r.rhs.value);
    r.passed = std::abs(r.discrepancy) <= r.tolerance && r.sign_ok;
    reports.push_back(std::move(r));
  }
  return reports;
}

VerificationReport verify_le(const LatticeSpec& lattice, const NishimoriParams& params, std::size_t b,
                             const VerifyOptions& options) {
  return run_checks(lattice, params, {{CheckId::LE, b, 0}}, options).front();
}

VerificationReport verify_mq(const LatticeSpec& lattice, const NishimoriParams& params, std::size_t b,
                             const VerifyOptions& options) {
  return run_checks(lattice, params, {{CheckId::MQ, b, 0}}, options).front();
}

VerificationReport verify_g1(const LatticeSpec& lattice, const NishimoriParams& params, std::size_t b,
                             const VerifyOptions& options) {
  return run_checks(lattice, params, {{CheckId::G1, b, 0}}, options).front();
}

VerificationReport verify_g2(const LatticeSpec& lattice, const NishimoriParams& params, std::size_t b,
                             std::size_t b2, const VerifyOptions& options) {
  return run_checks(lattice, params, {{CheckId::G2, b, b2}}, options).front();
}

std::vector<VerificationReport> verify_idset(const LatticeSpec& lattice, const NishimoriParams& params,
                                             std::size_t b, std::size_t b2, const VerifyOptions& options) {
  return run_checks(lattice, params,
                    {{CheckId::IDSET_A, b, b2}, {CheckId::IDSET_B, b, b2}, {CheckId::IDSET_C, b, b2}},
                    options);
}

MonotoneReport verify_g2_monotone(const LatticeSpec& lattice, const NishimoriParams& params,
                                  std::size_t b, std::size_t b2, const std::vector<double>& grid,
                                  const VerifyOptions& options, const std::string& instance) {
  params.validate();
  check_bond(lattice, b);
  check_bond(lattice, b2);
  if (b == b2) throw InvalidArgument("verifier: b and b' must differ");
  if (grid.size() < 2 || !std::is_sorted(grid.begin(), grid.end()) || grid.front() < 0.0) {
    throw InvalidArgument("verifier: monotone grid must be ascending, nonnegative, >= 2 points");
  }
  check_method(options.method, lattice.n_bonds());
  const ExactEngine engine(lattice, options.engine);
  const auto obs = engine.compile(GibbsQuery{{b}, {}});
  const unsigned workers = resolve_workers(options.parallel.workers);
  std::vector<Scratch> scratch(workers);
  const std::size_t n = grid.size();
  const auto avg = average_over_disorder(
      lattice.n_bonds(), options.method, 2 * n - 1,
      [&](std::span<const double> g, std::span<double> out, unsigned thread, std::size_t) {
        auto& sc = scratch[thread];
        fill_couplings(sc.K, params, g);
        for (std::size_t i = 0; i < n; ++i) {
          sc.K[b2] = grid[i] * (grid[i] + g[b2]);
          engine.evaluate(sc.K, obs, sc.ws, sc.base);
          out[i] = sc.base.bonds[0];
          if (i > 0) out[n + i - 1] = out[i] - out[i - 1];
        }
      },
      options.parallel);
  MonotoneReport r;
  r.instance = instance;
  r.b = b;
  r.b2 = b2;
  r.grid = grid;
  const bool quad = is_quadrature(options.method);
  r.tolerance = quad ? options.tolerance : 0.0;
  r.passed = true;
  for (std::size_t i = 0; i < n; ++i) {
    r.values.push_back(Estimate{avg.mean[i], avg.std_error[i], options.method, lattice.n_bonds(),
                                lattice.n_sites, false});
    if (i == 0) continue;
    const double step = avg.mean[n + i - 1];
    const double tol = quad ? options.tolerance
                            : std::max(options.n_sigma * avg.std_error[n + i - 1], kAbsFloor);
    if (!quad) r.tolerance = std::max(r.tolerance, tol);
    if (step < -tol) r.passed = false;
  }
  return r;
}

std::vector<SuiteInstance> standard_instances() {
  return {
      {"single_bond", build_lattice(1, 2, Boundary::Free)},
      {"open_3_chain", build_lattice(1, 3, Boundary::Free)},
      {"free_2x2", build_lattice(2, 2, Boundary::Free)},
  };
}

Quadrature suite_quadrature(double x, std::size_t n_bonds) {
  // Poles of tanh(x (x + z)) sit at Im z = pi / (2x); Gauss-Hermite stalls as they close in.
  Quadrature q;
  if (x <= 0.4) {
    q = {24, NodeRule::GaussHermite};
  } else if (x <= 0.8) {
    q = {33, NodeRule::Trapezoid};
  } else if (x <= 1.3) {
    q = {41, NodeRule::Trapezoid};
  } else {
    q = {49, NodeRule::Trapezoid};
  }
  q.nodes_per_bond = std::min(q.nodes_per_bond, max_feasible_nodes(n_bonds));
  return q;
}

SuiteReport run_standard_suite(const SuiteOptions& options) {
  SuiteReport suite;
  for (const auto& inst : standard_instances()) {
    const auto& lat = inst.lattice;
    const std::size_t nb = lat.n_bonds();
    for (double x : options.xs) {
      const auto params = NishimoriParams::uniform(nb, x);
      VerifyOptions vo;
      vo.h = options.h;
      vo.parallel = options.parallel;
      if (options.quadrature) {
        vo.method = suite_quadrature(x, nb);
      } else {
        vo.method = DisorderMC{options.samples, options.seed};
      }
      std::vector<CheckSpec> identities;
      std::vector<CheckSpec> derivatives;
      for (std::size_t b = 0; b < nb; ++b) {
        identities.push_back({CheckId::LE, b, 0});
        identities.push_back({CheckId::MQ, b, 0});
        derivatives.push_back({CheckId::G1, b, 0});
        for (std::size_t b2 = 0; b2 < nb; ++b2) {
          if (b2 == b) continue;
          derivatives.push_back({CheckId::G2, b, b2});
          identities.push_back({CheckId::IDSET_A, b, b2});
          identities.push_back({CheckId::IDSET_B, b, b2});
          identities.push_back({CheckId::IDSET_C, b, b2});
        }
      }
      // One pass serves both groups; only the tolerance differs.
      std::vector<CheckSpec> all = identities;
      all.insert(all.end(), derivatives.begin(), derivatives.end());
      vo.tolerance = options.identity_tolerance;
      auto reports = run_checks(lat, params, all, vo, inst.name);
      const bool quad = options.quadrature;
      for (auto& r : reports) {
        if (quad && (r.check == CheckId::G1 || r.check == CheckId::G2)) {
          r.tolerance = options.derivative_tolerance;
          r.passed = std::abs(r.discrepancy) <= r.tolerance && r.sign_ok;
        }
        suite.reports.push_back(std::move(r));
      }
      if (nb >= 2) {
        VerifyOptions mo = vo;
        mo.tolerance = options.monotone_tolerance;
        // Steps along the grid are >= 1e-4 or vanish per realization (trees), so a light
        // rule resolves their sign.
        if (options.quadrature) mo.method = Quadrature{std::min(25, max_feasible_nodes(nb)), NodeRule::Trapezoid};
        suite.monotone.push_back(verify_g2_monotone(lat, params, 0, 1, options.monotone_grid, mo, inst.name));
      }
    }
  }
  return suite;
}

}  // namespace nlsurf
