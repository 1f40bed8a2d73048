#include "nlsurf/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

namespace nlsurf::cli {

using nlohmann::json;

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const RunManifest& m) {
  json d = json::array();
  for (const auto& [file, digest] : m.digests) d.push_back({{"file", file}, {"fnv1a64", digest}});
  return {{"command", m.command}, {"config", m.config},       {"seeds", m.seeds},
          {"versions", m.versions}, {"wall_time_s", m.wall_time_s}, {"digests", d}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::vector<std::string>>();
  m.config = j.value("config", json::object());
  m.seeds = j.value("seeds", std::vector<std::uint64_t>{});
  m.versions = j.value("versions", json::object());
  m.wall_time_s = j.value("wall_time_s", 0.0);
  for (const auto& d : j.value("digests", json::array())) {
    m.digests.emplace_back(d.at("file").get<std::string>(), d.at("fnv1a64").get<std::string>());
  }
  return m;
}

json to_json(const Estimate& e) {
  json j{{"value", e.value}, {"std_error", e.std_error}, {"n_bonds", e.n_bonds},
         {"n_sites", e.n_sites}, {"spin_mcmc", e.spin_mcmc}};
  if (const auto* q = std::get_if<Quadrature>(&e.method)) {
    j["method"] = "quadrature";
    j["nodes_per_bond"] = q->nodes_per_bond;
    j["rule"] = q->rule == NodeRule::Trapezoid ? "trapezoid" : "gauss-hermite";
  } else {
    const auto& mc = std::get<DisorderMC>(e.method);
    j["method"] = "mc";
    j["samples"] = mc.samples;
    j["seed"] = mc.seed;
  }
  return j;
}

namespace {

json opt_json(const std::optional<Estimate>& e) { return e ? to_json(*e) : json(nullptr); }

}  // namespace

json to_json(const SurfaceTermResult& r) {
  json tables = json::array();
  for (const auto& table : r.integrand) {
    json rows = json::array();
    for (const auto& n : table) {
      rows.push_back({{"t", n.t}, {"weight", n.weight}, {"value", n.value.value},
                      {"std_error", n.value.std_error}});
    }
    tables.push_back(rows);
  }
  json j{{"kind", to_string(r.kind)},
         {"x", r.x},
         {"geometry",
          {{"dim", r.geometry.dim}, {"L", r.geometry.L}, {"k", r.geometry.k},
           {"corridor_size", r.geometry.corridor_size}}},
         {"t_nodes", r.t_nodes},
         {"direct", opt_json(r.direct)},
         {"integral", opt_json(r.integral)},
         {"per_unit_surface", to_json(r.per_unit_surface)},
         {"route_difference", opt_json(r.route_difference)},
         {"routes_agree", r.route_difference ? json(routes_agree(r)) : json(nullptr)},
         {"integrand", tables},
         {"center_bond", opt_json(r.center_bond)},
         {"richardson", opt_json(r.richardson)},
         {"flagged_chains", r.flagged_chains}};
  const auto& main = r.integral ? *r.integral : *r.direct;
  j["sign"] = main.value > 0.0 ? 1 : main.value < 0.0 ? -1 : 0;
  j["sign_sigma"] = main.std_error > 0.0 ? json(main.value / main.std_error) : json(nullptr);
  return j;
}

json to_json(const CompositionCheck& c) {
  return {{"lhs", to_json(c.lhs)},
          {"rhs", to_json(c.rhs)},
          {"discrepancy", c.discrepancy},
          {"combined_std_error", c.combined_std_error},
          {"passed", c.passed}};
}

json to_json(const VerificationReport& r) {
  return {{"check", to_string(r.check)},
          {"label", r.label},
          {"instance", r.instance},
          {"lattice",
           {{"dim", r.dim}, {"side", r.side}, {"boundary", r.boundary == Boundary::Free ? "free" : "periodic"}}},
          {"x", r.x},
          {"bonds", r.bonds},
          {"lhs", to_json(r.lhs)},
          {"rhs", to_json(r.rhs)},
          {"discrepancy", r.discrepancy},
          {"std_error", r.std_error},
          {"tolerance", r.tolerance},
          {"sign_ok", r.sign_ok},
          {"passed", r.passed}};
}

json to_json(const MonotoneReport& r) {
  json values = json::array();
  for (const auto& v : r.values) values.push_back({{"value", v.value}, {"std_error", v.std_error}});
  return {{"instance", r.instance}, {"bond", r.b},          {"varied_bond", r.b2}, {"grid", r.grid},
          {"values", values},       {"tolerance", r.tolerance}, {"passed", r.passed}};
}

json to_json(const SuiteReport& r) {
  json reports = json::array();
  for (const auto& x : r.reports) reports.push_back(to_json(x));
  json mono = json::array();
  for (const auto& m : r.monotone) mono.push_back(to_json(m));
  return {{"passed", r.passed()}, {"failures", r.failures()}, {"checks", r.reports.size()},
          {"reports", reports},   {"monotone", mono}};
}

std::string emit_sweep(const std::vector<SurfaceTermResult>& results) {
  std::ostringstream os;
  os << "L,term,value,stderr,per_unit_surface,per_unit_stderr\n";
  char buf[512];
  for (const auto& r : results) {
    const auto& v = r.integral ? *r.integral : *r.direct;
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%.17g\n", r.geometry.L,
                  to_string(r.kind).c_str(), v.value, v.std_error, r.per_unit_surface.value,
                  r.per_unit_surface.std_error);
    os << buf;
  }
  return os.str();
}

namespace {

struct Opts {
  int dim = 1;
  int side = 2;
  std::string bc = "free";
  double x = 0.0;
  int L = 2;
  int k = 2;
  std::string method = "quadrature";
  int nodes = 20;
  std::string rule = "gauss-hermite";
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  int t_nodes = 16;
  unsigned workers = 0;
  std::string out;
  std::string format = "json";
  std::string routes = "both";
  std::string suite = "standard";
  std::string config;
  std::string L_list;
  std::string kind = "adjacency";
  bool richardson = false;
  std::size_t sweeps = 4000;
  std::size_t burn_in = 1000;
  std::string ladder;
  std::uint64_t mcmc_seed = 7;
  std::size_t outer_samples = 32;
  double min_ess = 100.0;
  std::string manifest;
};

// Parameters that determine the result bytes; worker count and output path do not.
json parameters(const std::string& cmd, const Opts& o) {
  json j{{"command", cmd}};
  auto put_geom = [&] { j["dim"] = o.dim; };
  auto put_method = [&] {
    j["method"] = o.method;
    if (o.method == "quadrature") {
      j["nodes"] = o.nodes;
      j["rule"] = o.rule;
    }
    if (o.method == "mc") {
      j["samples"] = o.samples;
      j["seed"] = o.seed;
    }
    if (o.method == "mcmc") {
      j["seed"] = o.seed;
      j["outer_samples"] = o.outer_samples;
      j["sweeps"] = o.sweeps;
      j["burn_in"] = o.burn_in;
      j["ladder"] = o.ladder;
      j["mcmc_seed"] = o.mcmc_seed;
      j["min_ess"] = o.min_ess;
    }
  };
  if (cmd == "lattice-info") {
    put_geom();
    j["side"] = o.side;
    j["bc"] = o.bc;
  } else if (cmd == "pressure") {
    put_geom();
    j["side"] = o.side;
    j["bc"] = o.bc;
    j["x"] = o.x;
    put_method();
  } else if (cmd == "verify") {
    j["suite"] = o.suite;
    j["method"] = o.method;
    if (o.method == "mc") {
      j["samples"] = o.samples;
      j["seed"] = o.seed;
    }
    j["config"] = o.config;
  } else {
    put_geom();
    j["x"] = o.x;
    j["t_nodes"] = o.t_nodes;
    j["routes"] = o.routes;
    put_method();
    if (cmd == "scaling") {
      j["kind"] = o.kind;
      j["L_list"] = o.L_list;
      j["k"] = o.k;
      j["format"] = o.format;
    } else {
      j["L"] = o.L;
    }
    if (cmd == "surface-free" || cmd == "surface-periodic") {
      j["k"] = o.k;
      j["richardson"] = o.richardson;
    }
  }
  return j;
}

Boundary parse_bc(const std::string& s) { return s == "periodic" ? Boundary::Periodic : Boundary::Free; }

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    const double d = std::stod(tok, &used);
    if (used != tok.size()) throw InvalidArgument("bad number in list: " + tok);
    v.push_back(d);
  }
  return v;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> v;
  for (double d : parse_doubles(s)) {
    if (d != static_cast<int>(d)) throw InvalidArgument("bad integer in list");
    v.push_back(static_cast<int>(d));
  }
  return v;
}

AveragingMethod exact_method(const Opts& o) {
  if (o.method == "quadrature") {
    return Quadrature{o.nodes, o.rule == "trapezoid" ? NodeRule::Trapezoid : NodeRule::GaussHermite};
  }
  if (o.method == "mc") return DisorderMC{o.samples, o.seed};
  throw InvalidArgument("--method mcmc is only available for adjacency and scaling");
}

McmcPlan mcmc_plan(const Opts& o) {
  McmcPlan p;
  p.outer_samples = o.outer_samples;
  p.disorder_seed = o.seed;
  p.config.sweeps = o.sweeps;
  p.config.burn_in = o.burn_in;
  p.config.seed = o.mcmc_seed;
  p.config.min_ess = o.min_ess;
  if (!o.ladder.empty()) {
    p.config.x_ladder = parse_doubles(o.ladder);
  } else if (o.x > 0.0) {
    p.config.x_ladder = {0.55 * o.x, 0.7 * o.x, 0.85 * o.x, o.x};
  }
  return p;
}

SurfaceOptions surface_options(const Opts& o) {
  SurfaceOptions s;
  s.t_nodes = o.t_nodes;
  s.routes = o.routes == "direct" ? Routes::Direct : o.routes == "integral" ? Routes::Integral : Routes::Both;
  s.parallel.workers = o.workers;
  return s;
}

SurfaceKind parse_kind(const std::string& s) {
  if (s == "adjacency") return SurfaceKind::AdjacencyTL;
  if (s == "torus-diff") return SurfaceKind::PeriodicMinusFree;
  if (s == "surface-free") return SurfaceKind::SurfacePressureFree;
  if (s == "surface-periodic") return SurfaceKind::SurfacePressurePeriodic;
  throw InvalidArgument("unknown --kind " + s);
}

json lattice_info(const Opts& o) {
  const auto lat = build_lattice(o.dim, o.side, parse_bc(o.bc), LatticeOptions{o.side == 2});
  json bonds = json::array();
  for (const auto& b : lat.bonds) {
    bonds.push_back({{"index", b.index}, {"site_a", b.site_a}, {"site_b", b.site_b},
                     {"direction", b.direction}, {"wraps", b.wraps}});
  }
  json corridors = json::object();
  if (lat.boundary == Boundary::Free && lat.side % 2 == 0 && lat.side >= 4) {
    corridors["midplanes"] = decompose_box(lat).corridor.cardinality();
  }
  if (lat.boundary == Boundary::Periodic) corridors["torus_cut"] = torus_cut(lat).cardinality();
  return {{"dim", lat.dim}, {"side", lat.side}, {"boundary", o.bc}, {"n_sites", lat.n_sites},
          {"n_bonds", lat.n_bonds()}, {"bonds", bonds}, {"corridors", corridors}};
}

struct Outcome {
  json result;
  std::string csv;  // non-empty: emitted instead of JSON
  int code = kOk;
};

Outcome execute(const std::string& cmd, const Opts& o) {
  Outcome out;
  ParallelOptions par{o.workers};
  if (cmd == "lattice-info") {
    out.result = lattice_info(o);
  } else if (cmd == "pressure") {
    const auto lat = build_lattice(o.dim, o.side, parse_bc(o.bc), LatticeOptions{o.side == 2});
    const auto e = quenched_pressure(lat, NishimoriParams::uniform(lat.n_bonds(), o.x), exact_method(o), par);
    out.result = {{"pressure", to_json(e)}, {"per_site", e.value / static_cast<double>(lat.n_sites)}};
  } else if (cmd == "adjacency") {
    const auto r = o.method == "mcmc" ? adjacency_mcmc(o.dim, o.L, o.x, mcmc_plan(o), o.t_nodes, par)
                                      : adjacency(o.dim, o.L, o.x, exact_method(o), surface_options(o));
    out.result = to_json(r);
  } else if (cmd == "torus-diff") {
    out.result = to_json(periodic_minus_free(o.dim, o.L, o.x, exact_method(o), surface_options(o)));
  } else if (cmd == "surface-free" || cmd == "surface-periodic") {
    const auto m = exact_method(o);
    const auto so = surface_options(o);
    auto r = cmd == "surface-free" ? surface_pressure_free(o.dim, o.L, o.x, o.k, m, so)
                                   : surface_pressure_periodic(o.dim, o.L, o.x, o.k, m, so);
    if (o.richardson) add_richardson(r, m, so);
    out.result = to_json(r);
    if (cmd == "surface-periodic" && so.routes == Routes::Both) {
      const auto pmf = periodic_minus_free(o.dim, o.L, o.x, m, so);
      const auto spf = surface_pressure_free(o.dim, o.L, o.x, o.k, m, so);
      out.result["composition"] = to_json(check_composition(pmf, spf, r));
    }
  } else if (cmd == "scaling") {
    SweepOptions sw;
    sw.kind = parse_kind(o.kind);
    sw.surface = surface_options(o);
    if (o.method == "mcmc") {
      sw.mcmc = mcmc_plan(o);
      sw.force_mcmc = true;
    } else {
      sw.exact_method = exact_method(o);
    }
    const auto rs = scaling_sweep(o.dim, o.x, parse_ints(o.L_list), o.k, sw);
    if (o.format == "csv") {
      out.csv = emit_sweep(rs);
    } else {
      json arr = json::array();
      for (const auto& r : rs) arr.push_back(to_json(r));
      out.result = {{"results", arr}};
    }
  } else if (cmd == "verify") {
    if (o.suite != "standard") throw InvalidArgument("unknown suite " + o.suite);
    SuiteOptions so;
    so.parallel = par;
    if (o.method == "mc") {
      so.quadrature = false;
      so.samples = o.samples;
      so.seed = o.seed;
    } else if (o.method != "quadrature") {
      throw InvalidArgument("verify: --method must be quadrature or mc");
    }
    if (!o.config.empty()) {
      std::ifstream in(o.config);
      if (!in) throw InvalidArgument("cannot read config " + o.config);
      const json c = json::parse(in);
      so.xs = c.value("xs", so.xs);
      so.identity_tolerance = c.value("identity_tolerance", so.identity_tolerance);
      so.derivative_tolerance = c.value("derivative_tolerance", so.derivative_tolerance);
      so.monotone_grid = c.value("monotone_grid", so.monotone_grid);
      so.monotone_tolerance = c.value("monotone_tolerance", so.monotone_tolerance);
      so.h = c.value("h", so.h);
      so.samples = c.value("samples", so.samples);
      so.seed = c.value("seed", so.seed);
    }
    const auto rep = run_standard_suite(so);
    out.result = to_json(rep);
    out.code = rep.passed() ? kOk : kVerificationFailed;
  }
  return out;
}

void add_geometry(CLI::App* c, Opts& o, bool side) {
  c->add_option("--dim", o.dim, "lattice dimension")->check(CLI::PositiveNumber);
  if (side) {
    c->add_option("--side", o.side, "sites per edge");
    c->add_option("--bc", o.bc, "free or periodic")->check(CLI::IsMember({"free", "periodic"}));
  } else {
    c->add_option("--L", o.L, "box side");
  }
}

void add_method(CLI::App* c, Opts& o, bool mcmc) {
  if (mcmc) {
    c->add_option("--method", o.method)->check(CLI::IsMember({"quadrature", "mc", "mcmc"}));
    c->add_option("--sweeps", o.sweeps);
    c->add_option("--burn-in", o.burn_in);
    c->add_option("--ladder", o.ladder, "comma-separated ascending x values");
    c->add_option("--mcmc-seed", o.mcmc_seed);
    c->add_option("--outer-samples", o.outer_samples);
    c->add_option("--min-ess", o.min_ess);
  } else {
    c->add_option("--method", o.method)->check(CLI::IsMember({"quadrature", "mc"}));
  }
  c->add_option("--nodes", o.nodes, "quadrature nodes per bond");
  c->add_option("--rule", o.rule)->check(CLI::IsMember({"gauss-hermite", "trapezoid"}));
  c->add_option("--samples", o.samples, "disorder samples");
  c->add_option("--seed", o.seed);
}

void add_common(CLI::App* c, Opts& o) {
  c->add_option("--workers", o.workers, "worker threads (0: all cores)");
  c->add_option("--out", o.out, "result file");
  c->add_option("--format", o.format)->check(CLI::IsMember({"json", "csv"}));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << bytes;
}

int run_impl(const std::vector<std::string>& args, std::ostream& os, std::ostream& err, bool manifest);

int replay(const Opts& o, std::ostream& os, std::ostream& err) {
  const auto m = manifest_from_json(json::parse(read_file(o.manifest)));
  auto cmd = m.command;
  std::string target;
  for (std::size_t i = 0; i + 1 < cmd.size(); ++i) {
    if (cmd[i] == "--out") {
      if (!o.out.empty()) cmd[i + 1] = o.out;
      target = cmd[i + 1];
    }
    if (cmd[i] == "--workers" && o.workers != 0) cmd[i + 1] = std::to_string(o.workers);
  }
  if (target.empty()) throw InvalidArgument("manifest has no --out file to compare");
  const int code = run_impl(cmd, os, err, false);
  const std::string digest = fnv1a64_hex(read_file(target));
  const bool match = !m.digests.empty() && m.digests.front().second == digest;
  os << json{{"manifest", o.manifest}, {"file", target}, {"fnv1a64", digest},
             {"expected", m.digests.empty() ? "" : m.digests.front().second}, {"match", match},
             {"exit_code", code}}
            .dump(2)
     << "\n";
  return match ? code : kVerificationFailed;
}

int run_impl(const std::vector<std::string>& args, std::ostream& os, std::ostream& err, bool manifest) {
  CLI::App app{"Gaussian Edwards-Anderson model on the Nishimori line: surface terms and identities", "nlsurf"};
  app.require_subcommand(1);
  Opts o;
  auto* li = app.add_subcommand("lattice-info", "lattice geometry and corridors");
  add_geometry(li, o, true);
  add_common(li, o);
  auto* pr = app.add_subcommand("pressure", "quenched pressure of a box or torus");
  add_geometry(pr, o, true);
  pr->add_option("--x", o.x)->check(CLI::NonNegativeNumber);
  add_method(pr, o, false);
  add_common(pr, o);
  for (const char* name : {"adjacency", "torus-diff", "surface-free", "surface-periodic", "scaling"}) {
    auto* c = app.add_subcommand(name);
    const std::string n = name;
    add_geometry(c, o, false);
    c->add_option("--x", o.x)->check(CLI::NonNegativeNumber);
    c->add_option("--t-nodes", o.t_nodes, "Gauss-Legendre nodes in t");
    c->add_option("--routes", o.routes)->check(CLI::IsMember({"direct", "integral", "both"}));
    add_method(c, o, n == "adjacency" || n == "scaling");
    add_common(c, o);
    if (n == "surface-free" || n == "surface-periodic" || n == "scaling") c->add_option("--k", o.k);
    if (n == "surface-free" || n == "surface-periodic") c->add_flag("--richardson", o.richardson);
    if (n == "scaling") {
      c->add_option("--L-list", o.L_list, "comma-separated sides")->required();
      c->add_option("--kind", o.kind)->check(
          CLI::IsMember({"adjacency", "torus-diff", "surface-free", "surface-periodic"}));
    }
  }
  auto* ve = app.add_subcommand("verify", "identity and inequality suite");
  ve->add_option("--suite", o.suite);
  ve->add_option("--method", o.method)->check(CLI::IsMember({"quadrature", "mc"}));
  ve->add_option("--samples", o.samples);
  ve->add_option("--seed", o.seed);
  ve->add_option("--config", o.config, "JSON suite overrides");
  add_common(ve, o);
  auto* rp = app.add_subcommand("replay", "rerun a manifest and compare output digests");
  rp->add_option("--manifest", o.manifest)->required();
  rp->add_option("--out", o.out, "write to this file instead");
  rp->add_option("--workers", o.workers);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, os, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, os, err);
    return kUsage;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "replay") return replay(o, os, err);
    const auto t0 = std::chrono::steady_clock::now();
    const auto params = parameters(cmd, o);
    const std::string run_id = fnv1a64_hex(params.dump());
    auto outcome = execute(cmd, o);
    std::string bytes;
    if (!outcome.csv.empty()) {
      bytes = outcome.csv;
    } else {
      json doc{{"schema", kSchemaId}, {"command", cmd}, {"run_id", run_id},
               {"parameters", params}, {"result", outcome.result}};
      bytes = doc.dump(2) + "\n";
    }
    if (o.out.empty()) {
      os << bytes;
    } else {
      write_file(o.out, bytes);
      if (manifest) {
        RunManifest m;
        m.command = args;
        m.config = params;
        m.config["run_id"] = run_id;
        m.config["workers"] = o.workers;
        if (o.method != "quadrature") m.seeds.push_back(o.seed);
        if (o.method == "mcmc") m.seeds.push_back(o.mcmc_seed);
        m.versions = {{"nlsurf", kVersion}, {"compiler", __VERSION__}, {"json", "nlohmann 3"}};
        m.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        m.digests.emplace_back(o.out, fnv1a64_hex(bytes));
        write_file(o.out + ".manifest.json", to_json(m).dump(2) + "\n");
      }
    }
    return outcome.code;
  } catch (const SizeError& e) {
    err << "infeasible size: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    err << "bad JSON: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_impl(args, out, err, true);
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace nlsurf::cli
