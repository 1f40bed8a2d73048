#include "nlsurf/quenched.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include "nlsurf/quadrature.hpp"

namespace nlsurf {

bool quadrature_feasible(int nodes_per_bond, std::size_t n_bonds) {
  if (nodes_per_bond < 1) return false;
  return static_cast<double>(n_bonds) * std::log(static_cast<double>(nodes_per_bond)) <=
         std::log(kMaxQuadraturePoints) + 1e-12;
}

int max_feasible_nodes(std::size_t n_bonds, int max_nodes) {
  if (n_bonds == 0) return max_nodes;
  int n = static_cast<int>(std::floor(std::pow(kMaxQuadraturePoints, 1.0 / static_cast<double>(n_bonds)) + 1e-9));
  while (n > 1 && !quadrature_feasible(n, n_bonds)) --n;
  while (quadrature_feasible(n + 1, n_bonds) && n + 1 <= max_nodes) ++n;
  return std::clamp(n, 1, max_nodes);
}

void check_method(const AveragingMethod& method, std::size_t n_bonds) {
  if (const auto* q = std::get_if<Quadrature>(&method)) {
    if (q->nodes_per_bond < 1) throw InvalidArgument("quadrature: nodes_per_bond must be >= 1");
    if (q->rule == NodeRule::Trapezoid && q->nodes_per_bond < 3) {
      throw InvalidArgument("quadrature: trapezoid rule needs >= 3 nodes per bond");
    }
    if (!quadrature_feasible(q->nodes_per_bond, n_bonds)) {
      throw SizeError("quadrature: " + std::to_string(q->nodes_per_bond) + "^" + std::to_string(n_bonds) +
                      " grid points exceed the 1e7 cap; use disorder Monte Carlo");
    }
  } else {
    const auto& mc = std::get<DisorderMC>(method);
    if (mc.samples < 2) throw InvalidArgument("disorder MC: need at least 2 samples");
  }
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr std::size_t kChunk = 2048;

struct ChunkStats {
  double count = 0.0;
  std::vector<double> mean;  // weighted sum under quadrature
  std::vector<double> m2;
};

template <class Body>
void run_chunks(std::size_t n_chunks, unsigned workers, Body&& body) {
  if (workers <= 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) body(c, 0u);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(workers, n_chunks));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = next++; c < n_chunks; c = next++) body(c, t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_chunks;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

DisorderAverage average_over_disorder(std::size_t n_bonds, const AveragingMethod& method,
                                      std::size_t n_out, const DisorderPointFn& fn,
                                      ParallelOptions par) {
  check_method(method, n_bonds);
  DisorderAverage res;
  res.workers = resolve_workers(par.workers);
  res.mean.assign(n_out, 0.0);
  res.std_error.assign(n_out, 0.0);

  if (const auto* q = std::get_if<Quadrature>(&method)) {
    const QuadratureRule rule = q->rule == NodeRule::Trapezoid ? gaussian_trapezoid(q->nodes_per_bond)
                                                                : gauss_hermite(q->nodes_per_bond);
    const auto n = static_cast<std::size_t>(q->nodes_per_bond);
    std::size_t total = 1;
    for (std::size_t b = 0; b < n_bonds; ++b) total *= n;
    res.points = total;
    const std::size_t n_chunks = (total + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> sums(n_chunks);
    run_chunks(n_chunks, res.workers, [&](std::size_t c, unsigned thread) {
      std::vector<double> g(n_bonds), out(n_out), acc(n_out, 0.0);
      std::vector<std::size_t> digit(n_bonds);
      const std::size_t begin = c * kChunk;
      const std::size_t end = std::min(total, begin + kChunk);
      std::size_t rem = begin;
      for (std::size_t b = 0; b < n_bonds; ++b) {
        digit[b] = rem % n;
        rem /= n;
      }
      for (std::size_t p = begin; p < end; ++p) {
        double w = 1.0;
        for (std::size_t b = 0; b < n_bonds; ++b) {
          g[b] = rule.nodes[digit[b]];
          w *= rule.weights[digit[b]];
        }
        fn(g, out, thread, p);
        for (std::size_t k = 0; k < n_out; ++k) acc[k] += w * out[k];
        for (std::size_t b = 0; b < n_bonds; ++b) {
          if (++digit[b] < n) break;
          digit[b] = 0;
        }
      }
      sums[c] = std::move(acc);
    });
    for (const auto& s : sums) {
      for (std::size_t k = 0; k < n_out; ++k) res.mean[k] += s[k];
    }
    return res;
  }

  const auto& mc = std::get<DisorderMC>(method);
  res.points = mc.samples;
  const std::size_t n_chunks = (mc.samples + kChunk - 1) / kChunk;
  std::vector<ChunkStats> stats(n_chunks);
  run_chunks(n_chunks, res.workers, [&](std::size_t c, unsigned thread) {
    std::vector<double> g(n_bonds), out(n_out);
    ChunkStats st;
    st.mean.assign(n_out, 0.0);
    st.m2.assign(n_out, 0.0);
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(mc.samples, begin + kChunk);
    for (std::size_t s = begin; s < end; ++s) {
      for (std::size_t b = 0; b < n_bonds; ++b) g[b] = disorder_normal(mc.seed, s, b);
      fn(g, out, thread, s);
      st.count += 1.0;
      for (std::size_t k = 0; k < n_out; ++k) {
        const double d = out[k] - st.mean[k];
        st.mean[k] += d / st.count;
        st.m2[k] += d * (out[k] - st.mean[k]);
      }
    }
    stats[c] = std::move(st);
  });
  // Chan et al. pairwise update, in chunk order.
  double count = 0.0;
  std::vector<double> m2(n_out, 0.0);
  for (const auto& st : stats) {
    const double tot = count + st.count;
    for (std::size_t k = 0; k < n_out; ++k) {
      const double d = st.mean[k] - res.mean[k];
      res.mean[k] += d * st.count / tot;
      m2[k] += st.m2[k] + d * d * count * st.count / tot;
    }
    count = tot;
  }
  for (std::size_t k = 0; k < n_out; ++k) {
    res.std_error[k] = std::sqrt(std::max(m2[k], 0.0) / (count - 1.0) / count);
  }
  return res;
}

namespace {

struct ThreadScratch {
  std::vector<double> K, j;
  ExactEngine::Workspace ws;
  GibbsReport rep;
};

Estimate make_estimate(const DisorderAverage& avg, std::size_t k, const AveragingMethod& m,
                       const LatticeSpec& lat) {
  return Estimate{avg.mean[k], avg.std_error[k], m, lat.n_bonds(), lat.n_sites};
}

}  // namespace

Estimate quenched_pressure(const LatticeSpec& lattice, const NishimoriParams& params,
                           const AveragingMethod& method, ParallelOptions par,
                           EngineOptions engine_opts) {
  params.validate();
  if (params.n_bonds() != lattice.n_bonds()) throw InvalidArgument("quenched_pressure: bond count mismatch");
  check_method(method, lattice.n_bonds());
  const ExactEngine engine(lattice, engine_opts);
  const unsigned workers = resolve_workers(par.workers);
  std::vector<ThreadScratch> scratch(workers);
  const auto avg = average_over_disorder(
      lattice.n_bonds(), method, 1,
      [&](std::span<const double> g, std::span<double> out, unsigned t, std::size_t) {
        auto& sc = scratch[t];
        sc.K.resize(g.size());
        for (std::size_t b = 0; b < g.size(); ++b) sc.K[b] = params.x[b] * (params.x[b] + g[b]);
        out[0] = engine.log_partition(sc.K, sc.ws);
      },
      ParallelOptions{workers});
  return make_estimate(avg, 0, method, lattice);
}

std::vector<Estimate> quenched_correlation(const LatticeSpec& lattice, const NishimoriParams& params,
                                           const std::vector<CorrelationQuery>& queries,
                                           const AveragingMethod& method, ParallelOptions par,
                                           EngineOptions engine_opts) {
  params.validate();
  if (params.n_bonds() != lattice.n_bonds()) throw InvalidArgument("quenched_correlation: bond count mismatch");
  check_method(method, lattice.n_bonds());
  const ExactEngine engine(lattice, engine_opts);

  GibbsQuery gq;
  std::map<std::size_t, std::size_t> bond_slot;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_slot;
  auto need_bond = [&](std::size_t b) {
    if (b >= lattice.n_bonds()) throw InvalidArgument("quenched_correlation: bond out of range");
    auto [it, fresh] = bond_slot.emplace(b, gq.bonds.size());
    if (fresh) gq.bonds.push_back(b);
    return it->second;
  };
  struct Plan {
    CorrelationKind kind;
    std::size_t slot;
    std::size_t bond;
  };
  std::vector<Plan> plans;
  for (const auto& q : queries) {
    if (q.kind == CorrelationKind::PairMean) {
      if (q.b == q.b2) throw InvalidArgument("quenched_correlation: pair needs distinct bonds");
      if (q.b >= lattice.n_bonds() || q.b2 >= lattice.n_bonds()) {
        throw InvalidArgument("quenched_correlation: bond out of range");
      }
      auto key = std::minmax(q.b, q.b2);
      auto [it, fresh] = pair_slot.emplace(key, gq.pairs.size());
      if (fresh) gq.pairs.push_back(key);
      plans.push_back({q.kind, it->second, q.b});
    } else {
      plans.push_back({q.kind, need_bond(q.b), q.b});
    }
  }
  const auto obs = engine.compile(gq);
  const unsigned workers = resolve_workers(par.workers);
  std::vector<ThreadScratch> scratch(workers);
  const auto avg = average_over_disorder(
      lattice.n_bonds(), method, plans.size(),
      [&](std::span<const double> g, std::span<double> out, unsigned t, std::size_t) {
        auto& sc = scratch[t];
        sc.K.resize(g.size());
        sc.j.resize(g.size());
        for (std::size_t b = 0; b < g.size(); ++b) {
          sc.j[b] = params.x[b] + g[b];
          sc.K[b] = params.x[b] * sc.j[b];
        }
        engine.evaluate(sc.K, obs, sc.ws, sc.rep);
        for (std::size_t k = 0; k < plans.size(); ++k) {
          const auto& p = plans[k];
          switch (p.kind) {
            case CorrelationKind::BondMean: out[k] = sc.rep.bonds[p.slot]; break;
            case CorrelationKind::BondSquare: out[k] = sc.rep.bonds[p.slot] * sc.rep.bonds[p.slot]; break;
            case CorrelationKind::PairMean: out[k] = sc.rep.pairs[p.slot]; break;
            case CorrelationKind::JTimesBond: out[k] = sc.j[p.bond] * sc.rep.bonds[p.slot]; break;
          }
        }
      },
      ParallelOptions{workers});
  std::vector<Estimate> res;
  for (std::size_t k = 0; k < plans.size(); ++k) res.push_back(make_estimate(avg, k, method, lattice));
  return res;
}

double t_integrand(const LatticeSpec& lattice, const InterpolationSchedule& sched, double t,
                   const DisorderRealization& disorder, EngineOptions engine) {
  InterpolationSchedule s = sched;
  s.t = t;
  s.n_bonds = lattice.n_bonds();
  const NishimoriParams xt = interpolated_params(s);
  const auto shifted = shift_disorder(disorder, xt);
  const auto K = coupling_field(xt, shifted);
  return corridor_average(lattice, K, s.corridor, engine);
}

}  // namespace nlsurf
