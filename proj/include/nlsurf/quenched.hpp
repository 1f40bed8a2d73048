#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "nlsurf/exact_engine.hpp"
#include "nlsurf/lattice.hpp"
#include "nlsurf/nishimori.hpp"

namespace nlsurf {

enum class NodeRule { GaussHermite, Trapezoid };

/// Tensor-product rule over every bond; Gauss-Hermite unless asked otherwise.
struct Quadrature {
  int nodes_per_bond = 20;
  NodeRule rule = NodeRule::GaussHermite;
};

/// Plain Monte Carlo over i.i.d. disorder realizations; sample s uses stream s.
struct DisorderMC {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

using AveragingMethod = std::variant<Quadrature, DisorderMC>;

inline constexpr double kMaxQuadraturePoints = 1e7;

/// Throws SizeError / InvalidArgument when the method is not admissible for n_bonds.
void check_method(const AveragingMethod& method, std::size_t n_bonds);
bool quadrature_feasible(int nodes_per_bond, std::size_t n_bonds);
/// Largest nodes_per_bond within the grid cap, clipped to [1, max_nodes].
int max_feasible_nodes(std::size_t n_bonds, int max_nodes = 200);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  AveragingMethod method = Quadrature{};
  std::size_t n_bonds = 0;
  std::size_t n_sites = 0;
  bool spin_mcmc = false;  // fixed-disorder expectations sampled, not enumerated
};

struct ParallelOptions {
  unsigned workers = 0;  // 0: hardware concurrency
};
unsigned resolve_workers(unsigned requested);

/// Called once per disorder point with the standard-normal core g (one entry per bond);
/// writes n_out values. Must be safe to call concurrently; `thread` identifies the caller's
/// private scratch slot in [0, workers), `point` is the grid point or MC sample index.
using DisorderPointFn = std::function<void(std::span<const double> g, std::span<double> out,
                                           unsigned thread, std::size_t point)>;

struct DisorderAverage {
  std::vector<double> mean;
  std::vector<double> std_error;  // zero under quadrature
  std::size_t points = 0;
  unsigned workers = 1;
};

/// Weighted average of fn over the disorder measure. Work is split into fixed-size chunks
/// reduced in chunk order, so the result is bit-identical for any worker count.
DisorderAverage average_over_disorder(std::size_t n_bonds, const AveragingMethod& method,
                                      std::size_t n_out, const DisorderPointFn& fn,
                                      ParallelOptions par = {});

Estimate quenched_pressure(const LatticeSpec& lattice, const NishimoriParams& params,
                           const AveragingMethod& method, ParallelOptions par = {},
                           EngineOptions engine = {});

enum class CorrelationKind {
  BondMean,     // [<S_b>]
  BondSquare,   // [<S_b>^2]
  PairMean,     // [<S_b S_b'>]
  JTimesBond,   // [j_b <S_b>]
};

struct CorrelationQuery {
  CorrelationKind kind = CorrelationKind::BondMean;
  std::size_t b = 0;
  std::size_t b2 = 0;
};

/// All queries share one pass over the disorder.
std::vector<Estimate> quenched_correlation(const LatticeSpec& lattice, const NishimoriParams& params,
                                           const std::vector<CorrelationQuery>& queries,
                                           const AveragingMethod& method,
                                           ParallelOptions par = {}, EngineOptions engine = {});

/// <S_C> at fixed standard-normal core for the schedule at time t: means shifted to x_b(t),
/// K_b = x_b(t) * (x_b(t) + g_b).
double t_integrand(const LatticeSpec& lattice, const InterpolationSchedule& sched, double t,
                   const DisorderRealization& disorder, EngineOptions engine = {});

}  // namespace nlsurf
