#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nlsurf/lattice.hpp"
#include "nlsurf/nishimori.hpp"
#include "nlsurf/quenched.hpp"

namespace nlsurf {

/// Metropolis single-spin sweeps (n updates at random sites) plus replica exchange along a ladder in x. Replica r
/// samples exp(lambda_r * sum_b K_b S_b) with lambda_r = x_ladder[r] / x_ladder.back(),
/// so the last rung is the target and K is taken to be built at x_ladder.back().
struct McmcConfig {
  std::size_t sweeps = 10000;
  std::size_t burn_in = 1000;
  std::vector<double> x_ladder;  // ascending; empty means a single replica
  std::uint64_t seed = 0;
  std::size_t stride = 1;
  double min_ess = 100.0;

  std::size_t replicas() const { return x_ladder.empty() ? 1 : x_ladder.size(); }
  void validate() const;
};

struct ChainDiagnostics {
  std::vector<double> acceptance;  // per replica
  std::vector<double> exchange;    // per adjacent ladder pair
  double tau_int = 0.5;            // of the primary observable, in measurements
  double ess = 0.0;
  std::size_t measurements = 0;
  bool ess_ok = false;
};

struct ChainEstimate {
  double value = 0.0;
  double std_error = 0.0;  // batch means, block length from tau_int
  double tau_int = 0.5;
};

struct McmcQuery {
  std::vector<std::size_t> bonds;
  std::optional<Corridor> corridor;
  bool state_histogram = false;  // only for n_sites <= 20
};

struct McmcResult {
  std::vector<ChainEstimate> bonds;
  std::optional<ChainEstimate> corridor;
  std::vector<std::uint64_t> histogram;  // index: bit i set <=> S_i = -1
  ChainDiagnostics diagnostics;
};

/// Deterministic given (config.seed, stream).
McmcResult estimate_correlations(const LatticeSpec& lattice, std::span<const double> K,
                                 const McmcQuery& query, const McmcConfig& config,
                                 std::uint64_t stream = 0);

/// Integrated autocorrelation time with Sokal's automatic window (c = 6).
double integrated_autocorrelation(std::span<const double> series);
ChainEstimate blocked_estimate(std::span<const double> series);

struct QuenchedMcmcQuantity {
  std::optional<std::size_t> bond;
  std::optional<Corridor> corridor;
};

struct QuenchedMcmcEstimate {
  Estimate estimate;
  double mean_inner_error = 0.0;
  std::size_t flagged_samples = 0;  // inner chains failing the ESS threshold
};

/// Outer disorder MC (g keyed by disorder_seed and sample index) around inner spin MCMC
/// (stream = sample index). The error is the outer sample std error, which already
/// contains the inner noise.
QuenchedMcmcEstimate quenched_estimate_mcmc(const LatticeSpec& lattice, const NishimoriParams& params,
                                            const QuenchedMcmcQuantity& quantity,
                                            std::size_t outer_samples, std::uint64_t disorder_seed,
                                            const McmcConfig& config, ParallelOptions par = {});

}  // namespace nlsurf
