#include "nlsurf/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nlsurf/philox.hpp"

namespace nlsurf {

void McmcConfig::validate() const {
  if (burn_in >= sweeps) throw InvalidArgument("McmcConfig: burn_in must be < sweeps");
  if (stride == 0) throw InvalidArgument("McmcConfig: stride must be >= 1");
  if (!std::is_sorted(x_ladder.begin(), x_ladder.end())) {
    throw InvalidArgument("McmcConfig: x_ladder must be ascending");
  }
  for (double x : x_ladder) {
    if (!(x >= 0.0)) throw InvalidArgument("McmcConfig: ladder entries must be >= 0");
  }
  if ((sweeps - burn_in) / stride == 0) throw InvalidArgument("McmcConfig: no measurements");
}

double integrated_autocorrelation(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) return 0.5;
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double c0 = 0.0;
  for (double v : series) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return 0.5;
  double tau = 0.5;
  for (std::size_t w = 1; w < n / 2; ++w) {
    double c = 0.0;
    for (std::size_t i = 0; i + w < n; ++i) c += (series[i] - mean) * (series[i + w] - mean);
    c /= static_cast<double>(n) * c0;
    tau += c;
    if (static_cast<double>(w) >= 6.0 * tau) break;
  }
  return std::max(tau, 0.5);
}

ChainEstimate blocked_estimate(std::span<const double> series) {
  ChainEstimate e;
  const std::size_t n = series.size();
  if (n == 0) return e;
  e.value = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  e.tau_int = integrated_autocorrelation(series);
  std::size_t block = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(20.0 * e.tau_int)));
  if (n / block < 20) block = std::max<std::size_t>(1, n / 20);
  const std::size_t n_blocks = n / block;
  if (n_blocks < 2) return e;
  std::vector<double> means(n_blocks, 0.0);
  for (std::size_t k = 0; k < n_blocks; ++k) {
    for (std::size_t i = 0; i < block; ++i) means[k] += series[k * block + i];
    means[k] /= static_cast<double>(block);
  }
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(n_blocks);
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  var /= static_cast<double>(n_blocks - 1);
  e.std_error = std::sqrt(var / static_cast<double>(n_blocks));
  return e;
}

namespace {

struct Neighbour {
  std::uint32_t site;
  std::uint32_t bond;
};

struct Replica {
  std::vector<std::int8_t> spin;
  double energy = 0.0;  // sum_b K_b S_b, unscaled
  double scale = 1.0;
  std::size_t accepted = 0;
  std::size_t attempted = 0;
};

}  // namespace

McmcResult estimate_correlations(const LatticeSpec& lattice, std::span<const double> K,
                                 const McmcQuery& query, const McmcConfig& config,
                                 std::uint64_t stream) {
  config.validate();
  if (K.size() != lattice.n_bonds()) throw InvalidArgument("spin MCMC: coupling field size mismatch");
  for (auto b : query.bonds) {
    if (b >= lattice.n_bonds()) throw InvalidArgument("spin MCMC: bond index out of range");
  }
  if (query.corridor && query.corridor->cardinality() == 0) {
    throw InvalidArgument("spin MCMC: empty corridor");
  }
  if (query.state_histogram && lattice.n_sites > 20) {
    throw InvalidArgument("spin MCMC: state histogram limited to 20 spins");
  }

  const std::size_t n = lattice.n_sites;
  std::vector<std::vector<Neighbour>> adj(n);
  for (const Bond& b : lattice.bonds) {
    adj[b.site_a].push_back({b.site_b, static_cast<std::uint32_t>(b.index)});
    adj[b.site_b].push_back({b.site_a, static_cast<std::uint32_t>(b.index)});
  }

  PhiloxStream rng(config.seed, stream);
  const std::size_t n_rep = config.replicas();
  const double top = config.x_ladder.empty() ? 0.0 : config.x_ladder.back();
  std::vector<Replica> reps(n_rep);
  for (std::size_t r = 0; r < n_rep; ++r) {
    auto& rep = reps[r];
    rep.scale = (config.x_ladder.empty() || top <= 0.0) ? 1.0 : config.x_ladder[r] / top;
    rep.spin.resize(n);
    for (auto& s : rep.spin) s = rng.uniform() < 0.5 ? 1 : -1;
    for (const Bond& b : lattice.bonds) rep.energy += K[b.index] * rep.spin[b.site_a] * rep.spin[b.site_b];
  }
  std::vector<std::size_t> swaps_accepted(n_rep > 1 ? n_rep - 1 : 0, 0);
  std::vector<std::size_t> swaps_attempted(swaps_accepted.size(), 0);

  const std::size_t n_meas = (config.sweeps - config.burn_in) / config.stride;
  std::vector<std::vector<double>> bond_series(query.bonds.size());
  for (auto& s : bond_series) s.reserve(n_meas);
  std::vector<double> corridor_series;
  corridor_series.reserve(n_meas);
  McmcResult res;
  if (query.state_histogram) res.histogram.assign(std::size_t{1} << n, 0);

  for (std::size_t sweep = 0; sweep < config.sweeps; ++sweep) {
    for (auto& rep : reps) {
      // Random site order: a fixed sweep order flips every spin at K = 0 and never mixes.
      for (std::size_t step = 0; step < n; ++step) {
        const auto i = std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
        double h = 0.0;
        for (const auto& nb : adj[i]) h += K[nb.bond] * rep.spin[nb.site];
        const double d_energy = -2.0 * rep.spin[i] * h;
        const double d_log_w = rep.scale * d_energy;
        ++rep.attempted;
        if (d_log_w >= 0.0 || rng.uniform() < std::exp(d_log_w)) {
          rep.spin[i] = static_cast<std::int8_t>(-rep.spin[i]);
          rep.energy += d_energy;
          ++rep.accepted;
        }
      }
    }
    for (std::size_t r = sweep % 2; r + 1 < n_rep; r += 2) {
      auto& lo = reps[r];
      auto& hi = reps[r + 1];
      const double d = (hi.scale - lo.scale) * (lo.energy - hi.energy);
      ++swaps_attempted[r];
      if (d >= 0.0 || rng.uniform() < std::exp(d)) {
        std::swap(lo.spin, hi.spin);
        std::swap(lo.energy, hi.energy);
        ++swaps_accepted[r];
      }
    }
    if (sweep >= config.burn_in && (sweep - config.burn_in) % config.stride == config.stride - 1) {
      const auto& target = reps.back().spin;
      for (std::size_t q = 0; q < query.bonds.size(); ++q) {
        const Bond& b = lattice.bonds[query.bonds[q]];
        bond_series[q].push_back(static_cast<double>(target[b.site_a] * target[b.site_b]));
      }
      if (query.corridor) {
        int sum = 0;
        for (auto bi : query.corridor->bond_indices) {
          const Bond& b = lattice.bonds[bi];
          sum += target[b.site_a] * target[b.site_b];
        }
        corridor_series.push_back(static_cast<double>(sum) /
                                  static_cast<double>(query.corridor->cardinality()));
      }
      if (query.state_histogram) {
        std::size_t word = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (target[i] < 0) word |= std::size_t{1} << i;
        }
        ++res.histogram[word];
      }
    }
  }

  for (const auto& s : bond_series) res.bonds.push_back(blocked_estimate(s));
  if (query.corridor) res.corridor = blocked_estimate(corridor_series);

  auto& diag = res.diagnostics;
  for (const auto& rep : reps) {
    diag.acceptance.push_back(static_cast<double>(rep.accepted) / static_cast<double>(std::max<std::size_t>(rep.attempted, 1)));
  }
  for (std::size_t r = 0; r < swaps_accepted.size(); ++r) {
    diag.exchange.push_back(static_cast<double>(swaps_accepted[r]) /
                            static_cast<double>(std::max<std::size_t>(swaps_attempted[r], 1)));
  }
  diag.measurements = n_meas;
  if (res.corridor) {
    diag.tau_int = res.corridor->tau_int;
  } else if (!res.bonds.empty()) {
    diag.tau_int = std::max_element(res.bonds.begin(), res.bonds.end(), [](const auto& a, const auto& b) {
                     return a.tau_int < b.tau_int;
                   })->tau_int;
  }
  diag.ess = std::min(static_cast<double>(n_meas), static_cast<double>(n_meas) / (2.0 * diag.tau_int));
  diag.ess_ok = diag.ess >= config.min_ess;
  return res;
}

QuenchedMcmcEstimate quenched_estimate_mcmc(const LatticeSpec& lattice, const NishimoriParams& params,
                                            const QuenchedMcmcQuantity& quantity,
                                            std::size_t outer_samples, std::uint64_t disorder_seed,
                                            const McmcConfig& config, ParallelOptions par) {
  params.validate();
  config.validate();
  if (params.n_bonds() != lattice.n_bonds()) throw InvalidArgument("quenched_estimate_mcmc: bond count mismatch");
  if (quantity.bond.has_value() == quantity.corridor.has_value()) {
    throw InvalidArgument("quenched_estimate_mcmc: give exactly one of bond or corridor");
  }
  McmcQuery q;
  if (quantity.bond) q.bonds = {*quantity.bond};
  q.corridor = quantity.corridor;

  const unsigned workers = resolve_workers(par.workers);
  std::vector<std::vector<double>> scratch(workers, std::vector<double>(lattice.n_bonds()));
  const auto avg = average_over_disorder(
      lattice.n_bonds(), DisorderMC{outer_samples, disorder_seed}, 3,
      [&](std::span<const double> g, std::span<double> out, unsigned thread, std::size_t sample) {
        auto& K = scratch[thread];
        for (std::size_t b = 0; b < K.size(); ++b) K[b] = params.x[b] * (params.x[b] + g[b]);
        const auto r = estimate_correlations(lattice, K, q, config, sample);
        const auto& ce = quantity.bond ? r.bonds[0] : *r.corridor;
        out[0] = ce.value;
        out[1] = ce.std_error;
        out[2] = r.diagnostics.ess_ok ? 0.0 : 1.0;
      },
      ParallelOptions{workers});
  QuenchedMcmcEstimate out;
  out.estimate = Estimate{avg.mean[0], avg.std_error[0], DisorderMC{outer_samples, disorder_seed},
                          lattice.n_bonds(), lattice.n_sites, true};
  out.mean_inner_error = avg.mean[1];
  out.flagged_samples = static_cast<std::size_t>(std::llround(avg.mean[2] * static_cast<double>(outer_samples)));
  return out;
}

}  // namespace nlsurf
