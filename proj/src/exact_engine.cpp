#include "nlsurf/exact_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>

namespace nlsurf {

namespace {

// Independent set to sum out: the larger colour class of each bipartite component,
// a greedy low-degree-first set elsewhere.
std::vector<bool> choose_summed_sites(const LatticeSpec& lat,
                                      const std::vector<std::vector<std::uint32_t>>& adj) {
  const std::size_t n = lat.n_sites;
  std::vector<bool> summed(n, false);
  std::vector<int> colour(n, -1);
  for (std::size_t root = 0; root < n; ++root) {
    if (colour[root] >= 0) continue;
    std::vector<std::uint32_t> comp;
    bool bipartite = true;
    std::deque<std::uint32_t> queue{static_cast<std::uint32_t>(root)};
    colour[root] = 0;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      comp.push_back(u);
      for (auto v : adj[u]) {
        if (colour[v] < 0) {
          colour[v] = 1 - colour[u];
          queue.push_back(v);
        } else if (colour[v] == colour[u]) {
          bipartite = false;
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    if (bipartite) {
      std::size_t ones = 0;
      for (auto u : comp) ones += static_cast<std::size_t>(colour[u]);
      const int pick = ones * 2 >= comp.size() ? 1 : 0;
      for (auto u : comp) summed[u] = colour[u] == pick;
    } else {
      std::stable_sort(comp.begin(), comp.end(), [&](auto a, auto b) { return adj[a].size() < adj[b].size(); });
      for (auto u : comp) {
        bool free_of_summed = true;
        for (auto v : adj[u]) free_of_summed = free_of_summed && !summed[v];
        if (free_of_summed) summed[u] = true;
      }
    }
  }
  return summed;
}

}  // namespace

ExactEngine::ExactEngine(const LatticeSpec& lattice, EngineOptions options)
    : n_sites_(lattice.n_sites), n_bonds_(lattice.n_bonds()) {
  if (options.max_sites > 62) options.max_sites = 62;
  if (lattice.n_sites > options.max_sites) {
    throw SizeError("exact engine: " + std::to_string(lattice.n_sites) +
                    " spins exceed the enumeration cap of " + std::to_string(options.max_sites) +
                    "; use the spin MCMC estimator");
  }
  std::vector<std::vector<std::uint32_t>> adj(n_sites_);
  bond_ends_.reserve(n_bonds_);
  for (const Bond& b : lattice.bonds) {
    adj[b.site_a].push_back(b.site_b);
    adj[b.site_b].push_back(b.site_a);
    bond_ends_.emplace_back(b.site_a, b.site_b);
  }

  std::vector<bool> summed(n_sites_, false);
  if (options.sum_out_independent_set) summed = choose_summed_sites(lattice, adj);

  slot_of_.assign(n_sites_, 0);
  for (std::uint32_t s = 0; s < n_sites_; ++s) {
    if (summed[s]) {
      slot_of_[s] = -static_cast<int>(summed_.size()) - 1;
      summed_.push_back(s);
    } else {
      slot_of_[s] = static_cast<int>(enumerated_.size());
      enumerated_.push_back(s);
    }
  }

  enum_edges_.assign(enumerated_.size(), {});
  field_edges_.assign(enumerated_.size(), {});
  for (const Bond& b : lattice.bonds) {
    const int sa = slot_of_[b.site_a];
    const int sb = slot_of_[b.site_b];
    const auto bi = static_cast<std::uint32_t>(b.index);
    if (sa >= 0 && sb >= 0) {
      enum_edges_[static_cast<std::size_t>(sa)].push_back({bi, static_cast<std::uint32_t>(sb)});
      enum_edges_[static_cast<std::size_t>(sb)].push_back({bi, static_cast<std::uint32_t>(sa)});
    } else if (sa >= 0) {
      field_edges_[static_cast<std::size_t>(sa)].push_back({bi, static_cast<std::uint32_t>(-sb - 1)});
    } else if (sb >= 0) {
      field_edges_[static_cast<std::size_t>(sb)].push_back({bi, static_cast<std::uint32_t>(-sa - 1)});
    } else {
      throw std::logic_error("exact engine: summed sites are not independent");
    }
  }
}

ExactEngine::Observables ExactEngine::compile(const GibbsQuery& query) const {
  auto bond_term = [&](std::size_t b) {
    if (b >= n_bonds_) throw InvalidArgument("exact engine: bond index " + std::to_string(b) + " out of range");
    Observables::Term t;
    for (auto site : {bond_ends_[b].first, bond_ends_[b].second}) {
      const int slot = slot_of_[site];
      if (slot >= 0) {
        t.mask ^= std::uint64_t{1} << slot;
      } else {
        t.field_a = -slot - 1;
      }
    }
    return t;
  };
  Observables obs;
  obs.n_bonds = query.bonds.size();
  obs.n_pairs = query.pairs.size();
  for (auto b : query.bonds) obs.terms.push_back(bond_term(b));
  for (auto [b1, b2] : query.pairs) {
    const auto t1 = bond_term(b1);
    const auto t2 = bond_term(b2);
    Observables::Term t;
    t.mask = t1.mask ^ t2.mask;
    if (t1.field_a >= 0 && t1.field_a == t2.field_a) {
      // s_i^2 = 1 on a shared summed site
    } else {
      t.field_a = t1.field_a >= 0 ? t1.field_a : t2.field_a;
      t.field_b = t1.field_a >= 0 ? t2.field_a : -1;
    }
    obs.terms.push_back(t);
  }
  return obs;
}

void ExactEngine::check_couplings(std::span<const double> K) const {
  if (K.size() != n_bonds_) {
    throw InvalidArgument("exact engine: coupling field has " + std::to_string(K.size()) +
                          " entries, lattice has " + std::to_string(n_bonds_) + " bonds");
  }
  for (double k : K) {
    if (!std::isfinite(k)) throw InvalidArgument("exact engine: non-finite coupling");
  }
}

void ExactEngine::evaluate(std::span<const double> K, const Observables& obs, Workspace& ws,
                           GibbsReport& out) const {
  check_couplings(K);
  const std::size_t n_enum = enumerated_.size();
  const std::size_t n_sum = summed_.size();
  const std::size_t n_terms = obs.terms.size();
  bool need_tanh = false;
  for (const auto& t : obs.terms) need_tanh = need_tanh || t.field_a >= 0;

  ws.spin.resize(n_enum);
  ws.field.resize(n_sum);
  ws.tanh_field.resize(n_sum);
  ws.acc.resize(n_terms);
  std::fill(ws.spin.begin(), ws.spin.end(), 1.0);
  std::fill(ws.field.begin(), ws.field.end(), 0.0);
  std::fill(ws.acc.begin(), ws.acc.end(), 0.0);

  double energy = 0.0;
  for (std::size_t a = 0; a < n_enum; ++a) {
    for (const Edge& e : enum_edges_[a]) {
      if (e.other > a) energy += K[e.bond];
    }
    for (const Edge& e : field_edges_[a]) ws.field[e.other] += K[e.bond];
  }

  const std::uint64_t n_states = n_enum > 0 ? (std::uint64_t{1} << (n_enum - 1)) : 1;
  std::uint64_t word = 0;  // bit a set <=> spin a is -1; slot 0 pinned to +1
  double shift = 0.0;
  double z = 0.0;

  for (std::uint64_t m = 0; m < n_states; ++m) {
    if (m > 0) {
      const auto a = static_cast<std::size_t>(std::countr_zero(m)) + 1;
      const double s = ws.spin[a];
      for (const Edge& e : enum_edges_[a]) energy -= 2.0 * K[e.bond] * s * ws.spin[e.other];
      for (const Edge& e : field_edges_[a]) ws.field[e.other] -= 2.0 * K[e.bond] * s;
      ws.spin[a] = -s;
      word ^= std::uint64_t{1} << a;
    }

    double log_w = energy;
    double factor = 1.0;
    for (std::size_t i = 0; i < n_sum; ++i) {
      const double h = std::abs(ws.field[i]);
      const double e = std::exp(-2.0 * h);
      log_w += h;
      factor *= 1.0 + e;
      if (need_tanh) ws.tanh_field[i] = std::copysign((1.0 - e) / (1.0 + e), ws.field[i]);
    }
    if (m == 0) {
      shift = log_w;
    } else if (log_w > shift) {
      const double r = std::exp(shift - log_w);
      z *= r;
      for (auto& v : ws.acc) v *= r;
      shift = log_w;
    }
    const double w = std::exp(log_w - shift) * factor;
    z += w;
    for (std::size_t k = 0; k < n_terms; ++k) {
      const auto& t = obs.terms[k];
      double v = (std::popcount(word & t.mask) & 1) ? -w : w;
      if (t.field_a >= 0) v *= ws.tanh_field[static_cast<std::size_t>(t.field_a)];
      if (t.field_b >= 0) v *= ws.tanh_field[static_cast<std::size_t>(t.field_b)];
      ws.acc[k] += v;
    }
  }

  out.log_z = shift + std::log(z) + (n_enum > 0 ? std::numbers::ln2 : 0.0);
  out.bonds.resize(obs.n_bonds);
  out.pairs.resize(obs.n_pairs);
  for (std::size_t k = 0; k < obs.n_bonds; ++k) out.bonds[k] = ws.acc[k] / z;
  for (std::size_t k = 0; k < obs.n_pairs; ++k) out.pairs[k] = ws.acc[obs.n_bonds + k] / z;
}

GibbsReport ExactEngine::evaluate(std::span<const double> K, const GibbsQuery& query) const {
  Workspace ws;
  GibbsReport rep;
  evaluate(K, compile(query), ws, rep);
  return rep;
}

double ExactEngine::log_partition(std::span<const double> K, Workspace& ws) const {
  static const Observables none{};
  GibbsReport rep;
  evaluate(K, none, ws, rep);
  return rep.log_z;
}

double ExactEngine::log_partition(std::span<const double> K) const {
  Workspace ws;
  return log_partition(K, ws);
}

double log_partition(const LatticeSpec& lattice, std::span<const double> K, EngineOptions options) {
  return ExactEngine(lattice, options).log_partition(K);
}

double bond_correlation(const LatticeSpec& lattice, std::span<const double> K, std::size_t b,
                        EngineOptions options) {
  return ExactEngine(lattice, options).evaluate(K, GibbsQuery{{b}, {}}).bonds[0];
}

double pair_correlation(const LatticeSpec& lattice, std::span<const double> K, std::size_t b,
                        std::size_t b2, EngineOptions options) {
  if (b == b2) throw InvalidArgument("pair_correlation: bonds must differ");
  return ExactEngine(lattice, options).evaluate(K, GibbsQuery{{}, {{b, b2}}}).pairs[0];
}

double corridor_average(const LatticeSpec& lattice, std::span<const double> K,
                        const Corridor& corridor, EngineOptions options) {
  if (corridor.cardinality() == 0) throw InvalidArgument("corridor_average: empty corridor");
  const auto rep = ExactEngine(lattice, options).evaluate(K, GibbsQuery{corridor.bond_indices, {}});
  double s = 0.0;
  for (double v : rep.bonds) s += v;
  return s / static_cast<double>(corridor.cardinality());
}

}  // namespace nlsurf
