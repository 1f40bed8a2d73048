#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "nlsurf/lattice.hpp"

namespace nlsurf {

struct EngineOptions {
  std::size_t max_sites = 24;
  // Sum an independent set of sites out analytically (each contributes 2 cosh h_i) and
  // Gray-code enumerate only the rest. Exact; off gives plain full enumeration.
  bool sum_out_independent_set = true;
};

/// Bonds and bond pairs whose Gibbs expectations are wanted from a single sweep.
struct GibbsQuery {
  std::vector<std::size_t> bonds;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

struct GibbsReport {
  double log_z = 0.0;
  std::vector<double> bonds;  // <S_b>, aligned with GibbsQuery::bonds
  std::vector<double> pairs;  // <S_b S_b'>, aligned with GibbsQuery::pairs
};

/// Exact Boltzmann-Gibbs sums at fixed couplings K_b by enumerating spin configurations.
/// Construction fixes the enumeration plan for one lattice; evaluate() is const and
/// thread-safe given a per-thread Workspace.
class ExactEngine {
 public:
  explicit ExactEngine(const LatticeSpec& lattice, EngineOptions options = {});

  // Precompiled form of a GibbsQuery.
  struct Observables {
    struct Term {
      std::uint64_t mask = 0;  // parity over enumerated spins
      int field_a = -1;        // summed-out sites contributing tanh(h_i)
      int field_b = -1;
    };
    std::vector<Term> terms;
    std::size_t n_bonds = 0;
    std::size_t n_pairs = 0;
  };

  struct Workspace {
    std::vector<double> spin, field, tanh_field, acc;
  };

  Observables compile(const GibbsQuery& query) const;

  void evaluate(std::span<const double> K, const Observables& obs, Workspace& ws,
                GibbsReport& out) const;
  GibbsReport evaluate(std::span<const double> K, const GibbsQuery& query) const;
  double log_partition(std::span<const double> K, Workspace& ws) const;
  double log_partition(std::span<const double> K) const;

  std::size_t n_sites() const { return n_sites_; }
  std::size_t n_bonds() const { return n_bonds_; }
  std::size_t enumerated_sites() const { return enumerated_.size(); }
  std::size_t summed_sites() const { return summed_.size(); }

 private:
  struct Edge {
    std::uint32_t bond;
    std::uint32_t other;  // enumerated slot or summed slot
  };
  std::size_t n_sites_ = 0;
  std::size_t n_bonds_ = 0;
  std::vector<std::uint32_t> enumerated_;  // slot -> site
  std::vector<std::uint32_t> summed_;      // slot -> site
  std::vector<int> slot_of_;               // site -> enumerated slot, or -(summed slot)-1
  std::vector<std::vector<Edge>> enum_edges_;   // per enumerated slot, to enumerated slots
  std::vector<std::vector<Edge>> field_edges_;  // per enumerated slot, to summed slots
  std::vector<std::pair<std::uint32_t, std::uint32_t>> bond_ends_;

  void check_couplings(std::span<const double> K) const;
};

// Convenience wrappers; each builds an engine and does one sweep.
double log_partition(const LatticeSpec& lattice, std::span<const double> K,
                     EngineOptions options = {});
double bond_correlation(const LatticeSpec& lattice, std::span<const double> K, std::size_t b,
                        EngineOptions options = {});
double pair_correlation(const LatticeSpec& lattice, std::span<const double> K, std::size_t b,
                        std::size_t b2, EngineOptions options = {});
double corridor_average(const LatticeSpec& lattice, std::span<const double> K,
                        const Corridor& corridor, EngineOptions options = {});

}  // namespace nlsurf
