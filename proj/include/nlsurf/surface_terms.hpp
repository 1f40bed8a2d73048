#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nlsurf/exact_engine.hpp"
#include "nlsurf/lattice.hpp"
#include "nlsurf/mcmc.hpp"
#include "nlsurf/quenched.hpp"

namespace nlsurf {

enum class SurfaceKind {
  AdjacencyTC,              // box minus its sub-boxes, any decomposition
  AdjacencyTL,              // side-2L box minus its 2^d side-L boxes
  PeriodicMinusFree,        // torus minus free box, same side
  SurfacePressureFree,      // free box against the k-magnified torus
  SurfacePressurePeriodic,  // torus of side L against the k-magnified torus
};

std::string to_string(SurfaceKind kind);

enum class Routes { Direct, Integral, Both };

struct SurfaceOptions {
  int t_nodes = 16;
  Routes routes = Routes::Both;
  ParallelOptions parallel;
  EngineOptions engine;
};

struct Geometry {
  int dim = 0;
  int L = 0;
  int k = 0;  // magnification; 0 where not applicable
  std::size_t corridor_size = 0;
};

/// Quenched corridor integrand [<S_C>_t]_t at one Gauss-Legendre node.
struct IntegrandNode {
  double t = 0.0;
  double weight = 0.0;
  Estimate value;
};

struct SurfaceTermResult {
  SurfaceKind kind = SurfaceKind::AdjacencyTL;
  std::optional<Estimate> direct;
  std::optional<Estimate> integral;
  Estimate per_unit_surface;
  std::optional<Estimate> route_difference;  // direct - integral, paired over shared disorder
  Geometry geometry;
  double x = 0.0;
  int t_nodes = 0;
  // One table per corridor entering the integral (two for the periodic surface pressure:
  // torus cut first, tiling interfaces second).
  std::vector<std::vector<IntegrandNode>> integrand;
  // Adjacency only: the same representation built from the corridor bond nearest the centre
  // of the box instead of the corridor average.
  std::optional<Estimate> center_bond;
  // Surface pressure only: two-point extrapolation in k^-d from this k and k + 1. Advisory.
  std::optional<Estimate> richardson;
  std::size_t flagged_chains = 0;
};

/// |direct - integral| <= quad_tol under quadrature, <= n_sigma paired std errors otherwise.
bool routes_agree(const SurfaceTermResult& r, double quad_tol = 1e-6, double n_sigma = 3.0);

SurfaceTermResult adjacency(int dim, int L, double x, const AveragingMethod& method,
                            const SurfaceOptions& options = {});
Estimate adjacency_direct(int dim, int L, double x, const AveragingMethod& method,
                          const SurfaceOptions& options = {});
Estimate adjacency_integral(int dim, int L, double x, const AveragingMethod& method, int t_nodes,
                            const SurfaceOptions& options = {});

/// T_C for an arbitrary decomposition of a free box.
SurfaceTermResult adjacency_pressure(const LatticeSpec& box, const Decomposition& decomposition,
                                     double x, const AveragingMethod& method,
                                     const SurfaceOptions& options = {});

SurfaceTermResult periodic_minus_free(int dim, int L, double x, const AveragingMethod& method,
                                      const SurfaceOptions& options = {});
SurfaceTermResult surface_pressure_free(int dim, int L, double x, int k, const AveragingMethod& method,
                                        const SurfaceOptions& options = {});
SurfaceTermResult surface_pressure_periodic(int dim, int L, double x, int k,
                                            const AveragingMethod& method,
                                            const SurfaceOptions& options = {});

/// Adds a Richardson estimate from k and k + 1 (both must fit the exact engine).
void add_richardson(SurfaceTermResult& result, const AveragingMethod& method,
                    const SurfaceOptions& options = {});

/// T^(Pi,Phi)_L = T^(Pi) - T^(Phi), with the left side from its own run (direct route) and the
/// right side from the integral routes of the k-magnified runs.
struct CompositionCheck {
  Estimate lhs;
  Estimate rhs;
  double discrepancy = 0.0;
  double combined_std_error = 0.0;
  bool passed = false;
};
CompositionCheck check_composition(const SurfaceTermResult& periodic_minus_free,
                                   const SurfaceTermResult& surface_free,
                                   const SurfaceTermResult& surface_periodic,
                                   double quad_tol = 1e-6, double n_sigma = 3.0);

/// Two-level estimator for lattices beyond the enumeration cap: integral route only.
struct McmcPlan {
  std::size_t outer_samples = 32;
  std::uint64_t disorder_seed = 0;
  McmcConfig config;
};

struct SweepOptions {
  SurfaceKind kind = SurfaceKind::AdjacencyTL;
  AveragingMethod exact_method = Quadrature{20};
  std::optional<McmcPlan> mcmc;  // used when the system exceeds the engine cap, or always if forced
  bool force_mcmc = false;
  SurfaceOptions surface;
};

std::vector<SurfaceTermResult> scaling_sweep(int dim, double x, const std::vector<int>& L_list, int k,
                                             const SweepOptions& options);

/// Integral route of the adjacency term on the 2L box via outer disorder MC + inner MCMC.
SurfaceTermResult adjacency_mcmc(int dim, int L, double x, const McmcPlan& plan, int t_nodes,
                                 ParallelOptions parallel = {});

}  // namespace nlsurf
