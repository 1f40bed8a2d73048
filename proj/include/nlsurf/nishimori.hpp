#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nlsurf/errors.hpp"
#include "nlsurf/lattice.hpp"

namespace nlsurf {

/// Physical per-bond parameters: inverse temperature, coupling mean and coupling std.
struct GaussianBondModel {
  std::vector<double> beta;
  std::vector<double> mu;
  std::vector<double> sigma;

  bool on_nishimori_line(std::size_t b, double rel_tol = 1e-12) const;
};

/// Per-bond x_b >= 0. On the Nishimori line the quenched pressure depends on nothing else.
struct NishimoriParams {
  std::vector<double> x;

  static NishimoriParams uniform(std::size_t n_bonds, double x);
  std::size_t n_bonds() const { return x.size(); }
  void validate() const;
};

class OffNishimoriLine : public InvalidArgument {
 public:
  OffNishimoriLine(std::vector<std::size_t> bonds, const std::string& what)
      : InvalidArgument(what), offending(std::move(bonds)) {}
  std::vector<std::size_t> offending;
};

NishimoriParams nl_from_physical(const GaussianBondModel& model, double rel_tol = 1e-12);

/// Physical model with sigma_b = 1: beta_b = x_b, mu_b = x_b.
GaussianBondModel physical_from_nl(const NishimoriParams& params);

/// j_b = x_b + g_b. The standard normals g are the primitive randomness; j follows from them.
struct DisorderRealization {
  std::vector<double> j;
  std::vector<double> g;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// g_b keyed by (seed, stream, bond): independent of evaluation order and thread count.
double disorder_normal(std::uint64_t seed, std::uint64_t stream, std::size_t bond);

DisorderRealization sample_disorder(const NishimoriParams& params, std::uint64_t seed,
                                    std::uint64_t stream = 0);

/// Reuse g under new means.
DisorderRealization shift_disorder(const DisorderRealization& real, const NishimoriParams& params);

/// K_b = x_b * j_b.
std::vector<double> coupling_field(const NishimoriParams& params, const DisorderRealization& real);

/// x_b(t) = base_x * sqrt(t) on the corridor, base_x elsewhere.
struct InterpolationSchedule {
  double base_x = 0.0;
  Corridor corridor;
  std::size_t n_bonds = 0;
  double t = 1.0;
};

NishimoriParams interpolated_params(const InterpolationSchedule& sched);

}  // namespace nlsurf
