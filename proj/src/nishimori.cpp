#include "nlsurf/nishimori.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlsurf/philox.hpp"

namespace nlsurf {

bool GaussianBondModel::on_nishimori_line(std::size_t b, double rel_tol) const {
  const double lhs = beta[b] * sigma[b] * sigma[b];
  const double scale = std::max({std::abs(lhs), std::abs(mu[b]), 1e-300});
  return std::abs(lhs - mu[b]) <= rel_tol * scale;
}

NishimoriParams NishimoriParams::uniform(std::size_t n_bonds, double x) {
  NishimoriParams p;
  p.x.assign(n_bonds, x);
  p.validate();
  return p;
}

void NishimoriParams::validate() const {
  for (std::size_t b = 0; b < x.size(); ++b) {
    if (!(x[b] >= 0.0) || !std::isfinite(x[b])) {
      throw InvalidArgument("NishimoriParams: x[" + std::to_string(b) + "] must be finite and >= 0");
    }
  }
}

NishimoriParams nl_from_physical(const GaussianBondModel& model, double rel_tol) {
  const std::size_t n = model.beta.size();
  if (model.mu.size() != n || model.sigma.size() != n) {
    throw InvalidArgument("nl_from_physical: per-bond arrays differ in length");
  }
  std::vector<std::size_t> bad;
  NishimoriParams p;
  p.x.resize(n);
  for (std::size_t b = 0; b < n; ++b) {
    if (!(model.beta[b] >= 0.0) || !(model.mu[b] >= 0.0) || !(model.sigma[b] > 0.0) ||
        !model.on_nishimori_line(b, rel_tol)) {
      bad.push_back(b);
      continue;
    }
    p.x[b] = model.beta[b] * model.sigma[b];
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "nl_from_physical: off the Nishimori line at bond(s)";
    for (auto b : bad) os << ' ' << b;
    throw OffNishimoriLine(std::move(bad), os.str());
  }
  return p;
}

GaussianBondModel physical_from_nl(const NishimoriParams& params) {
  params.validate();
  GaussianBondModel m;
  m.beta = params.x;
  m.mu = params.x;
  m.sigma.assign(params.x.size(), 1.0);
  return m;
}

double disorder_normal(std::uint64_t seed, std::uint64_t stream, std::size_t bond) {
  return keyed_normal(seed, stream, static_cast<std::uint32_t>(bond), 0x4e4c0001u);
}

DisorderRealization sample_disorder(const NishimoriParams& params, std::uint64_t seed,
                                    std::uint64_t stream) {
  params.validate();
  DisorderRealization r;
  r.seed = seed;
  r.stream = stream;
  r.g.resize(params.n_bonds());
  r.j.resize(params.n_bonds());
  for (std::size_t b = 0; b < params.n_bonds(); ++b) {
    r.g[b] = disorder_normal(seed, stream, b);
    r.j[b] = params.x[b] + r.g[b];
  }
  return r;
}

DisorderRealization shift_disorder(const DisorderRealization& real, const NishimoriParams& params) {
  if (params.n_bonds() != real.g.size()) {
    throw InvalidArgument("shift_disorder: bond count mismatch");
  }
  DisorderRealization r = real;
  for (std::size_t b = 0; b < r.g.size(); ++b) r.j[b] = params.x[b] + r.g[b];
  return r;
}

std::vector<double> coupling_field(const NishimoriParams& params, const DisorderRealization& real) {
  if (params.n_bonds() != real.j.size()) {
    throw InvalidArgument("coupling_field: bond count mismatch");
  }
  std::vector<double> k(real.j.size());
  for (std::size_t b = 0; b < k.size(); ++b) k[b] = params.x[b] * real.j[b];
  return k;
}

NishimoriParams interpolated_params(const InterpolationSchedule& sched) {
  if (!(sched.t >= 0.0 && sched.t <= 1.0)) {
    throw InvalidArgument("interpolated_params: t must lie in [0, 1]");
  }
  if (!(sched.base_x >= 0.0)) throw InvalidArgument("interpolated_params: base_x must be >= 0");
  NishimoriParams p;
  p.x.assign(sched.n_bonds, sched.base_x);
  const double xc = sched.base_x * std::sqrt(sched.t);
  for (auto b : sched.corridor.bond_indices) {
    if (b >= sched.n_bonds) throw InvalidArgument("interpolated_params: corridor bond out of range");
    p.x[b] = xc;
  }
  return p;
}

}  // namespace nlsurf
