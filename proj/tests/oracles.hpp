#pragma once

// Independent reference computations. Nothing here calls the library's engine or rules.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "nlsurf/lattice.hpp"

namespace oracle {

struct Gibbs {
  double log_z = 0.0;
  std::vector<double> bond;                 // <S_b>
  std::vector<std::vector<double>> pair;    // <S_b S_b'>
};

// Plain sum over all 2^N configurations, energies recomputed from scratch each time.
inline Gibbs enumerate(const nlsurf::LatticeSpec& lat, const std::vector<double>& K) {
  const std::size_t n = lat.n_sites;
  const std::size_t nb = lat.n_bonds();
  if (n > 20) throw std::runtime_error("oracle enumeration limited to 20 spins");
  std::vector<long double> e(1u << n);
  long double emax = -1e300L;
  for (std::size_t c = 0; c < (1u << n); ++c) {
    long double u = 0.0L;
    for (const auto& b : lat.bonds) {
      const int sa = (c >> b.site_a) & 1u ? -1 : 1;
      const int sb = (c >> b.site_b) & 1u ? -1 : 1;
      u += K[b.index] * sa * sb;
    }
    e[c] = u;
    if (u > emax) emax = u;
  }
  long double z = 0.0L;
  std::vector<long double> sb(nb, 0.0L);
  std::vector<std::vector<long double>> sp(nb, std::vector<long double>(nb, 0.0L));
  std::vector<int> prod(nb);
  for (std::size_t c = 0; c < (1u << n); ++c) {
    const long double w = std::exp(e[c] - emax);
    z += w;
    for (const auto& b : lat.bonds) {
      prod[b.index] = (((c >> b.site_a) ^ (c >> b.site_b)) & 1u) ? -1 : 1;
      sb[b.index] += w * prod[b.index];
    }
    for (std::size_t i = 0; i < nb; ++i) {
      for (std::size_t j = 0; j < nb; ++j) sp[i][j] += w * prod[i] * prod[j];
    }
  }
  Gibbs g;
  g.log_z = static_cast<double>(emax + std::log(z));
  g.bond.resize(nb);
  g.pair.assign(nb, std::vector<double>(nb));
  for (std::size_t i = 0; i < nb; ++i) {
    g.bond[i] = static_cast<double>(sb[i] / z);
    for (std::size_t j = 0; j < nb; ++j) g.pair[i][j] = static_cast<double>(sp[i][j] / z);
  }
  return g;
}

struct Rule {
  std::vector<double> z;
  std::vector<double> w;
};

// Probabilists' Gauss-Hermite by Newton iteration on the orthonormal Hermite recurrence
// (independent of the library's eigenvalue route).
inline Rule hermite(int n) {
  Rule r;
  r.z.assign(static_cast<std::size_t>(n), 0.0);
  r.w.assign(static_cast<std::size_t>(n), 0.0);
  const double pim4 = 0.7511255444649425;  // pi^(-1/4)
  const int m = (n + 1) / 2;
  double x = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      x -= 1.14 * std::pow(static_cast<double>(n), 0.426) / x;
    } else if (i == 2) {
      x = 1.86 * x - 0.86 * r.z[0];
    } else if (i == 3) {
      x = 1.91 * x - 0.91 * r.z[1];
    } else {
      x = 2.0 * x - r.z[static_cast<std::size_t>(i - 2)];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = x * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.z[static_cast<std::size_t>(i)] = x;
    r.z[static_cast<std::size_t>(n - 1 - i)] = -x;
    r.w[static_cast<std::size_t>(i)] = 2.0 / (pp * pp);
    r.w[static_cast<std::size_t>(n - 1 - i)] = 2.0 / (pp * pp);
  }
  // Physicists' nodes/weights -> standard normal.
  double total = 0.0;
  for (auto& v : r.w) total += v;
  for (std::size_t i = 0; i < r.z.size(); ++i) {
    r.z[i] *= std::sqrt(2.0);
    r.w[i] /= total;
  }
  return r;
}

// E[f(Z)], Z ~ N(0,1), by composite Simpson on [-14, 14].
inline double normal_expectation(const std::function<double(double)>& f, int intervals = 56000) {
  const double a = -14.0;
  const double h = 28.0 / intervals;
  const double c = 1.0 / std::sqrt(2.0 * M_PI);
  double s = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double z = a + i * h;
    const double wt = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += wt * f(z) * c * std::exp(-0.5 * z * z);
  }
  return s * h / 3.0;
}

// Tensor-product average of f over i.i.d. standard normals with the given rule.
inline double tensor_average(std::size_t dims, const Rule& r,
                             const std::function<double(const std::vector<double>&)>& f) {
  std::vector<double> g(dims);
  std::function<double(std::size_t)> rec = [&](std::size_t d) -> double {
    if (d == dims) return f(g);
    double s = 0.0;
    for (std::size_t i = 0; i < r.z.size(); ++i) {
      g[d] = r.z[i];
      s += r.w[i] * rec(d + 1);
    }
    return s;
  };
  return rec(0);
}

// K_b = x_b (x_b + g_b).
inline std::vector<double> couplings(const std::vector<double>& x, const std::vector<double>& g) {
  std::vector<double> K(x.size());
  for (std::size_t b = 0; b < x.size(); ++b) K[b] = x[b] * (x[b] + g[b]);
  return K;
}

}  // namespace oracle
