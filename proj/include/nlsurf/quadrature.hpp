#pragma once

#include <vector>

namespace nlsurf {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the standard normal density (probabilists' convention):
/// sum_k w_k f(z_k) ~ E[f(Z)], Z ~ N(0, 1); weights sum to one.
QuadratureRule gauss_hermite(int n);

/// Equal-spaced rule on [-G, G], G = (2 pi (n - 1))^(1/3), Gaussian-weighted and normalised.
/// Converges geometrically for integrands analytic in a strip, which Gauss-Hermite does
/// not once the poles of tanh(x (x + z)) approach the real axis.
QuadratureRule gaussian_trapezoid(int n);

/// Gauss-Legendre rule on [0, 1]; weights sum to one.
QuadratureRule gauss_legendre_unit(int n);

}  // namespace nlsurf
