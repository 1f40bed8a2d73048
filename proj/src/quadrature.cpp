#include "nlsurf/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "nlsurf/errors.hpp"

namespace nlsurf {

namespace {

// Golub-Welsch: nodes are eigenvalues of the symmetric Jacobi matrix, weights the squared
// first eigenvector components times the total mass (1 here).
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Golub-Welsch eigensolve failed");
  const auto n = diag.size();
  QuadratureRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double v0 = solver.eigenvectors()(0, k);
    r.nodes[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
    r.weights[static_cast<std::size_t>(k)] = v0 * v0;
    total += v0 * v0;
  }
  for (auto& w : r.weights) w /= total;
  return r;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw InvalidArgument("gauss_hermite: need at least one node");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
  auto r = golub_welsch(diag, off);
  // Symmetrise: the rule is exactly symmetric about 0.
  for (int k = 0; k < n / 2; ++k) {
    const auto lo = static_cast<std::size_t>(k);
    const auto hi = static_cast<std::size_t>(n - 1 - k);
    const double z = 0.5 * (r.nodes[hi] - r.nodes[lo]);
    const double w = 0.5 * (r.weights[hi] + r.weights[lo]);
    r.nodes[lo] = -z;
    r.nodes[hi] = z;
    r.weights[lo] = r.weights[hi] = w;
  }
  if (n % 2 == 1) r.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return r;
}

QuadratureRule gaussian_trapezoid(int n) {
  if (n < 3) throw InvalidArgument("gaussian_trapezoid: need at least three nodes");
  const double half = std::cbrt(2.0 * M_PI * (n - 1));
  const double h = 2.0 * half / (n - 1);
  QuadratureRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    // Built from both ends so the rule is exactly symmetric.
    const double z = k < n / 2 ? -half + k * h : k == n / 2 && n % 2 == 1 ? 0.0 : half - (n - 1 - k) * h;
    r.nodes[static_cast<std::size_t>(k)] = z;
    r.weights[static_cast<std::size_t>(k)] = std::exp(-0.5 * z * z);
  }
  for (int k = 0; k < n; ++k) total += r.weights[static_cast<std::size_t>(k)];
  for (auto& w : r.weights) w /= total;
  return r;
}

QuadratureRule gauss_legendre_unit(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre_unit: need at least one node");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    off(k - 1) = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  auto r = golub_welsch(diag, off);
  for (auto& t : r.nodes) t = 0.5 * (t + 1.0);
  return r;
}

}  // namespace nlsurf
