#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nlsurf/quadrature.hpp"
#include "oracles.hpp"

using namespace nlsurf;

namespace {

double apply(const QuadratureRule& r, const std::function<double(double)>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
  return s;
}

double log_4cosh(double k) { return std::log(4.0) + std::abs(k) + std::log1p(std::exp(-2.0 * std::abs(k))) - std::log(2.0); }

}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("Gauss-Hermite: normalisation, symmetry and moments") {
  for (int n : {1, 2, 5, 10, 20, 41, 64, 200}) {
    const auto r = gauss_hermite(n);
    REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
    CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      CHECK(r.nodes[i] == -r.nodes[r.nodes.size() - 1 - i]);
      CHECK(r.weights[i] > 0.0);
    }
    // (2k-1)!!. At n = 200 the outermost weights are ~1e-80 and only absolutely accurate,
    // which shows in moments past z^20.
    double dfact = 1.0;
    for (int k = 1; 2 * k <= std::min(2 * n - 1, n >= 200 ? 20 : 24); ++k) {
      dfact *= 2 * k - 1;
      CHECK(apply(r, [k](double z) { return std::pow(z, 2 * k); }) == doctest::Approx(dfact).epsilon(1e-11));
    }
  }
  CHECK_THROWS_AS(gauss_hermite(0), InvalidArgument);
}

TEST_CASE("Gauss-Hermite matches the Newton-iteration oracle") {
  for (int n : {8, 20, 40}) {
    const auto r = gauss_hermite(n);
    const auto o = oracle::hermite(n);
    std::vector<double> on = o.z;
    std::sort(on.begin(), on.end());
    for (std::size_t i = 0; i < on.size(); ++i) CHECK(r.nodes[i] == doctest::Approx(on[i]).epsilon(1e-12));
  }
}

TEST_CASE("Gauss-Legendre on [0,1]") {
  for (int n : {2, 8, 16, 32}) {
    const auto r = gauss_legendre_unit(n);
    CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (double t : r.nodes) CHECK((t > 0.0 && t < 1.0));
    for (int p = 0; p <= 2 * n - 1; ++p) {
      CHECK(apply(r, [p](double t) { return std::pow(t, p); }) == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("Gaussian trapezoid rule") {
  const auto r = gaussian_trapezoid(41);
  CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t i = 0; i < r.nodes.size(); ++i) CHECK(r.nodes[i] == -r.nodes[r.nodes.size() - 1 - i]);
  CHECK(r.nodes[20] == 0.0);
  CHECK(apply(r, [](double z) { return z * z; }) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(gaussian_trapezoid(2), InvalidArgument);
}

// Single-bond quenched pressure E[ln(4 cosh(x (x + Z)))].
TEST_CASE("single-bond pressure against the Simpson oracle") {
  for (double x : {0.3, 1.0, 2.0}) {
    const auto f = [x](double z) { return log_4cosh(x * (x + z)); };
    const double ref = oracle::normal_expectation(f);
    CHECK(std::abs(apply(gauss_hermite(200), f) - ref) < 1e-9);
    CHECK(std::abs(apply(gaussian_trapezoid(65), f) - ref) < 1e-9);
  }
}

// The rate at which these rules converge depends on x: tanh(x (x + z)) has poles at
// Im z = pi / (2x). Gauss-Hermite 10 -> 20 -> 40 settles below 1e-10 only for x <= 0.3.
TEST_CASE("Gauss-Hermite convergence in the node count") {
  for (double x : {0.1, 0.2, 0.3}) {
    const auto f = [x](double z) { return log_4cosh(x * (x + z)); };
    CHECK(std::abs(apply(gauss_hermite(20), f) - apply(gauss_hermite(10), f)) < 1e-10);
    CHECK(std::abs(apply(gauss_hermite(40), f) - apply(gauss_hermite(20), f)) < 1e-10);
  }
  for (double x : {0.5, 1.0, 2.0}) {
    const auto f = [x](double z) { return log_4cosh(x * (x + z)); };
    const double ref = oracle::normal_expectation(f);
    const double e10 = std::abs(apply(gauss_hermite(10), f) - ref);
    const double e40 = std::abs(apply(gauss_hermite(40), f) - ref);
    const double e160 = std::abs(apply(gauss_hermite(160), f) - ref);
    CHECK(e40 < e10);
    CHECK(e160 < std::max(e40, 1e-12));  // both may sit at the oracle's rounding floor
  }
}

TEST_CASE("trapezoid beats Gauss-Hermite at large x for the same node count") {
  for (double x : {1.2, 1.5}) {
    const auto f = [x](double z) { return std::pow(std::tanh(x * (x + z)), 2); };
    const double ref = oracle::normal_expectation(f);
    const double gh = std::abs(apply(gauss_hermite(41), f) - ref);
    const double tr = std::abs(apply(gaussian_trapezoid(41), f) - ref);
    CHECK(tr < gh / 10);
    CHECK(tr < 1e-7);
  }
}

}  // TEST_SUITE
