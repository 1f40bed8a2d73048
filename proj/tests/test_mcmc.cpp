#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nlsurf/exact_engine.hpp"
#include "nlsurf/mcmc.hpp"
#include "nlsurf/quenched.hpp"

using namespace nlsurf;

namespace {

std::vector<std::size_t> all_bonds(const LatticeSpec& l) {
  std::vector<std::size_t> v(l.n_bonds());
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

McmcConfig config(std::size_t sweeps, std::uint64_t seed, std::vector<double> ladder = {}) {
  McmcConfig c;
  c.sweeps = sweeps;
  c.burn_in = sweeps / 10;
  c.seed = seed;
  c.x_ladder = std::move(ladder);
  return c;
}

}  // namespace

TEST_SUITE("mcmc") {

TEST_CASE("K = 0 gives zero within errors") {
  const auto lat = build_lattice(2, 3, Boundary::Periodic);
  const std::vector<double> K(lat.n_bonds(), 0.0);
  const auto r = estimate_correlations(lat, K, {all_bonds(lat), {}, false}, config(20000, 2));
  for (const auto& e : r.bonds) CHECK(std::abs(e.value) <= 3.0 * e.std_error + 1e-12);
}

TEST_CASE("3x3 torus against exact enumeration") {
  const auto lat = build_lattice(2, 3, Boundary::Periodic);
  const auto p = NishimoriParams::uniform(lat.n_bonds(), 0.5);
  const auto d = sample_disorder(p, 42);
  const auto K = coupling_field(p, d);
  const ExactEngine eng(lat);
  const auto exact = eng.evaluate(K, GibbsQuery{all_bonds(lat), {}});
  const auto r = estimate_correlations(lat, K, {all_bonds(lat), {}, false}, config(100000, 3, {0.3, 0.4, 0.5}));
  for (std::size_t b = 0; b < lat.n_bonds(); ++b) {
    CHECK(std::abs(r.bonds[b].value - exact.bonds[b]) <= 3.0 * r.bonds[b].std_error);
  }
  CHECK(r.diagnostics.ess_ok);
  CHECK(r.diagnostics.acceptance.size() == 3);
  CHECK(r.diagnostics.exchange.size() == 2);
}

TEST_CASE("fixed seed reruns are bit-identical") {
  const auto lat = build_lattice(2, 3, Boundary::Free);
  const auto p = NishimoriParams::uniform(lat.n_bonds(), 0.7);
  const auto K = coupling_field(p, sample_disorder(p, 5));
  const auto dec = std::vector<std::size_t>{0, 3, 5};
  const auto c = config(5000, 9, {0.5, 0.7});
  const auto a = estimate_correlations(lat, K, {dec, {}, false}, c, 2);
  const auto b = estimate_correlations(lat, K, {dec, {}, false}, c, 2);
  for (std::size_t i = 0; i < dec.size(); ++i) {
    CHECK(a.bonds[i].value == b.bonds[i].value);
    CHECK(a.bonds[i].std_error == b.bonds[i].std_error);
  }
  const auto other = estimate_correlations(lat, K, {dec, {}, false}, c, 3);
  CHECK(other.bonds[0].value != a.bonds[0].value);
}

TEST_CASE("stationary distribution on the plaquette") {
  const auto lat = build_lattice(2, 2, Boundary::Free);
  for (std::uint64_t sample = 0; sample < 2; ++sample) {
    const auto p = NishimoriParams::uniform(4, 0.6);
    const auto K = coupling_field(p, sample_disorder(p, 17, sample));
    McmcConfig c = config(1000000, 21 + sample);
    c.burn_in = 1000;
    c.stride = 4;
    const auto r = estimate_correlations(lat, K, {{0}, {}, true}, c);
    const double n = static_cast<double>(std::accumulate(r.histogram.begin(), r.histogram.end(), std::uint64_t{0}));
    REQUIRE(n > 0.0);
    double lw[16];
    double mx = -1e300;
    for (unsigned s = 0; s < 16; ++s) {
      double e = 0.0;
      for (const auto& bd : lat.bonds) e += K[bd.index] * (((s >> bd.site_a) ^ (s >> bd.site_b)) & 1u ? -1.0 : 1.0);
      lw[s] = e;
      mx = std::max(mx, e);
    }
    double z = 0.0;
    for (double& v : lw) z += (v = std::exp(v - mx));
    for (unsigned s = 0; s < 16; ++s) {
      const double prob = lw[s] / z;
      const double sd = std::sqrt(n * prob * (1.0 - prob));
      CHECK(std::abs(static_cast<double>(r.histogram[s]) - n * prob) <= 3.0 * sd);
    }
  }
}

TEST_CASE("exchange does not bias the target replica") {
  const auto lat = build_lattice(2, 3, Boundary::Free);
  const auto p = NishimoriParams::uniform(lat.n_bonds(), 0.8);
  const auto K = coupling_field(p, sample_disorder(p, 31));
  const std::vector<std::size_t> q{1, 4, 9};
  const auto plain = estimate_correlations(lat, K, {q, {}, false}, config(60000, 4));
  const auto ladder = estimate_correlations(lat, K, {q, {}, false}, config(60000, 5, {0.4, 0.6, 0.8}));
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(std::abs(plain.bonds[i].value - ladder.bonds[i].value) <=
          3.0 * std::hypot(plain.bonds[i].std_error, ladder.bonds[i].std_error));
  }
}

TEST_CASE("corridor estimate averages its bonds") {
  const auto box = build_lattice(2, 4, Boundary::Free);
  const auto dec = decompose_box(box);
  const auto p = NishimoriParams::uniform(box.n_bonds(), 0.5);
  const auto K = coupling_field(p, sample_disorder(p, 2));
  const double exact = corridor_average(box, K, dec.corridor);
  const auto r = estimate_correlations(box, K, {{}, dec.corridor, false}, config(40000, 8));
  REQUIRE(r.corridor.has_value());
  CHECK(std::abs(r.corridor->value - exact) <= 3.0 * r.corridor->std_error);
}

TEST_CASE("two-level estimator against exact inner averages") {
  const auto lat = build_lattice(2, 2, Boundary::Free);
  const auto p = NishimoriParams::uniform(4, 0.6);
  const auto m = quenched_estimate_mcmc(lat, p, {std::size_t{0}, {}}, 400, 13, config(4000, 6));
  const auto e = quenched_correlation(lat, p, {{CorrelationKind::BondMean, 0, 0}}, DisorderMC{400, 13});
  CHECK(std::abs(m.estimate.value - e[0].value) <= 3.0 * m.estimate.std_error);
  CHECK(m.estimate.spin_mcmc);
  CHECK(m.mean_inner_error > 0.0);
  const auto again = quenched_estimate_mcmc(lat, p, {std::size_t{0}, {}}, 400, 13, config(4000, 6));
  CHECK(again.estimate.value == m.estimate.value);
  const auto zero = quenched_estimate_mcmc(lat, NishimoriParams::uniform(4, 0.0), {std::size_t{0}, {}}, 50, 1,
                                           config(2000, 1));
  CHECK(std::abs(zero.estimate.value) <= 3.0 * zero.estimate.std_error + 1e-12);
}

TEST_CASE("autocorrelation helpers") {
  std::vector<double> white(4096);
  std::uint64_t s = 88172645463325252ull;
  for (auto& v : white) {
    s ^= s << 13, s ^= s >> 7, s ^= s << 17;
    v = static_cast<double>(s >> 11) / 9007199254740992.0 - 0.5;
  }
  CHECK(integrated_autocorrelation(white) < 0.8);
  std::vector<double> ar(white.size());
  ar[0] = white[0];
  for (std::size_t i = 1; i < ar.size(); ++i) ar[i] = 0.9 * ar[i - 1] + white[i];
  const double tau = integrated_autocorrelation(ar);
  CHECK(tau > 5.0);
  CHECK(tau < 15.0);
  CHECK(blocked_estimate(ar).std_error > blocked_estimate(white).std_error);
}

TEST_CASE("configuration validation") {
  const auto lat = build_lattice(1, 3, Boundary::Free);
  const std::vector<double> K{0.1, 0.2};
  McmcConfig c = config(100, 1);
  c.burn_in = 100;
  CHECK_THROWS_AS(estimate_correlations(lat, K, {{0}, {}, false}, c), InvalidArgument);
  c = config(100, 1, {0.5, 0.2});
  CHECK_THROWS_AS(estimate_correlations(lat, K, {{0}, {}, false}, c), InvalidArgument);
  CHECK_THROWS_AS(estimate_correlations(lat, K, {{7}, {}, false}, config(100, 1)), InvalidArgument);
  CHECK_THROWS_AS(estimate_correlations(lat, std::vector<double>{0.1}, {{0}, {}, false}, config(100, 1)), InvalidArgument);
}

}  // TEST_SUITE
