#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlsurf/exact_engine.hpp"
#include "oracles.hpp"

using namespace nlsurf;

namespace {

std::vector<double> random_K(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.3, 1.0);
  std::vector<double> K(n);
  for (auto& k : K) k = scale * nd(rng);
  return K;
}

std::vector<LatticeSpec> small_lattices() {
  return {
      build_lattice(1, 2, Boundary::Free),
      build_lattice(1, 5, Boundary::Free),
      build_lattice(1, 6, Boundary::Periodic),
      build_lattice(1, 2, Boundary::Periodic, LatticeOptions{true}),
      build_lattice(2, 2, Boundary::Free),
      build_lattice(2, 3, Boundary::Free),
      build_lattice(2, 3, Boundary::Periodic),
      build_lattice(2, 2, Boundary::Periodic, LatticeOptions{true}),
      build_lattice(2, 4, Boundary::Free),
      build_lattice(2, 4, Boundary::Periodic),
      build_lattice(3, 2, Boundary::Free),
  };
}

}  // namespace

TEST_SUITE("exact_engine") {

TEST_CASE("log_partition examples") {
  const auto chain = build_lattice(1, 4, Boundary::Free);
  CHECK(log_partition(chain, std::vector<double>(3, 0.0)) == doctest::Approx(4 * std::numbers::ln2).epsilon(1e-15));
  const auto one = build_lattice(1, 2, Boundary::Free);
  CHECK(log_partition(one, std::vector<double>{0.5}) == doctest::Approx(std::log(4 * std::cosh(0.5))).epsilon(1e-15));
  const auto sq = build_lattice(2, 2, Boundary::Free);
  const std::vector<double> K{0.3, -0.2, 0.7, 0.1};
  CHECK(log_partition(sq, K) == doctest::Approx(oracle::enumerate(sq, K).log_z).epsilon(1e-14));
}

TEST_CASE("bond and pair correlation examples") {
  const auto one = build_lattice(1, 2, Boundary::Free);
  CHECK(bond_correlation(one, std::vector<double>{0.5}, 0) == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
  const auto sq = build_lattice(2, 2, Boundary::Free);
  for (std::size_t b = 0; b < 4; ++b) CHECK(bond_correlation(sq, std::vector<double>(4, 0.0), b) == 0.0);
  const std::vector<double> K{0.3, -0.2, 0.7, 0.1};
  const auto ref = oracle::enumerate(sq, K);
  CHECK(bond_correlation(sq, K, 0) == doctest::Approx(ref.bond[0]).epsilon(1e-14));

  const auto chain3 = build_lattice(1, 3, Boundary::Free);
  const std::vector<double> K2{0.8, -1.3};
  const double pair = pair_correlation(chain3, K2, 0, 1);
  CHECK(pair == doctest::Approx(std::tanh(0.8) * std::tanh(-1.3)).epsilon(1e-14));
  CHECK(pair - bond_correlation(chain3, K2, 0) * bond_correlation(chain3, K2, 1) ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK(pair_correlation(chain3, std::vector<double>{0.0, 0.0}, 0, 1) == 0.0);

  const std::vector<double> half(4, 0.5);
  const auto r = oracle::enumerate(sq, half);
  // bonds 0 and 2 meet at the origin corner
  const double p02 = pair_correlation(sq, half, 0, 2);
  CHECK(p02 == doctest::Approx(r.pair[0][2]).epsilon(1e-14));
  CHECK(p02 - r.bond[0] * r.bond[2] > 1e-3);
  CHECK_THROWS_AS(pair_correlation(sq, half, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(bond_correlation(sq, half, 4), InvalidArgument);
}

TEST_CASE("corridor_average") {
  const auto chain = build_lattice(1, 4, Boundary::Free);
  const std::vector<double> K{0.4, 0.9, -0.3};
  Corridor mid{{1}, CorridorKind::Midplanes};
  CHECK(corridor_average(chain, K, mid) == doctest::Approx(std::tanh(0.9)).epsilon(1e-15));
  CHECK(corridor_average(chain, K, mid) == bond_correlation(chain, K, 1));
  CHECK(corridor_average(chain, std::vector<double>(3, 0.0), mid) == 0.0);
  CHECK_THROWS_AS(corridor_average(chain, K, Corridor{}), InvalidArgument);
  const auto box = build_lattice(2, 4, Boundary::Free);
  const auto dec = decompose_box(box);
  std::mt19937_64 rng(5);
  const auto Kb = random_K(box.n_bonds(), rng);
  const auto ref = oracle::enumerate(box, Kb);
  double avg = 0.0;
  for (auto b : dec.corridor.bond_indices) avg += ref.bond[b];
  avg /= static_cast<double>(dec.corridor.cardinality());
  CHECK(corridor_average(box, Kb, dec.corridor) == doctest::Approx(avg).epsilon(1e-13));
}

TEST_CASE("summed-out, plain Gray-code and naive enumeration agree") {
  std::mt19937_64 rng(2024);
  EngineOptions plain;
  plain.sum_out_independent_set = false;
  for (const auto& lat : small_lattices()) {
    const ExactEngine fast(lat);
    const ExactEngine slow(lat, plain);
    CHECK(slow.summed_sites() == 0);
    if (lat.n_sites >= 4) CHECK(fast.summed_sites() > 0);
    GibbsQuery q;
    for (std::size_t b = 0; b < lat.n_bonds(); ++b) q.bonds.push_back(b);
    for (std::size_t b = 0; b < lat.n_bonds(); ++b) {
      for (std::size_t c = 0; c < lat.n_bonds(); ++c) {
        if (b != c) q.pairs.emplace_back(b, c);
      }
    }
    for (int rep = 0; rep < 4; ++rep) {
      const auto K = random_K(lat.n_bonds(), rng, rep == 3 ? 6.0 : 1.0);
      const auto ref = oracle::enumerate(lat, K);
      for (const auto* eng : {&fast, &slow}) {
        const auto r = eng->evaluate(K, q);
        CHECK(r.log_z == doctest::Approx(ref.log_z).epsilon(1e-13));
        for (std::size_t b = 0; b < lat.n_bonds(); ++b) CHECK(r.bonds[b] == doctest::Approx(ref.bond[b]).epsilon(1e-12));
        for (std::size_t k = 0; k < q.pairs.size(); ++k) {
          CHECK(r.pairs[k] == doctest::Approx(ref.pair[q.pairs[k].first][q.pairs[k].second]).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("report bounds") {
  std::mt19937_64 rng(3);
  const auto lat = build_lattice(2, 3, Boundary::Periodic);
  const ExactEngine eng(lat);
  GibbsQuery q;
  for (std::size_t b = 0; b < lat.n_bonds(); ++b) q.bonds.push_back(b);
  q.pairs = {{0, 1}, {2, 7}, {5, 17}};
  for (int rep = 0; rep < 50; ++rep) {
    const auto K = random_K(lat.n_bonds(), rng, 2.0);
    double sum_abs = 0.0;
    for (double k : K) sum_abs += std::abs(k);
    const auto r = eng.evaluate(K, q);
    const double base = lat.n_sites * std::numbers::ln2;
    CHECK(r.log_z >= base - sum_abs);
    CHECK(r.log_z <= base + sum_abs);
    for (double v : r.bonds) CHECK(std::abs(v) <= 1.0);
    for (double v : r.pairs) CHECK(std::abs(v) <= 1.0);
  }
}

TEST_CASE("gauge covariance at fixed disorder") {
  std::mt19937_64 rng(17);
  for (const auto& lat : small_lattices()) {
    const ExactEngine eng(lat);
    GibbsQuery q;
    for (std::size_t b = 0; b < lat.n_bonds(); ++b) q.bonds.push_back(b);
    for (int rep = 0; rep < 5; ++rep) {
      const auto K = random_K(lat.n_bonds(), rng);
      const std::size_t site = rng() % lat.n_sites;
      auto Kf = K;
      std::vector<bool> flipped(lat.n_bonds(), false);
      for (const auto& b : lat.bonds) {
        if (b.site_a == site || b.site_b == site) {
          Kf[b.index] = -Kf[b.index];
          flipped[b.index] = true;
        }
      }
      const auto r = eng.evaluate(K, q);
      const auto rf = eng.evaluate(Kf, q);
      CHECK(rf.log_z == doctest::Approx(r.log_z).epsilon(1e-14));
      for (std::size_t b = 0; b < lat.n_bonds(); ++b) {
        CHECK(rf.bonds[b] == doctest::Approx(flipped[b] ? -r.bonds[b] : r.bonds[b]).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("d ln Z / d K_b equals <S_b>") {
  std::mt19937_64 rng(8);
  const auto lat = build_lattice(2, 4, Boundary::Free);
  const ExactEngine eng(lat);
  const auto K = random_K(lat.n_bonds(), rng);
  const double h = 1e-5;
  for (std::size_t b = 0; b < lat.n_bonds(); ++b) {
    auto up = K;
    auto dn = K;
    up[b] += h;
    dn[b] -= h;
    const double fd = (eng.log_partition(up) - eng.log_partition(dn)) / (2 * h);
    CHECK(std::abs(fd - bond_correlation(lat, K, b)) < 1e-8);
  }
}

TEST_CASE("odd in K_b with the others at zero") {
  const auto lat = build_lattice(2, 3, Boundary::Free);
  std::vector<double> K(lat.n_bonds(), 0.0);
  K[4] = 0.7;
  const double plus = bond_correlation(lat, K, 4);
  K[4] = -0.7;
  CHECK(bond_correlation(lat, K, 4) == -plus);
}

TEST_CASE("extreme couplings stay finite") {
  const auto lat = build_lattice(2, 3, Boundary::Free);
  std::vector<double> K(lat.n_bonds());
  for (std::size_t b = 0; b < K.size(); ++b) K[b] = (b % 2 ? -1.0 : 1.0) * (300.0 + b);
  const auto ref = oracle::enumerate(lat, K);
  CHECK(log_partition(lat, K) == doctest::Approx(ref.log_z).epsilon(1e-13));
  for (std::size_t b = 0; b < K.size(); ++b) CHECK(std::isfinite(bond_correlation(lat, K, b)));
}

TEST_CASE("size cap and input checks") {
  const auto big = build_lattice(2, 5, Boundary::Free);
  CHECK_THROWS_AS(ExactEngine{big}, SizeError);
  EngineOptions o;
  o.max_sites = 30;
  CHECK_NOTHROW(ExactEngine(big, o));
  const auto lat = build_lattice(1, 3, Boundary::Free);
  CHECK_THROWS_AS(log_partition(lat, std::vector<double>{1.0}), InvalidArgument);
  CHECK_THROWS_AS(log_partition(lat, std::vector<double>{1.0, NAN}), InvalidArgument);
}

}  // TEST_SUITE
