#include <doctest.h>

#include <cmath>

#include "nlsurf/nishimori.hpp"

using namespace nlsurf;

TEST_SUITE("nishimori") {

TEST_CASE("nl_from_physical") {
  GaussianBondModel a{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};
  CHECK(nl_from_physical(a).x == std::vector<double>{1.0, 1.0});
  GaussianBondModel b{{0.5}, {2.0}, {2.0}};
  CHECK(b.on_nishimori_line(0));
  CHECK(nl_from_physical(b).x[0] == doctest::Approx(1.0).epsilon(1e-15));
  GaussianBondModel c{{1.0, 1.0, 1.0}, {1.0, 0.5, 1.0}, {1.0, 1.0, 1.0}};
  try {
    nl_from_physical(c);
    FAIL("expected OffNishimoriLine");
  } catch (const OffNishimoriLine& e) {
    CHECK(e.offending == std::vector<std::size_t>{1});
  }
}

TEST_CASE("physical round trip is the identity on x") {
  const NishimoriParams p{{0.0, 0.3, 1.7, 2.5}};
  CHECK(nl_from_physical(physical_from_nl(p)).x == p.x);
}

TEST_CASE("params validation") {
  CHECK_THROWS_AS((NishimoriParams{{0.1, -0.2}}).validate(), InvalidArgument);
  CHECK_THROWS_AS((NishimoriParams{{NAN}}).validate(), InvalidArgument);
  CHECK_NOTHROW(NishimoriParams::uniform(3, 0.0).validate());
}

TEST_CASE("interpolated_params follows the square-root law") {
  Corridor c{{1, 3}, CorridorKind::Midplanes};
  InterpolationSchedule s{0.8, c, 5, 1.0};
  CHECK(interpolated_params(s).x == std::vector<double>(5, 0.8));
  s.t = 0.0;
  CHECK(interpolated_params(s).x == std::vector<double>{0.8, 0.0, 0.8, 0.0, 0.8});
  s.t = 0.25;
  const auto q = interpolated_params(s);
  CHECK(q.x[1] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(q.x[0] == 0.8);
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    s.t = i / 100.0;
    const auto p = interpolated_params(s);
    CHECK(p.x[3] >= prev);
    CHECK(p.x[3] == doctest::Approx(0.8 * std::sqrt(s.t)).epsilon(1e-15));
    CHECK(p.x[2] == 0.8);
    prev = p.x[3];
  }
  s.t = 1.5;
  CHECK_THROWS_AS(interpolated_params(s), InvalidArgument);
  s.t = -0.1;
  CHECK_THROWS_AS(interpolated_params(s), InvalidArgument);
}

TEST_CASE("sample_disorder statistics and determinism") {
  const auto zero = NishimoriParams::uniform(3, 0.0);
  const auto two = NishimoriParams::uniform(3, 2.0);
  const int n = 100000;
  double s0 = 0.0;
  double s2 = 0.0;
  double q2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto r0 = sample_disorder(zero, static_cast<std::uint64_t>(i));
    CHECK(r0.j[1] == r0.g[1]);
    s0 += r0.j[1];
    const auto r2 = sample_disorder(two, 12345, static_cast<std::uint64_t>(i));
    s2 += r2.j[0];
    q2 += (r2.j[0] - 2.0) * (r2.j[0] - 2.0);
  }
  CHECK(std::abs(s0 / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 2.0) < 4.0 / std::sqrt(n));
  CHECK(std::abs(q2 / n - 1.0) < 0.05);

  const auto a = sample_disorder(two, 99, 4);
  const auto b = sample_disorder(two, 99, 4);
  CHECK(a.j == b.j);
  CHECK(a.g == b.g);
  for (std::size_t k = 0; k < 3; ++k) CHECK(a.g[k] == disorder_normal(99, 4, k));
  CHECK(sample_disorder(two, 100, 4).g != a.g);
  CHECK(sample_disorder(two, 99, 5).g != a.g);
}

TEST_CASE("keyed normals do not depend on the bond count") {
  const auto small = sample_disorder(NishimoriParams::uniform(2, 0.5), 7, 3);
  const auto large = sample_disorder(NishimoriParams::uniform(6, 0.5), 7, 3);
  CHECK(small.g[0] == large.g[0]);
  CHECK(small.g[1] == large.g[1]);
}

TEST_CASE("shift_disorder") {
  const NishimoriParams p{{0.4, 0.9, 1.3}};
  const auto r = sample_disorder(p, 5);
  CHECK(shift_disorder(r, p).j == r.j);
  const NishimoriParams q{{0.4, 0.0, 1.3}};
  const auto s = shift_disorder(r, q);
  CHECK(s.j[1] == r.g[1]);
  CHECK(s.g == r.g);
  CHECK(shift_disorder(s, p).j == r.j);
  CHECK_THROWS_AS(shift_disorder(r, NishimoriParams::uniform(2, 0.4)), InvalidArgument);
  const auto K = coupling_field(p, r);
  for (std::size_t b = 0; b < 3; ++b) CHECK(K[b] == p.x[b] * r.j[b]);
}

}  // TEST_SUITE
