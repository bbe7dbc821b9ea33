#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fragsim/config.hpp"
#include "fragsim/operators.hpp"
#include "fragsim/weights.hpp"
#include "support.hpp"

using namespace fragsim;

namespace {

const std::vector<double> kGrid = linspace(0.0, 5.0, 9);

CoefficientFamily silent_family() {
  FamilyBuilder fb;
  fb.a = [](int, double) { return 0.0; };
  fb.b = [](int, int, double) { return 0.0; };
  fb.time_constant_a = fb.time_constant_b = true;
  return fb.build();
}

TriangularMatrix make2(double m11, double m12, double m22, double s, double t) {
  TriangularMatrix m(2, s, t, false);
  m.set(1, 1, m11);
  m.set(1, 2, m12);
  m.set(2, 2, m22);
  return m;
}

TriangularMatrix random_upper(int n, double s, double t, testkit::Rng& rng) {
  TriangularMatrix m(n, s, t, false);
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= j; ++i) m.set(i, j, rng.pm1());
  return m;
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("state functionals") {
  StateVector v{0.0, {1.0, 1.0}};
  CHECK(v.mass() == 3.0);
  const std::vector<double> w{1.0, 4.0};
  StateVector p{0.0, {2.0, 1.0}};
  CHECK(p.weighted_norm(w) == 6.0);
  CHECK(p.weighted_functional(w) == 6.0);
  StateVector q{0.0, {-2.0, 1.0}};
  const std::vector<double> wn{1.0, 2.0};
  CHECK(q.weighted_norm(wn) == 4.0);
  CHECK(q.weighted_functional(wn) == 0.0);
  CHECK(first_moment(q.u) == 0.0);
  CHECK(weighted_norm(p.u, w) == 6.0);
  CHECK(phi_w(q.u, wn) == 0.0);
}

TEST_CASE("loss, gain and full generator on small systems") {
  auto fam = testkit::closed2();
  const std::vector<double> u{5.0, 4.0};
  CHECK(apply_A(fam, 0.0, u) == std::vector<double>{0.0, -4.0});
  CHECK(apply_B(fam, 0.0, std::vector<double>{0.0, 1.0}) == std::vector<double>{2.0, 0.0});
  CHECK(apply_B(fam, 0.0, std::vector<double>{1.0, 0.0}) == std::vector<double>{0.0, 0.0});
  CHECK(apply_G(fam, 0.0, std::vector<double>{1.0, 1.0}) == std::vector<double>{2.0, -1.0});
  // monomers never fragment here: e_1 is stationary
  CHECK(apply_G(fam, 0.0, std::vector<double>{1.0, 0.0}) == std::vector<double>{0.0, 0.0});

  auto quiet = silent_family();
  CHECK(apply_A(quiet, 1.0, u) == std::vector<double>{0.0, 0.0});
  CHECK(apply_G(quiet, 1.0, u) == std::vector<double>{0.0, 0.0});

  auto decay = testkit::decay_only();
  CHECK(apply_A(decay, 0.3, std::vector<double>{1.0, 1.0, 1.0}) ==
        std::vector<double>{-1.0, -2.0, -3.0});
  CHECK(apply_B(decay, 0.3, std::vector<double>{1.0, 1.0, 1.0}) ==
        std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("workspace generator matches the allocating one") {
  auto fam = testkit::power0();
  testkit::Rng rng(20240812u);
  std::vector<double> u(12);
  for (auto& x : u) x = rng.unit();
  auto ref = apply_G(fam, 0.7, u);
  std::vector<double> du(u.size());
  GeneratorWorkspace ws;
  apply_G_into(fam, 0.7, u, du, ws);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(du[i] == doctest::Approx(ref[i]).epsilon(1e-14));
  // reuse with different time
  apply_G_into(fam, 1.9, u, du, ws);
  auto ref2 = apply_G(fam, 1.9, u);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(du[i] == doctest::Approx(ref2[i]).epsilon(1e-14));
}

TEST_CASE("conserving generator annihilates the first moment") {
  auto fam = testkit::power0();
  testkit::Rng rng(20240813u);
  std::vector<double> u(12);
  for (auto& x : u) x = rng.unit();
  for (double t : {0.0, 0.9, 4.4}) {
    auto g = apply_G(fam, t, u);
    double scale = 1.0;
    for (std::size_t i = 0; i < g.size(); ++i) scale += (double(i) + 1.0) * std::fabs(g[i]);
    CHECK(std::fabs(first_moment(g)) <= 1e-12 * scale);
  }
}

TEST_CASE("triangular storage is strictly upper") {
  TriangularMatrix m(3, 0.5, 2.0, false);
  CHECK(m.size() == 3);
  CHECK(m.s() == 0.5);
  CHECK(m.t() == 2.0);
  CHECK(!m.rescaled());
  m.set(1, 3, 7.0);
  m.set(2, 2, -1.5);
  CHECK(m(1, 3) == 7.0);
  CHECK(m(2, 2) == -1.5);
  CHECK(m(1, 1) == 0.0);
  CHECK(m(3, 1) == 0.0);  // below-diagonal reads are exact zero
  CHECK(m(2, 1) == 0.0);
  CHECK_THROWS_AS(m.set(3, 1, 1e-30), std::logic_error);
  CHECK(m.max_abs_below_diagonal() == 0.0);
  CHECK(m.column(3).size() == 3);
  CHECK(m.column(3)[0] == 7.0);

  auto id = TriangularMatrix::identity(4, 0.0, 0.0, true);
  CHECK(id.rescaled());
  for (int i = 1; i <= 4; ++i) CHECK(id(i, i) == 1.0);
  CHECK(id(1, 2) == 0.0);
}

TEST_CASE("triangular products compose values and intervals") {
  auto L = make2(1.0, 2.0, 3.0, 1.0, 2.0);
  auto R = make2(4.0, 5.0, 6.0, 0.0, 1.0);
  auto P = multiply(L, R);
  CHECK(P(1, 1) == 4.0);
  CHECK(P(1, 2) == 17.0);
  CHECK(P(2, 2) == 18.0);
  CHECK(P(2, 1) == 0.0);
  CHECK(P.s() == 0.0);
  CHECK(P.t() == 2.0);

  TriangularMatrix odd(3, 0.0, 1.0, false);
  CHECK_THROWS_AS(multiply(L, odd), std::invalid_argument);
  TriangularMatrix scaled(2, 0.0, 1.0, true);
  CHECK_THROWS_AS(multiply(L, scaled), std::invalid_argument);
}

TEST_CASE("weighted operator norm is the max weighted column sum") {
  const std::vector<double> w{1.0, 2.0};
  auto id = TriangularMatrix::identity(2, 0.0, 1.0, false);
  CHECK(opnorm_weighted(id, w) == 1.0);

  TriangularMatrix m(2, 0.0, 1.0, false);
  m.set(1, 2, 2.0);
  CHECK(opnorm_weighted(m, w) == 1.0);  // column 2: w1*|2|/w2

  TriangularMatrix z(2, 0.0, 1.0, false);
  CHECK(opnorm_weighted(z, w) == 0.0);

  testkit::Rng rng(20240814u);
  auto L = random_upper(6, 1.0, 2.0, rng);
  auto R = random_upper(6, 0.0, 1.0, rng);
  const auto w6 = power_weight(2.0, 6);
  const double prod = opnorm_weighted(multiply(L, R), w6);
  CHECK(prod <= opnorm_weighted(L, w6) * opnorm_weighted(R, w6) * (1.0 + 1e-12));
  CHECK(opnorm_weighted(L.data(), 6, w6) == opnorm_weighted(L, w6));
}

TEST_CASE("gain-versus-loss contraction per column") {
  auto fam = testkit::closed2();
  const std::vector<double> w{1.0, 4.0};
  auto bb = check_B_bound(fam, w, 0.3, 2);
  CHECK(bb.max_ratio == 0.5);
  CHECK(bb.argmax_j == 2);

  auto p0 = testkit::power0();
  const auto w8 = power_weight(8.0, 2);
  CHECK(check_B_bound(p0, w8, 0.0, 2).max_ratio == 0.0078125);
  CHECK(check_B_bound(p0, w8, 1.3, 2).max_ratio == 0.0078125);  // a_j cancels

  CHECK(check_B_bound(testkit::decay_only(), power_weight(1.0, 4), 0.5, 4).max_ratio == 0.0);
  CHECK(check_B_bound(silent_family(), power_weight(1.0, 4), 0.5, 4).max_ratio == 0.0);

  for (const auto& member : testkit::fleet()) {
    CAPTURE(member.name);
    const int n = testkit::fleet_n(member, 10);
    auto cert = construct_weight(member.family, 0.5, n, kGrid);
    auto ratio = check_B_bound(member.family, cert.w, 0.7, n);
    CHECK(ratio.max_ratio <= cert.kappa_hat + 1e-12);
  }
}

TEST_CASE("resolvent norms on the positive half-plane") {
  const std::vector<double> w{1.0, 2.0, 3.0};
  auto quiet = silent_family();
  auto rq = check_resolvent_bound(quiet, w, 0.0, {1.0, 0.0}, 3);
  CHECK(rq.resolvent_norm == 1.0);
  CHECK(rq.b_resolvent_norm == 0.0);
  auto rc = check_resolvent_bound(quiet, w, 0.0, {1.0, 5.0}, 3);
  CHECK(rc.resolvent_norm == doctest::Approx(1.0 / std::sqrt(26.0)));

  auto decay = testkit::decay_only();
  auto rd = check_resolvent_bound(decay, w, 0.0, {2.0, 0.0}, 3);
  CHECK(rd.resolvent_norm == doctest::Approx(1.0 / 3.0));  // slowest rate a_1 = 1

  auto fam = testkit::closed2();
  const std::vector<double> w2{1.0, 4.0};
  auto r2 = check_resolvent_bound(fam, w2, 0.0, {1.0, 0.0}, 2);
  CHECK(r2.resolvent_norm == 1.0);  // a_1 = 0
  CHECK(r2.b_resolvent_norm == doctest::Approx(0.25));
  CHECK(r2.b_resolvent_norm <= 0.5);  // never exceeds the contraction ratio

  CHECK_THROWS_AS(check_resolvent_bound(fam, w2, 0.0, {0.0, 1.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(check_resolvent_bound(fam, w2, 0.0, {-1.0, 0.0}, 2), std::invalid_argument);
}

TEST_CASE("time-increment norms against the regularity certificate") {
  const auto w = power_weight(8.0, 10);
  CHECK(holder_difference_opnorm(testkit::chipoff(), w, 0.0, 1.0, 0.5, 10) == 0.0);
  CHECK(holder_difference_opnorm(testkit::power0(), w, 1.0, 1.0, 0.5, 10) == 0.0);

  RateModel rate;
  rate.c = IndexGenerator::constant(1.0);
  rate.phi = {2.0, 1.0, 1.0};
  auto pure = make_pure_decay_family(rate);
  const double got = holder_difference_opnorm(pure, w, 0.0, 1.0, 0.5, 10);
  CHECK(got == doctest::Approx(std::sin(1.0) / (3.0 + std::sin(0.5))));

  auto fam = testkit::power0();
  auto cert = estimate_holder(fam, w, 1.0, 10, kGrid);
  auto hc = check_holder_opnorm(fam, w, cert, kGrid[1], kGrid[4], kGrid[2], 10);
  CHECK(hc.pass);
  CHECK(hc.measured <= hc.bound);
  CHECK(hc.bound == doctest::Approx((cert.c1 + cert.c2) * (kGrid[4] - kGrid[1])));
}

}  // TEST_SUITE
