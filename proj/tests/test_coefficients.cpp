#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "fragsim/coefficients.hpp"
#include "fragsim/config.hpp"
#include "fragsim/weights.hpp"
#include "support.hpp"

using namespace fragsim;

namespace {

const std::vector<double> kGrid = linspace(0.0, 5.0, 9);

CoefficientFamily zero_daughter_builder(CoefficientFamily::RateFn a) {
  FamilyBuilder fb;
  fb.a = std::move(a);
  fb.b = [](int, int, double) { return 0.0; };
  return fb.build();
}

}  // namespace

TEST_SUITE("coefficients") {

TEST_CASE("index generators evaluate and bound") {
  CHECK(IndexGenerator::constant(2.0)(5) == 2.0);
  CHECK(IndexGenerator::linear(1.5)(4) == 6.0);
  CHECK(IndexGenerator::power(2.0, 0.5)(9) == 6.0);
  CHECK(IndexGenerator::linear(1.0).inf_from(2) == 2.0);
  CHECK(IndexGenerator::constant(3.0).inf_from(7) == 3.0);
  // decreasing power: the infimum over an unbounded index range is zero
  CHECK(IndexGenerator::power(1.0, -1.0).inf_from(3) == 0.0);
  CHECK(!IndexGenerator::power(1.0, -1.0).nondecreasing());
  CHECK(IndexGenerator::linear(2.0).nondecreasing());
}

TEST_CASE("phi infimum is exact, not sampled") {
  PhiSpec phi{2.0, 1.0, 1.0};
  phi.validate();
  const double pi = 3.14159265358979323846;
  CHECK(phi(0.5 * pi) == doctest::Approx(3.0));
  // no trough inside [0, 3pi/4]: the minimum sits at the left endpoint
  CHECK(phi.inf_on(0.0, 0.75 * pi) == 2.0);
  // interval longer than a period always reaches gamma - delta
  CHECK(phi.inf_on(0.0, 7.0) == 1.0);
  // trough 3pi/2 inside a short interval
  CHECK(phi.inf_on(4.0, 5.0) == 1.0);
  // short interval between troughs: endpoint minimum
  CHECK(phi.inf_on(5.0, 6.0) == doctest::Approx(2.0 + std::sin(5.0)));
  CHECK(phi.inf_tail(0.0) == 1.0);
  CHECK(phi.lipschitz() == 1.0);

  PhiSpec fast{2.0, 1.0, 2.0};
  CHECK(fast.inf_on(0.0, 2.36) == 1.0);  // trough at t = 3pi/4 ~ 2.356

  PhiSpec flat{2.0, 0.0, 1.0};
  CHECK(flat.inf_on(0.3, 0.4) == 2.0);

  CHECK_THROWS_AS((PhiSpec{1.0, 1.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PhiSpec{1.0, -0.5, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PhiSpec{2.0, 1.0, -1.0}.validate()), std::invalid_argument);
}

TEST_CASE("affine rates with a silent monomer") {
  RateModel rate;
  rate.c = IndexGenerator::linear(1.0);
  rate.phi = {2.0, 1.0, 1.0};
  rate.zero_monomer = true;
  CHECK(rate(1, 0.7) == 0.0);
  CHECK(rate(3, 0.0) == 6.0);
  CHECK(rate.inf_over(2, 0.0, 10.0) == 2.0);
  CHECK(rate.inf_over(1, 0.0, 10.0) == 0.0);
  CHECK(!rate.time_constant());

  RateModel lifted;
  lifted.c = IndexGenerator::linear(0.3);
  lifted.d = IndexGenerator::constant(1.0);
  lifted.phi = {2.0, 1.0, 1.0};
  CHECK(lifted.inf_over(1, 0.0, 20.0) == doctest::Approx(1.3));

  RateModel bad;
  bad.c = IndexGenerator::linear(-1.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("power-law daughters normalise to the parent mass") {
  auto fam = testkit::power0();
  CHECK(fam.kind() == "power_law");
  CHECK(fam.b(1, 2, 0.0) == 2.0);  // zeta_2 = 2/1
  CHECK(fam.b(1, 3, 1.0) == 1.0);  // zeta_3 = 3/(1+2)
  CHECK(fam.b(2, 3, 1.0) == 1.0);
  CHECK(fam.b(3, 3, 1.0) == 0.0);
  CHECK(fam.b(5, 2, 1.0) == 0.0);
  CHECK(fam.time_constant_b());
  CHECK(!fam.time_constant_a());

  auto fam1 = testkit::power1();
  CHECK(fam1.b(1, 3, 0.0) == doctest::Approx(0.6));  // 1 * 3/(1+4)
  CHECK(fam1.b(2, 3, 0.0) == doctest::Approx(1.2));

  // daughter_row agrees with pointwise evaluation
  std::vector<double> row(5);
  fam1.daughter_row(6, 0.0, row);
  for (int n = 1; n < 6; ++n) CHECK(row[n - 1] == doctest::Approx(fam1.b(n, 6, 0.0)));
}

TEST_CASE("mass defect fractions") {
  CHECK(eval_lambda(testkit::power0(), 5, 0.0) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(eval_lambda(testkit::power1(), 7, 0.3) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(eval_lambda(testkit::halved(), 3, 0.0) == 0.5);
  CHECK(eval_lambda(testkit::decay_only(), 3, 0.0) == 1.0);  // empty sum
  CHECK(eval_lambda(testkit::chipoff(), 2, 0.0) == 0.0);
  CHECK(eval_lambda(testkit::chipoff(), 5, 0.0) == 0.0);
  CHECK_THROWS_AS(eval_lambda(testkit::power0(), 1, 0.0), std::invalid_argument);
}

TEST_CASE("mass-rule classification with witnesses") {
  auto conserving = check_mass_rule(testkit::power0(), 12, kGrid);
  CHECK(conserving.mode == MassMode::conserving);
  CHECK(conserving.max_abs_monomer_rate == 0.0);
  CHECK(!conserving.witness);
  CHECK(conserving.samples.size() == 9 * 11);

  auto halved = check_mass_rule(testkit::halved(), 8, kGrid);
  CHECK(halved.mode == MassMode::non_gaining);
  CHECK(!halved.witness);

  // lambda == 0 but monomers fragment: mass still leaks
  RateModel loud;
  loud.c = IndexGenerator::linear(1.0);
  loud.phi = {2.0, 1.0, 1.0};
  auto leaky = make_power_law_family(0.0, loud);
  CHECK(check_mass_rule(leaky, 6, kGrid).mode == MassMode::non_gaining);

  CustomTable gain;
  gain.a_values = {0.0, 1.0};
  gain.b_entries = {{1, 2, 3.0}};
  auto gaining = check_mass_rule(make_custom_family(gain), 2, kGrid);
  CHECK(gaining.mode == MassMode::gaining);
  REQUIRE(gaining.witness.has_value());
  CHECK(gaining.witness->j == 2);
  CHECK(gaining.witness->value == doctest::Approx(-0.5));

  // defects inside the tolerance band still classify as conserving
  CustomTable near;
  near.a_values = {0.0, 1.0};
  near.b_entries = {{1, 2, 2.0 + 1e-10}};
  CHECK(check_mass_rule(make_custom_family(near), 2, kGrid).mode == MassMode::conserving);
  CustomTable over;
  over.a_values = {0.0, 1.0};
  over.b_entries = {{1, 2, 2.0 + 3e-10}};
  CHECK(check_mass_rule(make_custom_family(over), 2, kGrid).mode == MassMode::gaining);
}

TEST_CASE("sign and structure checks report first witnesses") {
  CHECK(check_nonnegativity(testkit::power0(), 10, kGrid).pass);
  CHECK(check_nonnegativity(testkit::chipoff(), 10, kGrid).pass);

  auto bad_rate = zero_daughter_builder([](int n, double) { return n == 2 ? -1.0 : 1.0; });
  auto r1 = check_nonnegativity(bad_rate, 5, kGrid);
  CHECK(!r1.pass);
  REQUIRE(r1.witness.has_value());
  CHECK(r1.witness->n == 2);
  CHECK(r1.witness->t == kGrid.front());

  FamilyBuilder fb;
  fb.a = [](int, double) { return 1.0; };
  fb.b = [](int n, int j, double) { return (n == 3 && j == 2) ? 1.0 : 0.0; };
  auto r2 = check_nonnegativity(fb.build(), 5, kGrid);
  CHECK(!r2.pass);
  REQUIRE(r2.witness.has_value());
  CHECK(r2.witness->n == 3);
  CHECK(r2.witness->j == 2);
  CHECK(r2.witness->what.find("j <= n") != std::string::npos);

  fb.b = [](int n, int j, double) { return (n == 1 && j == 2) ? -0.5 : 0.0; };
  auto r3 = check_nonnegativity(fb.build(), 5, kGrid);
  CHECK(!r3.pass);
  REQUIRE(r3.witness.has_value());
  CHECK(r3.witness->value == -0.5);
}

TEST_CASE("time-regularity constants on the sampling grid") {
  auto fam = testkit::power0();
  const auto w = power_weight(8.0, 10);
  auto cert = estimate_holder(fam, w, 1.0, 10, kGrid);
  CHECK(cert.status == HolderStatus::certified_on_grid);
  // |a_n(t)-a_n(s)|/(1+a_n(tau)) <= |phi(t)-phi(s)|/phi(tau) <= K2/K1 = 1
  CHECK(cert.c1 <= 1.0 + 1e-12);
  CHECK(cert.c1 > 0.3);
  // constant daughters: the flux constant is dominated by kappa * c1
  const double kappa = certify_kappa(w, fam, 10, kGrid).kappa_hat;
  CHECK(cert.c2 <= kappa * cert.c1 * (1.0 + 1e-12));

  auto flat = estimate_holder(testkit::chipoff(), w, 1.0, 10, kGrid);
  CHECK(flat.c1 == 0.0);
  CHECK(flat.c2 == 0.0);
  CHECK(flat.status == HolderStatus::certified_on_grid);

  auto blowup = zero_daughter_builder([](int n, double t) {
    return (n == 3 && t > 2.0) ? std::numeric_limits<double>::infinity() : 1.0;
  });
  auto violated = estimate_holder(blowup, w, 1.0, 5, kGrid);
  CHECK(violated.status == HolderStatus::violated);
  CHECK(violated.witness.has_value());

  CHECK_THROWS_AS(estimate_holder(fam, w, 0.0, 5, kGrid), std::invalid_argument);
  CHECK_THROWS_AS(estimate_holder(fam, w, 1.5, 5, kGrid), std::invalid_argument);
  const std::vector<double> single{1.0};
  CHECK_THROWS_AS(estimate_holder(fam, w, 1.0, 5, single), std::invalid_argument);
  const std::vector<double> short_w{1.0, 2.0};
  CHECK_THROWS_AS(estimate_holder(fam, short_w, 1.0, 5, kGrid), std::invalid_argument);
}

TEST_CASE("horizon and index validation") {
  RateModel rate;
  rate.d = IndexGenerator::linear(1.0);
  auto fam = make_power_law_family(0.0, rate, 2.0);
  CHECK(fam.a(2, 2.0) == 2.0);
  CHECK_THROWS_AS(fam.a(2, 2.5), std::domain_error);
  CHECK_THROWS_AS(fam.b(1, 3, -0.1), std::domain_error);
  CHECK_THROWS_AS(fam.a(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(check_nonnegativity(fam, 4, kGrid), std::domain_error);  // grid exceeds horizon
  CHECK_THROWS_AS(make_power_law_family(-1.5, rate), std::invalid_argument);
}

TEST_CASE("index-shifted system views the tail") {
  auto fam = testkit::power0();
  auto shifted = shift_family(fam);
  CHECK(shifted.kind() == "shifted:power_law");
  CHECK(shifted.a(1, 0.7) == fam.a(2, 0.7));
  CHECK(shifted.a(4, 1.3) == fam.a(5, 1.3));
  CHECK(shifted.b(1, 2, 0.5) == fam.b(2, 3, 0.5));
  CHECK(shifted.b(2, 5, 0.5) == fam.b(3, 6, 0.5));
  REQUIRE(shifted.rate_lower_bound(1, 0.0, 5.0).has_value());
  CHECK(*shifted.rate_lower_bound(1, 0.0, 5.0) == *fam.rate_lower_bound(2, 0.0, 5.0));

  std::vector<double> row(3);
  shifted.daughter_row(4, 0.2, row);
  for (int n = 1; n < 4; ++n) CHECK(row[n - 1] == fam.b(n + 1, 5, 0.2));
}

TEST_CASE("custom tables extend with inert sizes") {
  auto fam = testkit::closed2();
  CHECK(fam.a(1, 0.0) == 0.0);
  CHECK(fam.a(2, 0.0) == 1.0);
  CHECK(fam.a(3, 0.0) == 0.0);  // beyond the table nothing fragments
  CHECK(fam.b(1, 2, 0.0) == 2.0);
  CHECK(fam.b(1, 3, 0.0) == 0.0);
  CHECK(fam.time_constant_a());
  CHECK(fam.unbounded());

  CustomTable empty;
  CHECK_THROWS_AS(make_custom_family(empty), std::invalid_argument);
}

}  // TEST_SUITE
