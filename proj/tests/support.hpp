#pragma once

// Shared test fixtures: the family fleet exercised across suites, reference
// quadrature for diagonal entries, the two-component closed form, and a tiny
// deterministic RNG so expected values never drift between runs.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fragsim/coefficients.hpp"
#include "fragsim/config.hpp"
#include "fragsim/weights.hpp"

namespace testkit {

// splitmix64: tiny, seedable, identical on every platform.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }  // [0, 1)
  double pm1() { return 2.0 * unit() - 1.0; }                              // [-1, 1)
};

// ---- fleet ---------------------------------------------------------------------

// Oscillating mass-conserving power law: a_n(t) = n * (2 + sin t), a_1 = 0.
inline fragsim::CoefficientFamily power0() {
  fragsim::RateModel rate;
  rate.c = fragsim::IndexGenerator::linear(1.0);
  rate.phi = {2.0, 1.0, 1.0};
  rate.zero_monomer = true;
  return fragsim::make_power_law_family(0.0, rate);
}

// Mass-conserving power law with size-weighted daughters:
// b(n,j) = n * zeta_j, a_n(t) = (1.5 + 0.5 sin 2t) + 0.5 n, a_1 = 0.
inline fragsim::CoefficientFamily power1() {
  fragsim::RateModel rate;
  rate.c = fragsim::IndexGenerator::constant(1.0);
  rate.d = fragsim::IndexGenerator::linear(0.5);
  rate.phi = {1.5, 0.5, 2.0};
  rate.zero_monomer = true;
  return fragsim::make_power_law_family(1.0, rate);
}

// Monomer chip-off chain with time-constant rates a_n = n, a_1 = 0.
inline fragsim::CoefficientFamily chipoff() {
  fragsim::RateModel rate;
  rate.d = fragsim::IndexGenerator::linear(1.0);
  rate.zero_monomer = true;
  return fragsim::make_becker_doring_family(rate);
}

// Halved power-law daughters: every split loses half the mass, rates bounded
// below by 1.3 (including the monomer), so the flow decays in operator norm.
inline fragsim::CoefficientFamily halved() {
  fragsim::RateModel rate;
  rate.c = fragsim::IndexGenerator::linear(0.3);
  rate.d = fragsim::IndexGenerator::constant(1.0);
  rate.phi = {2.0, 1.0, 1.0};
  return fragsim::make_power_law_family(0.0, rate, fragsim::kUnboundedHorizon, 0.5);
}

// No daughters at all: a_n = n with a_1 = 1.
inline fragsim::CoefficientFamily decay_only() {
  fragsim::RateModel rate;
  rate.d = fragsim::IndexGenerator::linear(1.0);
  return fragsim::make_pure_decay_family(rate);
}

// Two-component closed form: a = (0, 1), b(1,2) = 2, so
// u_2(t) = e^{-(t-s)} u_2(s) and u_1(t) = u_1(s) + 2(1 - e^{-(t-s)}) u_2(s).
inline fragsim::CoefficientFamily closed2() {
  fragsim::CustomTable table;
  table.a_values = {0.0, 1.0};
  table.b_entries = {{1, 2, 2.0}};
  return fragsim::make_custom_family(table);
}

struct FleetMember {
  std::string name;
  fragsim::CoefficientFamily family;
  int n_cap;        // 0 = any truncation; closed2 is only meaningful at n = 2
  bool conserving;  // mass rule: a_1 == 0 and lambda == 0
};

inline std::vector<FleetMember> fleet() {
  return {{"power_law_nu0", power0(), 0, true},   {"power_law_nu1", power1(), 0, true},
          {"chipoff_chain", chipoff(), 0, true},  {"halved_power_law", halved(), 0, false},
          {"decay_only", decay_only(), 0, false}, {"closed_two", closed2(), 2, true}};
}

inline int fleet_n(const FleetMember& m, int want) {
  return m.n_cap > 0 ? std::min(m.n_cap, want) : want;
}

// ---- reference quadrature ------------------------------------------------------

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double both = left + right;
  if (depth <= 0 || std::fabs(both - whole) < 15.0 * tol)
    return both + (both - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integral(const std::function<double(double)>& f, double a, double b,
                       double tol = 1e-13) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

// Independent reference for the flow's diagonal: exp(-int_s^t a_n).
inline double diag_ref(const fragsim::CoefficientFamily& fam, int n, double s, double t) {
  return std::exp(-integral([&fam, n](double x) { return fam.a(n, x); }, s, t));
}

// Exact primitive for the power0 member: int_s^t n*(2 + sin) = n*(2 dt + cos s - cos t).
inline double power0_diag(int n, double s, double t) {
  if (n == 1) return 1.0;
  return std::exp(-static_cast<double>(n) * (2.0 * (t - s) + std::cos(s) - std::cos(t)));
}

// ---- closed two-component solution ----------------------------------------------

inline std::vector<double> closed2_state(double u1, double u2, double dt) {
  const double e = std::exp(-dt);
  return {u1 + 2.0 * (1.0 - e) * u2, e * u2};
}

// Random mass-free vector: components >= 2 uniform in [-1, 1), the first
// component balancing the first moment exactly.
inline std::vector<double> mass_free(Rng& rng, int n) {
  std::vector<double> g(static_cast<std::size_t>(n), 0.0);
  double moment = 0.0;
  for (int i = 2; i <= n; ++i) {
    g[i - 1] = rng.pm1();
    moment += static_cast<double>(i) * g[i - 1];
  }
  g[0] = -moment;
  return g;
}

}  // namespace testkit
