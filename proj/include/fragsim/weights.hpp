#pragma once

// Weight sequences w_n for the weighted l1 state space.  A usable weight must
// dominate the mass weight (w_n >= n) and make fragmentation a strict weighted
// contraction: sum_{n<j} w_n b(n,j,t) <= kappa * w_j with kappa < 1.  Both
// properties are certified by sampling on explicit (j, t) grids; certificates
// carry the evidence and serialize to JSON.

#include <optional>
#include <span>
#include <vector>

#include "fragsim/coefficients.hpp"

namespace fragsim {

struct WeightGrid {
  int j_max = 0;
  std::vector<double> times;
};

struct WeightConstruction {
  enum class Kind { iterative, power, external };
  Kind kind = Kind::external;
  double kappa_target = 0.0;  // iterative
  double p = 0.0;             // power

  static WeightConstruction iterative(double kappa_target) {
    return {Kind::iterative, kappa_target, 0.0};
  }
  static WeightConstruction power(double p) { return {Kind::power, 0.0, p}; }
  static WeightConstruction external() { return {}; }
};

std::string_view construction_name(WeightConstruction::Kind kind);

struct KappaViolation {
  int j = 0;       // offending column, 0 when the floor w_n >= n fails
  int n = 0;       // offending index for a floor failure
  double t = 0.0;  // grid time of the worst ratio
  double ratio = 0.0;
};

struct KappaResult {
  double kappa_hat = 0.0;  // max over the grid of sum_{n<j} w_n b(n,j,t) / w_j
  int argmax_j = 0;
  double argmax_t = 0.0;
  bool floor_ok = true;  // w_n >= n for all sampled n
  bool certified = false;
  std::optional<KappaViolation> violation;
};

// Samples the contraction ratio for j = 2..n over the time grid.  Certified
// means kappa_hat < 1 and the weight floor holds.  Weight entries must be
// positive and finite; length(weight) >= n.
KappaResult certify_kappa(std::span<const double> weight, const CoefficientFamily& family,
                          int n, std::span<const double> grid);

struct WeightCertificate {
  std::vector<double> w;  // w_1..w_N
  double kappa_hat = 0.0;
  bool certified = false;
  std::optional<KappaViolation> violation;
  WeightGrid grid;
  WeightConstruction construction;

  int size() const { return static_cast<int>(w.size()); }
};

// Greedy minimal construction: w_1 = 1 and
// w_j = max(j, sup_{t in grid} sum_{n<j} w_n b(n,j,t) / kappa_target),
// then certified on the same grid.  kappa_target must lie in (0, 1).
WeightCertificate construct_weight(const CoefficientFamily& family, double kappa_target,
                                   int n, std::span<const double> grid);

// Certificate for an externally supplied weight (power weights use
// construction = power(p)).
WeightCertificate certify_weight(std::vector<double> w, const CoefficientFamily& family,
                                 std::span<const double> grid, WeightConstruction construction);

// {1^p, 2^p, ..., n^p}
std::vector<double> power_weight(double p, int n);

// Closed-form contraction bound for power-law daughters with weight n^p:
// (nu+2) * 2^(nu+2) / (p+nu+1).  Requires nu >= -1 and p >= 1.
double powerlaw_kappa_bound(double nu, double p);

// Drops w_1: the weight for the index-shifted system.
std::vector<double> shift_weight(std::span<const double> w);

}  // namespace fragsim
