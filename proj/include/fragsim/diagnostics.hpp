#pragma once

// Long-time behaviour checks.  The flow contracts the weighted norm at rate
// at least (1 - kappa) times the infimum of the fragmentation rates, and for
// mass-conserving families every solution collapses onto monomers carrying
// the initial mass.  These routines compute measured quantities alongside the
// certified envelopes and report margins.

#include <optional>
#include <span>
#include <vector>

#include "fragsim/coefficients.hpp"
#include "fragsim/operators.hpp"
#include "fragsim/solver.hpp"
#include "fragsim/weights.hpp"

namespace fragsim {

struct RateEstimate {
  double value = 0.0;        // usable lower bound: min(sampled, analytic)
  double sampled_min = 0.0;  // min over the (n, t) sample grid
  std::optional<double> analytic;  // exact infimum bound when the family provides one
  bool certified = false;          // true when `analytic` is present
  int n_min = 1;
  int n_max = 1;
};

// Infimum of a_n(t) over n in [n_min, n_max] and t in [s, T] (T may be
// infinite when the family is unbounded; sampling then uses `grid` only).
RateEstimate inf_rate(const CoefficientFamily& family, double s, double T, int n_min, int n_max,
                      std::span<const double> grid);

// exp(-rate * (1 - kappa) * dt); rate >= 0, kappa in [0, 1), dt >= 0.
double decay_envelope(double rate, double kappa, double dt);

enum class DecayKind { opnorm, monomer };
std::string_view decay_kind_name(DecayKind kind);

struct DecayReport {
  DecayKind kind = DecayKind::opnorm;
  std::vector<double> times;
  std::vector<double> measured;
  std::vector<double> envelope;
  double rate_used = 0.0;
  bool rate_certified = false;  // analytic rate bound vs grid sampling only
  double kappa_used = 0.0;
  double prefactor = 1.0;  // envelope scale: 1 for opnorm, (w_1+1)*||u0||_w for monomer
  double margin = 0.0;     // min over the grid of envelope - measured
  bool applicable = true;  // monomer check requires a mass-conserving family
  bool pass = false;       // measured <= envelope * (1 + 1e-8) everywhere
  std::optional<double> fitted_rate;  // least-squares slope of log(measured)
  double rate_bound = 0.0;            // rate_used * (1 - kappa_used)
};

// Weighted operator norm of U(t, s) against exp(-rate*(1-kappa)*(t-s)) on the
// given time grid (all >= s; T is the last grid point).
DecayReport check_opnorm_decay(const CoefficientFamily& family, const WeightCertificate& cert,
                               double s, int n, std::span<const double> grid,
                               const SolverConfig& cfg, int workers = 1);

// ||g||_w <= (w_1 + 1) * ||Pg||_{shifted} for mass-free g (P drops the first
// component and the shifted norm uses w_{n+1}).  Returns both sides.
struct DecompBound {
  double lhs = 0.0;
  double rhs = 0.0;
};
DecompBound decomp_bound_check(std::span<const double> g, std::span<const double> w);

// Weighted distance from the pure-monomer state carrying mass m0:
// w_1 |u_1 - m0| + sum_{n>=2} w_n |u_n|.
double monomer_distance(const StateVector& state, double m0, std::span<const double> w);

// Trajectory distance-to-monomer against the envelope
// (w_1+1) ||u0||_w exp(-rate*(1-kappa)*(t-s)) with rate inf over n >= 2.
// Families that are not mass-conserving on the grid yield applicable = false.
// The fitted empirical rate uses the last half of the grid, excluding values
// below 1e3 * eps * prefactor.
DecayReport check_monomer_decay(const CoefficientFamily& family, const WeightCertificate& cert,
                                std::span<const double> u0, double s,
                                std::span<const double> grid, const SolverConfig& cfg);

}  // namespace fragsim
