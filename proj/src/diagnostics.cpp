#include "fragsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fragsim/kernels.hpp"

namespace fragsim {

namespace {

constexpr double kPassSlack = 1e-8;  // relative slack for envelope domination

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void require_certified(const WeightCertificate& cert, int n, const char* who) {
  require(cert.certified, std::string(who) + ": weight certificate not certified");
  require(cert.size() >= n, std::string(who) + ": weight certificate shorter than truncation");
}

std::vector<double> sorted_grid(std::span<const double> grid, double s,
                                const CoefficientFamily& family, const char* who) {
  require(!grid.empty(), std::string(who) + ": time grid empty");
  std::vector<double> times(grid.begin(), grid.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  require(times.front() >= s, std::string(who) + ": grid times must be >= s");
  for (double t : times) family.check_time(t);
  return times;
}

void finish_report(DecayReport& report) {
  report.margin = std::numeric_limits<double>::infinity();
  report.pass = true;
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    report.margin = std::min(report.margin, report.envelope[i] - report.measured[i]);
    if (report.measured[i] > report.envelope[i] * (1.0 + kPassSlack)) report.pass = false;
  }
  report.rate_bound = report.rate_used * (1.0 - report.kappa_used);
}

// Least-squares slope of log(measured) over the last half of the grid,
// ignoring values that have sunk to rounding level.
std::optional<double> fit_decay_rate(std::span<const double> times,
                                     std::span<const double> measured, double prefactor) {
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * prefactor;
  std::vector<double> xs, ys;
  for (std::size_t i = times.size() / 2; i < times.size(); ++i) {
    if (measured[i] > floor) {
      xs.push_back(times[i]);
      ys.push_back(std::log(measured[i]));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return -sxy / sxx;
}

}  // namespace

std::string_view decay_kind_name(DecayKind kind) {
  return kind == DecayKind::opnorm ? "opnorm" : "monomer";
}

RateEstimate inf_rate(const CoefficientFamily& family, double s, double T, int n_min, int n_max,
                      std::span<const double> grid) {
  require(n_min >= 1, "inf_rate: n_min must be >= 1");
  require(n_max >= n_min, "inf_rate: n_max must be >= n_min");
  require(!grid.empty(), "inf_rate: time grid empty");
  require(T >= s, "inf_rate: need T >= s");

  RateEstimate est;
  est.n_min = n_min;
  est.n_max = n_max;
  est.sampled_min = std::numeric_limits<double>::infinity();
  for (double t : grid) {
    family.check_time(t);
    for (int n = n_min; n <= n_max; ++n)
      est.sampled_min = std::min(est.sampled_min, family.a(n, t));
  }
  est.analytic = family.rate_lower_bound(n_min, s, T);
  est.certified = est.analytic.has_value();
  est.value = est.certified ? std::min(*est.analytic, est.sampled_min) : est.sampled_min;
  return est;
}

double decay_envelope(double rate, double kappa, double dt) {
  require(std::isfinite(rate) && rate >= 0.0, "decay_envelope: rate must be >= 0");
  require(kappa >= 0.0 && kappa < 1.0, "decay_envelope: kappa must lie in [0, 1)");
  require(std::isfinite(dt) && dt >= 0.0, "decay_envelope: dt must be >= 0");
  return std::exp(-rate * (1.0 - kappa) * dt);
}

DecayReport check_opnorm_decay(const CoefficientFamily& family, const WeightCertificate& cert,
                               double s, int n, std::span<const double> grid,
                               const SolverConfig& cfg, int workers) {
  require(n >= 1, "check_opnorm_decay: size must be >= 1");
  require_certified(cert, n, "check_opnorm_decay");
  std::vector<double> times = sorted_grid(grid, s, family, "check_opnorm_decay");

  DecayReport report;
  report.kind = DecayKind::opnorm;
  report.times = times;
  report.kappa_used = cert.kappa_hat;
  RateEstimate rate = inf_rate(family, s, times.back(), 1, n, times);
  report.rate_used = rate.value;
  report.rate_certified = rate.certified;
  report.prefactor = 1.0;

  std::vector<TriangularMatrix> mats =
      evolution_matrices(family, s, times, n, cfg, false, workers);
  std::span<const double> w(cert.w.data(), static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < times.size(); ++i) {
    report.measured.push_back(opnorm_weighted(mats[i], w));
    report.envelope.push_back(decay_envelope(report.rate_used, report.kappa_used, times[i] - s));
  }
  finish_report(report);
  report.fitted_rate = fit_decay_rate(report.times, report.measured, 1.0);
  return report;
}

DecompBound decomp_bound_check(std::span<const double> g, std::span<const double> w) {
  require(!g.empty(), "decomp_bound_check: empty vector");
  require(w.size() >= g.size(), "decomp_bound_check: weight too short");
  for (std::size_t i = 0; i < g.size(); ++i)
    require(std::isfinite(w[i]) && w[i] > 0.0, "decomp_bound_check: weights must be positive");

  double abs_moment = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    abs_moment += static_cast<double>(i + 1) * std::fabs(g[i]);
  const double moment = kernels::index_moment(g);
  if (std::fabs(moment) > 1e-10 * std::max(abs_moment, 1.0))
    throw std::domain_error("decomp_bound_check: first moment of g must vanish");

  DecompBound out;
  out.lhs = kernels::weighted_abs_sum(w, g);
  // ||Pg|| in the shifted weight: sum_{n>=2} w_n |g_n|.
  const double tail = kernels::weighted_abs_sum(w.subspan(1), g.subspan(1));
  out.rhs = (w[0] + 1.0) * tail;
  return out;
}

double monomer_distance(const StateVector& state, double m0, std::span<const double> w) {
  require(state.size() >= 1, "monomer_distance: empty state");
  require(w.size() >= state.u.size(), "monomer_distance: weight too short");
  const double head = w[0] * std::fabs(state.u[0] - m0);
  const double tail =
      state.size() > 1
          ? kernels::weighted_abs_sum(w.subspan(1), std::span<const double>(state.u).subspan(1))
          : 0.0;
  return head + tail;
}

DecayReport check_monomer_decay(const CoefficientFamily& family, const WeightCertificate& cert,
                                std::span<const double> u0, double s,
                                std::span<const double> grid, const SolverConfig& cfg) {
  const int n = static_cast<int>(u0.size());
  require(n >= 2, "check_monomer_decay: need at least two components");
  require_certified(cert, n, "check_monomer_decay");
  std::vector<double> times = sorted_grid(grid, s, family, "check_monomer_decay");

  DecayReport report;
  report.kind = DecayKind::monomer;
  report.times = times;
  report.kappa_used = cert.kappa_hat;

  MassRuleReport mass = check_mass_rule(family, n, times, 1e-10);
  report.applicable = mass.mode == MassMode::conserving;

  // Rate infimum over sizes >= 2 (monomers are inert in the conserving regime);
  // unbounded horizons use the analytic tail bound.
  const double T = family.unbounded() ? std::numeric_limits<double>::infinity() : times.back();
  RateEstimate rate = inf_rate(family, s, T, 2, n, times);
  report.rate_used = rate.value;
  report.rate_certified = rate.certified;

  std::span<const double> w(cert.w.data(), static_cast<std::size_t>(n));
  const double m0 = kernels::index_moment(u0);
  report.prefactor = (w[0] + 1.0) * weighted_norm(u0, w);

  Trajectory traj = integrate(family, u0, s, times, cfg);
  // integrate() always records the initial state first; align on the grid.
  std::size_t state_idx = (times.front() == s) ? 0 : 1;
  for (std::size_t i = 0; i < times.size(); ++i, ++state_idx) {
    const StateVector& state = traj.states[state_idx];
    report.measured.push_back(monomer_distance(state, m0, w));
    report.envelope.push_back(report.prefactor *
                              decay_envelope(report.rate_used, report.kappa_used, times[i] - s));
  }
  finish_report(report);
  if (!report.applicable) report.pass = false;
  report.fitted_rate = fit_decay_rate(report.times, report.measured, report.prefactor);
  return report;
}

}  // namespace fragsim
