#include "fragsim/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fragsim {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Normalisation zeta_j = j / sum_{l=1}^{j-1} l^{nu+1}, by direct summation.
double power_law_zeta(int j, double nu) {
  double denom = 0.0;
  for (int l = 1; l < j; ++l) denom += std::pow(static_cast<double>(l), nu + 1.0);
  return static_cast<double>(j) / denom;
}

}  // namespace

// ---- IndexGenerator ----------------------------------------------------------

double IndexGenerator::operator()(int n) const {
  switch (kind) {
    case Kind::constant:
      return k;
    case Kind::linear:
      return k * static_cast<double>(n);
    case Kind::power:
      return k * std::pow(static_cast<double>(n), q);
  }
  return 0.0;
}

bool IndexGenerator::nondecreasing() const {
  switch (kind) {
    case Kind::constant:
      return true;
    case Kind::linear:
      return k >= 0.0;
    case Kind::power:
      return k == 0.0 || q >= 0.0;
  }
  return true;
}

double IndexGenerator::inf_from(int n_min) const {
  if (nondecreasing()) return (*this)(n_min);
  // k >= 0 with negative exponent: values decrease towards 0.
  return 0.0;
}

// ---- PhiSpec -------------------------------------------------------------------

void PhiSpec::validate() const {
  require(std::isfinite(gamma) && std::isfinite(delta) && std::isfinite(omega),
          "phi: parameters must be finite");
  require(delta >= 0.0, "phi: delta must be >= 0");
  require(gamma > delta, "phi: gamma must exceed delta (positivity)");
  require(omega >= 0.0, "phi: omega must be >= 0");
}

double PhiSpec::operator()(double t) const { return gamma + delta * std::sin(omega * t); }

double PhiSpec::inf_on(double s, double t) const {
  if (delta == 0.0 || omega == 0.0) return gamma;
  const double lo = omega * s, hi = omega * t;
  if (hi - lo >= 2.0 * std::numbers::pi) return gamma - delta;
  // sine attains -1 at 3*pi/2 + 2*pi*k; check whether a trough lies in [lo, hi]
  const double two_pi = 2.0 * std::numbers::pi;
  const double trough = 1.5 * std::numbers::pi;
  const double k = std::ceil((lo - trough) / two_pi);
  if (trough + two_pi * k <= hi) return gamma - delta;
  return gamma + delta * std::min(std::sin(lo), std::sin(hi));
}

double PhiSpec::inf_tail(double) const {
  if (delta == 0.0 || omega == 0.0) return gamma;
  return gamma - delta;  // every trough beyond s is eventually reached
}

// ---- RateModel -----------------------------------------------------------------

void RateModel::validate() const {
  phi.validate();
  require(c.k >= 0.0 && d.k >= 0.0, "rate: generator scales must be >= 0");
}

double RateModel::operator()(int n, double t) const {
  if (zero_monomer && n == 1) return 0.0;
  return c(n) * phi(t) + d(n);
}

double RateModel::inf_over(int n_min, double s, double T) const {
  if (zero_monomer && n_min <= 1) return 0.0;
  const int base = std::max(n_min, zero_monomer ? 2 : n_min);
  const double phi_inf = std::isfinite(T) ? phi.inf_on(s, T) : phi.inf_tail(s);
  return c.inf_from(base) * phi_inf + d.inf_from(base);
}

// ---- CoefficientFamily -----------------------------------------------------------

void CoefficientFamily::check_time(double t) const {
  if (!(t >= 0.0) || t > horizon_)
    throw std::domain_error("time " + std::to_string(t) + " outside horizon [0, " +
                            (unbounded() ? std::string("inf") : std::to_string(horizon_)) + "]");
}

double CoefficientFamily::a(int n, double t) const {
  require(n >= 1, "a: index must be >= 1");
  check_time(t);
  return a_(n, t);
}

double CoefficientFamily::b(int n, int j, double t) const {
  require(n >= 1 && j >= 1, "b: indices must be >= 1");
  check_time(t);
  return b_(n, j, t);
}

void CoefficientFamily::daughter_row(int j, double t, std::span<double> out) const {
  require(j >= 1, "daughter_row: index must be >= 1");
  check_time(t);
  require(out.size() >= static_cast<std::size_t>(j - 1), "daughter_row: buffer too short");
  b_row_(j, t, out);
}

std::optional<double> CoefficientFamily::rate_lower_bound(int n_min, double s, double T) const {
  if (!rate_inf_) return std::nullopt;
  return rate_inf_(n_min, s, T);
}

CoefficientFamily FamilyBuilder::build() const {
  require(static_cast<bool>(a), "family: rate function missing");
  require(static_cast<bool>(b), "family: daughter function missing");
  require(horizon > 0.0, "family: horizon must be positive");
  CoefficientFamily fam;
  fam.a_ = a;
  fam.b_ = b;
  if (b_row) {
    fam.b_row_ = b_row;
  } else {
    auto bf = b;
    fam.b_row_ = [bf](int j, double t, std::span<double> out) {
      for (int n = 1; n < j; ++n) out[n - 1] = bf(n, j, t);
    };
  }
  fam.rate_inf_ = rate_inf;
  fam.horizon_ = horizon;
  fam.kind_ = kind;
  fam.description_ = description;
  fam.const_a_ = time_constant_a;
  fam.const_b_ = time_constant_b;
  return fam;
}

// ---- built-in families -------------------------------------------------------------

namespace {

FamilyBuilder affine_rate_builder(const RateModel& rate, double horizon) {
  rate.validate();
  FamilyBuilder fb;
  fb.a = [rate](int n, double t) { return rate(n, t); };
  fb.rate_inf = [rate](int n_min, double s, double T) { return rate.inf_over(n_min, s, T); };
  fb.horizon = horizon;
  fb.time_constant_a = rate.time_constant();
  return fb;
}

}  // namespace

CoefficientFamily make_power_law_family(double nu, const RateModel& rate, double horizon,
                                        double daughter_scale) {
  require(nu >= -1.0, "power law: nu must be >= -1");
  require(daughter_scale >= 0.0, "power law: daughter scale must be >= 0");
  FamilyBuilder fb = affine_rate_builder(rate, horizon);
  fb.kind = "power_law";
  fb.description = "b(n,j) = scale * n^nu * zeta_j";
  fb.b = [nu, daughter_scale](int n, int j, double) {
    if (j <= n || j < 2) return 0.0;
    return daughter_scale * std::pow(static_cast<double>(n), nu) * power_law_zeta(j, nu);
  };
  fb.b_row = [nu, daughter_scale](int j, double, std::span<double> out) {
    if (j < 2) return;
    const double z = daughter_scale * power_law_zeta(j, nu);
    for (int n = 1; n < j; ++n) out[n - 1] = std::pow(static_cast<double>(n), nu) * z;
  };
  fb.time_constant_b = true;
  return fb.build();
}

CoefficientFamily make_becker_doring_family(const RateModel& rate, double horizon) {
  FamilyBuilder fb = affine_rate_builder(rate, horizon);
  fb.kind = "becker_doring";
  fb.description = "monomer chip-off: b(1,2)=2, b(1,j)=b(j-1,j)=1";
  fb.b = [](int n, int j, double) {
    if (j <= n || j < 2) return 0.0;
    if (j == 2) return n == 1 ? 2.0 : 0.0;
    return (n == 1 || n == j - 1) ? 1.0 : 0.0;
  };
  fb.b_row = [](int j, double, std::span<double> out) {
    if (j < 2) return;
    std::fill_n(out.begin(), j - 1, 0.0);
    if (j == 2) {
      out[0] = 2.0;
    } else {
      out[0] = 1.0;
      out[j - 2] = 1.0;
    }
  };
  fb.time_constant_b = true;
  return fb.build();
}

CoefficientFamily make_pure_decay_family(const RateModel& rate, double horizon) {
  FamilyBuilder fb = affine_rate_builder(rate, horizon);
  fb.kind = "affine";
  fb.description = "affine rates, no fragmentation products";
  fb.b = [](int, int, double) { return 0.0; };
  fb.b_row = [](int j, double, std::span<double> out) {
    if (j >= 2) std::fill_n(out.begin(), j - 1, 0.0);
  };
  fb.time_constant_b = true;
  return fb.build();
}

CoefficientFamily make_custom_family(const CustomTable& table) {
  require(!table.a_values.empty(), "custom family: a_values empty");
  for (double v : table.a_values)
    require(std::isfinite(v), "custom family: a_values must be finite");
  for (const auto& e : table.b_entries) {
    require(e.n >= 1 && e.j >= 1, "custom family: daughter indices must be >= 1");
    require(std::isfinite(e.value), "custom family: daughter values must be finite");
  }
  auto a_values = table.a_values;
  // Dense daughter table, column-major by fragmenting size j.
  int max_j = 0;
  for (const auto& e : table.b_entries) max_j = std::max(max_j, std::max(e.j, e.n));
  std::vector<double> bt(static_cast<std::size_t>(max_j) * max_j, 0.0);
  for (const auto& e : table.b_entries)
    bt[static_cast<std::size_t>(e.j - 1) * max_j + (e.n - 1)] = e.value;

  FamilyBuilder fb;
  fb.kind = "custom";
  fb.description = "tabulated time-constant coefficients";
  fb.horizon = table.horizon;
  fb.time_constant_a = true;
  fb.time_constant_b = true;
  fb.a = [a_values](int n, double) {
    return n <= static_cast<int>(a_values.size()) ? a_values[n - 1] : 0.0;
  };
  fb.b = [bt, max_j](int n, int j, double) {
    if (n > max_j || j > max_j) return 0.0;
    return bt[static_cast<std::size_t>(j - 1) * max_j + (n - 1)];
  };
  fb.b_row = [bt, max_j](int j, double, std::span<double> out) {
    for (int n = 1; n < j; ++n)
      out[n - 1] = (n > max_j || j > max_j)
                       ? 0.0
                       : bt[static_cast<std::size_t>(j - 1) * max_j + (n - 1)];
  };
  return fb.build();
}

CoefficientFamily shift_family(const CoefficientFamily& family) {
  FamilyBuilder fb;
  fb.kind = "shifted:" + family.kind();
  fb.description = "index-shifted view of " + family.kind();
  fb.horizon = family.horizon();
  fb.time_constant_a = family.time_constant_a();
  fb.time_constant_b = family.time_constant_b();
  fb.a = [family](int n, double t) { return family.a(n + 1, t); };
  fb.b = [family](int n, int j, double t) { return family.b(n + 1, j + 1, t); };
  fb.b_row = [family](int j, double t, std::span<double> out) {
    for (int n = 1; n < j; ++n) out[n - 1] = family.b(n + 1, j + 1, t);
  };
  if (family.rate_lower_bound(1, 0.0, 1.0).has_value()) {
    fb.rate_inf = [family](int n_min, double s, double T) {
      return *family.rate_lower_bound(n_min + 1, s, T);
    };
  }
  return fb.build();
}

// ---- assumption checks ---------------------------------------------------------------

namespace {

void require_grid(std::span<const double> grid, const CoefficientFamily& family,
                  const char* who) {
  require(!grid.empty(), std::string(who) + ": time grid empty");
  for (double t : grid) family.check_time(t);
}

}  // namespace

NonnegativityReport check_nonnegativity(const CoefficientFamily& family, int n_max,
                                        std::span<const double> grid) {
  require(n_max >= 1, "check_nonnegativity: n_max must be >= 1");
  require_grid(grid, family, "check_nonnegativity");
  NonnegativityReport report;
  report.n_max = n_max;
  report.grid.assign(grid.begin(), grid.end());
  for (double t : grid) {
    for (int n = 1; n <= n_max; ++n) {
      const double an = family.a(n, t);
      if (!(an >= 0.0) || !std::isfinite(an)) {
        report.pass = false;
        report.witness = Witness{n, 0, t, an, "rate negative or non-finite"};
        return report;
      }
    }
    for (int j = 1; j <= n_max; ++j) {
      for (int n = 1; n <= n_max; ++n) {
        const double bnj = family.b(n, j, t);
        if (!(bnj >= 0.0) || !std::isfinite(bnj)) {
          report.pass = false;
          report.witness = Witness{n, j, t, bnj, "daughter count negative or non-finite"};
          return report;
        }
        if (j <= n && bnj != 0.0) {
          report.pass = false;
          report.witness = Witness{n, j, t, bnj, "daughter count nonzero for j <= n"};
          return report;
        }
      }
    }
  }
  return report;
}

double eval_lambda(const CoefficientFamily& family, int j, double t) {
  require(j >= 2, "eval_lambda: j must be >= 2");
  family.check_time(t);
  double acc = 0.0;
  for (int n = 1; n < j; ++n) acc += static_cast<double>(n) * family.b(n, j, t);
  return 1.0 - acc / static_cast<double>(j);
}

std::string_view mass_mode_name(MassMode mode) {
  switch (mode) {
    case MassMode::conserving:
      return "conserving";
    case MassMode::non_gaining:
      return "non_gaining";
    case MassMode::gaining:
      return "gaining";
  }
  return "unknown";
}

MassRuleReport check_mass_rule(const CoefficientFamily& family, int j_max,
                               std::span<const double> grid, double tol) {
  require(j_max >= 2, "check_mass_rule: j_max must be >= 2");
  require(tol >= 0.0, "check_mass_rule: tol must be >= 0");
  require_grid(grid, family, "check_mass_rule");
  MassRuleReport report;
  report.tol = tol;
  bool all_conserving = true;
  for (double t : grid) {
    report.max_abs_monomer_rate = std::max(report.max_abs_monomer_rate, std::fabs(family.a(1, t)));
    for (int j = 2; j <= j_max; ++j) {
      const double lam = eval_lambda(family, j, t);
      report.samples.push_back({j, t, lam});
      if (lam < -tol && !report.witness) {
        report.witness = Witness{0, j, t, lam, "negative mass defect"};
      }
      if (std::fabs(lam) > tol) all_conserving = false;
    }
  }
  if (report.witness) {
    report.mode = MassMode::gaining;
  } else if (all_conserving && report.max_abs_monomer_rate <= tol) {
    report.mode = MassMode::conserving;
  } else {
    report.mode = MassMode::non_gaining;
  }
  return report;
}

HolderCertificate estimate_holder(const CoefficientFamily& family,
                                  std::span<const double> weight, double sigma, int n_max,
                                  std::span<const double> grid) {
  require(sigma > 0.0 && sigma <= 1.0, "estimate_holder: sigma must lie in (0, 1]");
  require(n_max >= 2, "estimate_holder: n_max must be >= 2");
  require(weight.size() >= static_cast<std::size_t>(n_max), "estimate_holder: weight too short");
  require_grid(grid, family, "estimate_holder");
  std::vector<double> times(grid.begin(), grid.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  require(times.size() >= 2, "estimate_holder: need at least two distinct grid times");

  HolderCertificate cert;
  cert.sigma = sigma;
  cert.grid = times;
  cert.n_max = n_max;

  std::vector<double> row_t(n_max), row_s(n_max);
  for (std::size_t is = 0; is < times.size(); ++is) {
    for (std::size_t it = is + 1; it < times.size(); ++it) {
      const double s = times[is], t = times[it];
      const double dt_sigma = std::pow(t - s, sigma);
      for (double tau : times) {
        for (int n = 1; n <= n_max; ++n) {
          const double q =
              std::fabs(family.a(n, t) - family.a(n, s)) / ((1.0 + family.a(n, tau)) * dt_sigma);
          if (!std::isfinite(q)) {
            cert.status = HolderStatus::violated;
            cert.witness = HolderWitness{n, s, t, tau};
            return cert;
          }
          cert.c1 = std::max(cert.c1, q);
        }
        for (int j = 2; j <= n_max; ++j) {
          const double ajt = family.a(j, t), ajs = family.a(j, s);
          family.daughter_row(j, t, row_t);
          family.daughter_row(j, s, row_s);
          double acc = 0.0;
          for (int n = 1; n < j; ++n)
            acc += weight[n - 1] * std::fabs(ajt * row_t[n - 1] - ajs * row_s[n - 1]);
          const double q = acc / ((1.0 + family.a(j, tau)) * weight[j - 1] * dt_sigma);
          if (!std::isfinite(q)) {
            cert.status = HolderStatus::violated;
            cert.witness = HolderWitness{j, s, t, tau};
            return cert;
          }
          cert.c2 = std::max(cert.c2, q);
        }
      }
    }
  }
  return cert;
}

}  // namespace fragsim
