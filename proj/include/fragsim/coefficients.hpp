#pragma once

// Time-dependent fragmentation coefficients: the rate a_n(t) at which size-n
// clusters break up and the expected daughter counts b_{n,j}(t) produced by a
// breaking size-j cluster.  A CoefficientFamily bundles both together with its
// time horizon; checker routines sample the standing assumptions (sign
// structure, mass rule, Hölder regularity in time) on explicit grids and
// report witnesses on failure.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fragsim {

inline constexpr double kUnboundedHorizon = std::numeric_limits<double>::infinity();

// Per-index constant generator: const k | linear k*n | power k*n^q.
struct IndexGenerator {
  enum class Kind { constant, linear, power };
  Kind kind = Kind::constant;
  double k = 0.0;
  double q = 0.0;

  double operator()(int n) const;
  bool nondecreasing() const;      // in n, assuming k >= 0
  double inf_from(int n_min) const;  // infimum over n >= n_min (k >= 0 assumed)

  static IndexGenerator constant(double k) { return {Kind::constant, k, 0.0}; }
  static IndexGenerator linear(double k) { return {Kind::linear, k, 0.0}; }
  static IndexGenerator power(double k, double q) { return {Kind::power, k, q}; }
};

// phi(t) = gamma + delta * sin(omega * t) with gamma > delta >= 0, omega >= 0,
// so phi is positive, bounded and Lipschitz.
struct PhiSpec {
  double gamma = 1.0;
  double delta = 0.0;
  double omega = 1.0;

  double operator()(double t) const;
  double lower_bound() const { return gamma - delta; }  // global infimum bound
  double inf_on(double s, double t) const;               // exact infimum over [s, t]
  double inf_tail(double s) const;                       // infimum over [s, infinity)
  double lipschitz() const { return delta * omega; }
  void validate() const;  // throws std::invalid_argument
};

// Affine-in-time rate a_n(t) = c_n * phi(t) + d_n, optionally forced to vanish
// at n = 1 (the monomer does not fragment in the mass-conserving regime).
struct RateModel {
  IndexGenerator c = IndexGenerator::constant(0.0);
  IndexGenerator d = IndexGenerator::constant(0.0);
  PhiSpec phi;
  bool zero_monomer = false;

  double operator()(int n, double t) const;
  // Exact lower bound for inf over n >= n_min, t in [s, T] (T may be infinite).
  double inf_over(int n_min, double s, double T) const;
  bool time_constant() const { return c.k == 0.0 || phi.delta == 0.0 || phi.omega == 0.0; }
  void validate() const;
};

class CoefficientFamily {
 public:
  using RateFn = std::function<double(int, double)>;
  using DaughterFn = std::function<double(int, int, double)>;
  using DaughterRowFn = std::function<void(int, double, std::span<double>)>;
  using RateInfFn = std::function<double(int, double, double)>;

  CoefficientFamily() = default;

  double a(int n, double t) const;
  double b(int n, int j, double t) const;
  // Fills out[m-1] = b(m, j, t) for m = 1..j-1; out.size() must be >= j-1.
  void daughter_row(int j, double t, std::span<double> out) const;

  double horizon() const noexcept { return horizon_; }
  bool unbounded() const noexcept { return !std::isfinite(horizon_); }
  const std::string& kind() const noexcept { return kind_; }
  const std::string& description() const noexcept { return description_; }
  bool time_constant_a() const noexcept { return const_a_; }
  bool time_constant_b() const noexcept { return const_b_; }

  // Analytic lower bound for inf_{n >= n_min, t in [s, T]} a_n(t) when known.
  std::optional<double> rate_lower_bound(int n_min, double s, double T) const;

  void check_time(double t) const;  // throws std::domain_error outside [0, horizon]

  friend struct FamilyBuilder;

 private:
  RateFn a_;
  DaughterFn b_;
  DaughterRowFn b_row_;
  RateInfFn rate_inf_;
  double horizon_ = kUnboundedHorizon;
  std::string kind_ = "custom";
  std::string description_;
  bool const_a_ = false;
  bool const_b_ = false;
};

struct FamilyBuilder {
  std::string kind = "custom";
  std::string description;
  CoefficientFamily::RateFn a;
  CoefficientFamily::DaughterFn b;
  CoefficientFamily::DaughterRowFn b_row;     // optional; derived from b if absent
  CoefficientFamily::RateInfFn rate_inf;      // optional analytic rate bound
  double horizon = kUnboundedHorizon;
  bool time_constant_a = false;
  bool time_constant_b = false;

  CoefficientFamily build() const;  // throws std::invalid_argument if a or b missing
};

// Power-law daughters: b_{n,j}(t) = scale * n^nu * zeta_j with the
// normalisation zeta_j = j / sum_{l<j} l^{nu+1} (mass-conserving at scale 1).
// Requires nu >= -1.
CoefficientFamily make_power_law_family(double nu, const RateModel& rate,
                                        double horizon = kUnboundedHorizon,
                                        double daughter_scale = 1.0);

// Binary chip-off: a size-j cluster sheds one monomer, b(1,j) = 1 and
// b(j-1,j) = 1 for j >= 3, b(1,2) = 2.
CoefficientFamily make_becker_doring_family(const RateModel& rate,
                                            double horizon = kUnboundedHorizon);

// Affine rates with no fragmentation products (b == 0): pure decay.
CoefficientFamily make_pure_decay_family(const RateModel& rate,
                                         double horizon = kUnboundedHorizon);

// Tabulated time-constant coefficients; a_values is 1-based in spirit
// (a_values[0] = a_1).  Daughter entries outside the table are zero.
struct CustomTable {
  std::vector<double> a_values;
  struct Entry {
    int n, j;
    double value;
  };
  std::vector<Entry> b_entries;
  double horizon = kUnboundedHorizon;
};
CoefficientFamily make_custom_family(const CustomTable& table);

// Index-shifted system: rates n -> n+1 and daughters (n,j) -> (n+1,j+1).
// Inherits the horizon and time-constancy flags.
CoefficientFamily shift_family(const CoefficientFamily& family);

// ---- assumption checks -------------------------------------------------------

struct Witness {
  int n = 0;
  int j = 0;
  double t = 0.0;
  double value = 0.0;
  std::string what;
};

struct NonnegativityReport {
  bool pass = true;
  std::optional<Witness> witness;
  int n_max = 0;
  std::vector<double> grid;
};

// Checks a >= 0, b >= 0 and b(n,j) = 0 for j <= n over indices up to n_max and
// the given time grid.  First violation (ascending t, then index) is reported.
NonnegativityReport check_nonnegativity(const CoefficientFamily& family, int n_max,
                                        std::span<const double> grid);

// Mass-defect fraction of a breaking size-j cluster:
// lambda_j(t) = 1 - (1/j) * sum_{n<j} n * b(n,j,t).  Zero means the daughters
// carry exactly the parent mass; negative means mass is created.
double eval_lambda(const CoefficientFamily& family, int j, double t);

enum class MassMode { conserving, non_gaining, gaining };
std::string_view mass_mode_name(MassMode mode);

struct MassRuleReport {
  MassMode mode = MassMode::conserving;
  std::optional<Witness> witness;  // set when mode == gaining
  struct LambdaSample {
    int j;
    double t;
    double lambda;
  };
  std::vector<LambdaSample> samples;
  double tol = 0.0;
  double max_abs_monomer_rate = 0.0;
};

MassRuleReport check_mass_rule(const CoefficientFamily& family, int j_max,
                               std::span<const double> grid, double tol = 1e-10);

enum class HolderStatus { certified_on_grid, violated };

struct HolderWitness {
  int n = 0;
  double s = 0.0, t = 0.0, tau = 0.0;
};

struct HolderCertificate {
  double sigma = 1.0;
  double c1 = 0.0;  // max rate quotient  |a_n(t)-a_n(s)| / ((1+a_n(tau)) |t-s|^sigma)
  double c2 = 0.0;  // max weighted flux quotient (see estimate_holder)
  HolderStatus status = HolderStatus::certified_on_grid;
  std::optional<HolderWitness> witness;  // set when status == violated
  std::vector<double> grid;
  int n_max = 0;
};

// Samples the two Hölder-in-time quotients over all grid pairs s < t and all
// grid tau: c1 bounds the relative rate increments, c2 the weighted daughter
// flux increments (1/(1+a_j(tau))) sum_{n<j} w_n |a_j(t)b_{n,j}(t) -
// a_j(s)b_{n,j}(s)| / (w_j |t-s|^sigma).  Non-finite quotients flip the status
// to violated with a witness.
HolderCertificate estimate_holder(const CoefficientFamily& family,
                                  std::span<const double> weight, double sigma, int n_max,
                                  std::span<const double> grid);

}  // namespace fragsim
