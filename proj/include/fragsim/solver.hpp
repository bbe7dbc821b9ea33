#pragma once

// Time integration of u' = G(t) u and construction of the two-parameter
// solution matrices U(t, s).  Three routes with independent error behaviour:
//   adaptive_rk    - embedded Runge-Kutta 5(4) with PI step control,
//   voc_recursion  - per-column variation-of-constants recursion on
//                    Gauss-Legendre panels (integral formulation),
//   product_oracle - product of matrix exponentials of the generator frozen
//                    at the midpoint of each step (exact for time-constant
//                    coefficients; second-order accurate for smooth ones).

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragsim/coefficients.hpp"
#include "fragsim/operators.hpp"

namespace fragsim {

enum class SolveMethod { adaptive_rk, voc_recursion, product_oracle };

std::string_view method_name(SolveMethod method);
SolveMethod method_from_name(std::string_view name);  // throws std::invalid_argument

struct SolverConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.25;
  double min_step = 1e-12;
  int quadrature_points = 5;
  SolveMethod method = SolveMethod::adaptive_rk;

  void validate() const;  // throws std::invalid_argument
};

struct SolverStats {
  long steps = 0;
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  long panels = 0;     // voc route: panels used at the finest accepted level
  long exp_evals = 0;  // product route: matrix exponentials taken
};

struct Trajectory {
  std::vector<StateVector> states;  // states.front() is the initial condition
  bool dense_output = false;        // values only at requested times
  SolverStats stats;
};

class SolverError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Integrates from (s, u0) and records the state at every output time.
// output_times must be strictly increasing, lie in [s, horizon], and the
// first recorded state is exactly (s, u0) whether or not s is listed.
Trajectory integrate(const CoefficientFamily& family, std::span<const double> u0, double s,
                     std::span<const double> output_times, const SolverConfig& cfg);

// Column n of the rescaled flow matrix V(t, s) (generator G(t) - I) by the
// variation-of-constants recursion, solved top row last.  Returns entries
// m = 1..n; entries above n are structurally zero for every truncation.
// Panels are doubled until the column at t changes by less than abs_tol.
std::vector<double> column_voc(const CoefficientFamily& family, int n, double s, double t,
                               const SolverConfig& cfg, SolverStats* stats = nullptr);

// U(t, s) (or V(t, s) when rescaled) at truncation n by the configured method.
TriangularMatrix evolution_matrix(const CoefficientFamily& family, double s, double t, int n,
                                  const SolverConfig& cfg, bool rescaled = false,
                                  int workers = 1);

// U(t_i, s) for every t_i in times (strictly increasing, >= s).
std::vector<TriangularMatrix> evolution_matrices(const CoefficientFamily& family, double s,
                                                 std::span<const double> times, int n,
                                                 const SolverConfig& cfg, bool rescaled = false,
                                                 int workers = 1);

// Product of step exponentials exp(h G(t_k + h/2)) over a uniform partition
// of [s, t] into `steps` pieces, frozen at each step's midpoint.
TriangularMatrix product_oracle(const CoefficientFamily& family, double s, double t, int n,
                                int steps);

// Weighted norm of U(t, r) U(r, s) - U(t, s): the two-parameter composition
// defect at truncation n.
double compose_check(const CoefficientFamily& family, double s, double r, double t, int n,
                     const SolverConfig& cfg, std::span<const double> w);

}  // namespace fragsim
