#pragma once

// Truncated operator actions and weighted-l1 functionals.  The loss part A
// scales each component by its rate, the gain part B distributes daughter
// fluxes strictly downward in size, G = A + B is the full generator.  All
// matrix representations of the flow are upper triangular because mass only
// moves to smaller sizes.

#include <complex>
#include <span>
#include <vector>

#include "fragsim/coefficients.hpp"

namespace fragsim {

struct StateVector {
  double t = 0.0;
  std::vector<double> u;

  int size() const { return static_cast<int>(u.size()); }
  double mass() const;                                     // sum n * u_n
  double weighted_norm(std::span<const double> w) const;   // sum w_n |u_n|
  double weighted_functional(std::span<const double> w) const;  // sum w_n u_n
};

// Dense column-major upper-triangular matrix with interval metadata.  Entries
// below the diagonal are structurally zero: they are never written and reads
// return exact 0.0.
class TriangularMatrix {
 public:
  TriangularMatrix() = default;
  TriangularMatrix(int n, double s, double t, bool rescaled);
  static TriangularMatrix identity(int n, double s, double t, bool rescaled);

  int size() const { return n_; }
  double s() const { return s_; }
  double t() const { return t_; }
  bool rescaled() const { return rescaled_; }

  double operator()(int i, int j) const;  // 1-based
  void set(int i, int j, double v);       // throws std::logic_error below the diagonal

  std::span<const double> column(int j) const;  // full column, entries i = 1..n
  std::span<double> column_mut(int j);
  std::span<const double> data() const { return data_; }

  double max_abs_below_diagonal() const;  // scans storage; 0.0 by construction

 private:
  int n_ = 0;
  double s_ = 0.0, t_ = 0.0;
  bool rescaled_ = false;
  std::vector<double> data_;  // column-major, n*n, zero-initialised
};

// C = L * R for upper-triangular factors; interval metadata composes as
// (R.s -> L.t).  Throws std::invalid_argument on size or rescale mismatch.
TriangularMatrix multiply(const TriangularMatrix& L, const TriangularMatrix& R);

// (A u)_n = -a_n(t) u_n
std::vector<double> apply_A(const CoefficientFamily& family, double t, std::span<const double> u);
// (B u)_n = sum_{j>n} a_j(t) b_{n,j}(t) u_j
std::vector<double> apply_B(const CoefficientFamily& family, double t, std::span<const double> u);
// G = A + B
std::vector<double> apply_G(const CoefficientFamily& family, double t, std::span<const double> u);

// Scratch-reusing variant for the solver hot path; scratch is resized as
// needed and du must have u.size() entries.
struct GeneratorWorkspace {
  std::vector<double> rates;
  std::vector<double> row;
};
void apply_G_into(const CoefficientFamily& family, double t, std::span<const double> u,
                  std::span<double> du, GeneratorWorkspace& ws);

double weighted_norm(std::span<const double> u, std::span<const double> w);
double phi_w(std::span<const double> u, std::span<const double> w);
double first_moment(std::span<const double> u);

// Exact weighted-l1 operator norm: max_j (1/w_j) sum_i w_i |m_ij|.
double opnorm_weighted(const TriangularMatrix& m, std::span<const double> w);
double opnorm_weighted(std::span<const double> colmajor, int n, std::span<const double> w);

// Weighted contraction of the gain against the loss, columnwise:
// ratio_j = ||B(t) e_j||_w / ||A(t) e_j||_w for every j <= n with a_j(t) > 0.
struct BBoundResult {
  double max_ratio = 0.0;
  int argmax_j = 0;
};
BBoundResult check_B_bound(const CoefficientFamily& family, std::span<const double> w, double t,
                           int n);

// Weighted norms of R(lambda, A) = (lambda - A)^{-1} (diagonal) and of
// B R(lambda, A), truncated at n.  Requires Re(lambda) > 0.
struct ResolventBounds {
  double resolvent_norm = 0.0;
  double b_resolvent_norm = 0.0;
};
ResolventBounds check_resolvent_bound(const CoefficientFamily& family, std::span<const double> w,
                                      double t, std::complex<double> lambda, int n);

// Weighted norm of (G(t) - G(s)) R(1, A(tau)) at truncation n: the quantity
// the Hölder certificate (c1 + c2) |t-s|^sigma must dominate.
double holder_difference_opnorm(const CoefficientFamily& family, std::span<const double> w,
                                double s, double t, double tau, int n);

struct HolderOpnormCheck {
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};
HolderOpnormCheck check_holder_opnorm(const CoefficientFamily& family, std::span<const double> w,
                                      const HolderCertificate& holder, double s, double t,
                                      double tau, int n);

}  // namespace fragsim
