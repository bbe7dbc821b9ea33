#include "fragsim/operators.hpp"

#include <cmath>
#include <stdexcept>

#include "fragsim/kernels.hpp"

namespace fragsim {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void require_weight(std::span<const double> w, std::size_t n, const char* who) {
  require(w.size() >= n, std::string(who) + ": weight too short");
  for (std::size_t i = 0; i < n; ++i)
    require(std::isfinite(w[i]) && w[i] > 0.0,
            std::string(who) + ": weight entries must be positive and finite");
}

}  // namespace

// ---- StateVector ---------------------------------------------------------------

double StateVector::mass() const { return kernels::index_moment(u); }

double StateVector::weighted_norm(std::span<const double> w) const {
  return fragsim::weighted_norm(u, w);
}

double StateVector::weighted_functional(std::span<const double> w) const {
  return fragsim::phi_w(u, w);
}

// ---- TriangularMatrix ------------------------------------------------------------

TriangularMatrix::TriangularMatrix(int n, double s, double t, bool rescaled)
    : n_(n), s_(s), t_(t), rescaled_(rescaled), data_(static_cast<std::size_t>(n) * n, 0.0) {
  require(n >= 1, "TriangularMatrix: size must be >= 1");
}

TriangularMatrix TriangularMatrix::identity(int n, double s, double t, bool rescaled) {
  TriangularMatrix m(n, s, t, rescaled);
  for (int i = 1; i <= n; ++i) m.set(i, i, 1.0);
  return m;
}

double TriangularMatrix::operator()(int i, int j) const {
  require(i >= 1 && i <= n_ && j >= 1 && j <= n_, "TriangularMatrix: index out of range");
  return data_[static_cast<std::size_t>(j - 1) * n_ + (i - 1)];
}

void TriangularMatrix::set(int i, int j, double v) {
  require(i >= 1 && i <= n_ && j >= 1 && j <= n_, "TriangularMatrix: index out of range");
  if (i > j) throw std::logic_error("TriangularMatrix: write below the diagonal");
  data_[static_cast<std::size_t>(j - 1) * n_ + (i - 1)] = v;
}

std::span<const double> TriangularMatrix::column(int j) const {
  require(j >= 1 && j <= n_, "TriangularMatrix: column out of range");
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(j - 1) * n_, n_);
}

std::span<double> TriangularMatrix::column_mut(int j) {
  require(j >= 1 && j <= n_, "TriangularMatrix: column out of range");
  return std::span<double>(data_).subspan(static_cast<std::size_t>(j - 1) * n_, n_);
}

double TriangularMatrix::max_abs_below_diagonal() const {
  double m = 0.0;
  for (int j = 1; j <= n_; ++j) {
    auto col = column(j);
    for (int i = j + 1; i <= n_; ++i) m = std::max(m, std::fabs(col[i - 1]));
  }
  return m;
}

TriangularMatrix multiply(const TriangularMatrix& L, const TriangularMatrix& R) {
  require(L.size() == R.size(), "multiply: size mismatch");
  require(L.rescaled() == R.rescaled(), "multiply: rescale mismatch");
  const int n = L.size();
  TriangularMatrix C(n, R.s(), L.t(), L.rescaled());
  for (int j = 1; j <= n; ++j) {
    auto cj = C.column_mut(j);
    auto rj = R.column(j);
    for (int k = 1; k <= j; ++k) {
      const double rkj = rj[k - 1];
      if (rkj == 0.0) continue;
      kernels::axpy(rkj, L.column(k).first(k), cj.first(k));
    }
  }
  return C;
}

// ---- operator actions ---------------------------------------------------------------

std::vector<double> apply_A(const CoefficientFamily& family, double t, std::span<const double> u) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = -family.a(static_cast<int>(i) + 1, t) * u[i];
  return out;
}

std::vector<double> apply_B(const CoefficientFamily& family, double t, std::span<const double> u) {
  const int n = static_cast<int>(u.size());
  std::vector<double> out(u.size(), 0.0);
  std::vector<double> row(u.size());
  for (int j = 2; j <= n; ++j) {
    const double flux = family.a(j, t) * u[j - 1];
    if (flux == 0.0) continue;
    family.daughter_row(j, t, row);
    kernels::axpy(flux, std::span<const double>(row).first(j - 1),
                  std::span<double>(out).first(j - 1));
  }
  return out;
}

std::vector<double> apply_G(const CoefficientFamily& family, double t, std::span<const double> u) {
  std::vector<double> out(u.size());
  GeneratorWorkspace ws;
  apply_G_into(family, t, u, out, ws);
  return out;
}

void apply_G_into(const CoefficientFamily& family, double t, std::span<const double> u,
                  std::span<double> du, GeneratorWorkspace& ws) {
  const int n = static_cast<int>(u.size());
  require(du.size() >= u.size(), "apply_G_into: output too short");
  ws.rates.resize(u.size());
  ws.row.resize(u.size());
  for (int i = 1; i <= n; ++i) {
    ws.rates[i - 1] = family.a(i, t);
    du[i - 1] = -ws.rates[i - 1] * u[i - 1];
  }
  for (int j = 2; j <= n; ++j) {
    const double flux = ws.rates[j - 1] * u[j - 1];
    if (flux == 0.0) continue;
    family.daughter_row(j, t, ws.row);
    kernels::axpy(flux, std::span<const double>(ws.row).first(j - 1), du.first(j - 1));
  }
}

// ---- functionals ------------------------------------------------------------------------

double weighted_norm(std::span<const double> u, std::span<const double> w) {
  require_weight(w, u.size(), "weighted_norm");
  return kernels::weighted_abs_sum(w, u);
}

double phi_w(std::span<const double> u, std::span<const double> w) {
  require_weight(w, u.size(), "phi_w");
  return kernels::weighted_sum(w, u);
}

double first_moment(std::span<const double> u) { return kernels::index_moment(u); }

// ---- operator norms ----------------------------------------------------------------------

double opnorm_weighted(std::span<const double> colmajor, int n, std::span<const double> w) {
  require(n >= 1, "opnorm_weighted: size must be >= 1");
  require(colmajor.size() >= static_cast<std::size_t>(n) * n, "opnorm_weighted: matrix too small");
  require_weight(w, static_cast<std::size_t>(n), "opnorm_weighted");
  double norm = 0.0;
  for (int j = 1; j <= n; ++j) {
    auto col = colmajor.subspan(static_cast<std::size_t>(j - 1) * n, n);
    norm = std::max(norm, kernels::weighted_abs_sum(w.first(n), col) / w[j - 1]);
  }
  return norm;
}

double opnorm_weighted(const TriangularMatrix& m, std::span<const double> w) {
  return opnorm_weighted(m.data(), m.size(), w);
}

BBoundResult check_B_bound(const CoefficientFamily& family, std::span<const double> w, double t,
                           int n) {
  require(n >= 1, "check_B_bound: size must be >= 1");
  require_weight(w, static_cast<std::size_t>(n), "check_B_bound");
  BBoundResult res;
  std::vector<double> row(static_cast<std::size_t>(n));
  for (int j = 2; j <= n; ++j) {
    if (!(family.a(j, t) > 0.0)) continue;  // ratio undefined when the column is inert
    family.daughter_row(j, t, row);
    const double ratio = kernels::weighted_abs_sum(w.first(j - 1),
                                                   std::span<const double>(row).first(j - 1)) /
                         w[j - 1];
    if (ratio > res.max_ratio) {
      res.max_ratio = ratio;
      res.argmax_j = j;
    }
  }
  return res;
}

ResolventBounds check_resolvent_bound(const CoefficientFamily& family, std::span<const double> w,
                                      double t, std::complex<double> lambda, int n) {
  require(lambda.real() > 0.0, "check_resolvent_bound: Re(lambda) must be > 0");
  require(n >= 1, "check_resolvent_bound: size must be >= 1");
  require_weight(w, static_cast<std::size_t>(n), "check_resolvent_bound");
  ResolventBounds res;
  std::vector<double> row(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    const double aj = family.a(j, t);
    res.resolvent_norm = std::max(res.resolvent_norm, 1.0 / std::abs(lambda + aj));
    if (j >= 2 && aj > 0.0) {
      family.daughter_row(j, t, row);
      const double colsum = kernels::weighted_abs_sum(
          w.first(j - 1), std::span<const double>(row).first(j - 1));
      res.b_resolvent_norm =
          std::max(res.b_resolvent_norm, (aj / std::abs(lambda + aj)) * colsum / w[j - 1]);
    }
  }
  return res;
}

double holder_difference_opnorm(const CoefficientFamily& family, std::span<const double> w,
                                double s, double t, double tau, int n) {
  require(n >= 1, "holder_difference_opnorm: size must be >= 1");
  require_weight(w, static_cast<std::size_t>(n), "holder_difference_opnorm");
  double norm = 0.0;
  std::vector<double> row_t(static_cast<std::size_t>(n)), row_s(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    const double ajt = family.a(j, t), ajs = family.a(j, s);
    double colsum = w[j - 1] * std::fabs(ajt - ajs);  // diagonal of A(t)-A(s)
    if (j >= 2) {
      family.daughter_row(j, t, row_t);
      family.daughter_row(j, s, row_s);
      for (int m = 1; m < j; ++m)
        colsum += w[m - 1] * std::fabs(ajt * row_t[m - 1] - ajs * row_s[m - 1]);
    }
    norm = std::max(norm, colsum / ((1.0 + family.a(j, tau)) * w[j - 1]));
  }
  return norm;
}

HolderOpnormCheck check_holder_opnorm(const CoefficientFamily& family, std::span<const double> w,
                                      const HolderCertificate& holder, double s, double t,
                                      double tau, int n) {
  HolderOpnormCheck check;
  check.measured = holder_difference_opnorm(family, w, s, t, tau, n);
  check.bound = (holder.c1 + holder.c2) * std::pow(std::fabs(t - s), holder.sigma) + 1e-10;
  check.pass = check.measured <= check.bound;
  return check;
}

}  // namespace fragsim
