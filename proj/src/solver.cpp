#include "fragsim/solver.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>

#include <Eigen/Core>
#include <unsupported/Eigen/MatrixFunctions>

#include "fragsim/kernels.hpp"

namespace fragsim {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string fmt_time(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", t);
  return buf;
}

// ---- worker pool -----------------------------------------------------------------

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min(workers, count);
  pool.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---- Dormand-Prince 5(4) ------------------------------------------------------------

using RhsFn = std::function<void(double, std::span<const double>, std::span<double>)>;
using OutputFn = std::function<void(std::size_t, double, std::span<const double>)>;

constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192, kB5 = -2187.0 / 6784,
                 kB6 = 11.0 / 84;
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

// Integrates y' = rhs(t, y) from (s, y0), calling on_output(i, t_i, y) at each
// output time (strictly increasing, all > s), hitting the times exactly.
void dopri5(const RhsFn& rhs, double s, std::span<const double> y0,
            std::span<const double> outputs, const SolverConfig& cfg, const OutputFn& on_output,
            SolverStats& stats) {
  const std::size_t n = y0.size();
  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y5(n);

  auto stage = [&](double tt, std::vector<double>& out) {
    rhs(tt, ytmp, out);
    ++stats.rhs_evals;
  };

  double t = s;
  rhs(t, y, k1);
  ++stats.rhs_evals;

  double max_y = cfg.abs_tol, max_f = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_y = std::max(max_y, std::fabs(y[i]));
    max_f = std::max(max_f, std::fabs(k1[i]));
  }
  double h = std::min(cfg.max_step, outputs.back() - s);
  if (max_f > 0.0) h = std::min(h, 0.01 * max_y / max_f);
  h = std::max(h, cfg.min_step);

  double err_old = 1e-4;
  bool last_rejected = false;
  std::size_t out_idx = 0;

  while (out_idx < outputs.size()) {
    const double target = outputs[out_idx];
    double h_try = std::min(h, cfg.max_step);
    bool hit = false;
    if (t + 1.01 * h_try >= target) {
      h_try = target - t;
      hit = true;
    }

    ytmp = y;
    kernels::axpy(h_try * kA21, k1, ytmp);
    stage(t + kC2 * h_try, k2);

    ytmp = y;
    kernels::axpy(h_try * kA31, k1, ytmp);
    kernels::axpy(h_try * kA32, k2, ytmp);
    stage(t + kC3 * h_try, k3);

    ytmp = y;
    kernels::axpy(h_try * kA41, k1, ytmp);
    kernels::axpy(h_try * kA42, k2, ytmp);
    kernels::axpy(h_try * kA43, k3, ytmp);
    stage(t + kC4 * h_try, k4);

    ytmp = y;
    kernels::axpy(h_try * kA51, k1, ytmp);
    kernels::axpy(h_try * kA52, k2, ytmp);
    kernels::axpy(h_try * kA53, k3, ytmp);
    kernels::axpy(h_try * kA54, k4, ytmp);
    stage(t + kC5 * h_try, k5);

    ytmp = y;
    kernels::axpy(h_try * kA61, k1, ytmp);
    kernels::axpy(h_try * kA62, k2, ytmp);
    kernels::axpy(h_try * kA63, k3, ytmp);
    kernels::axpy(h_try * kA64, k4, ytmp);
    kernels::axpy(h_try * kA65, k5, ytmp);
    stage(t + h_try, k6);

    y5 = y;
    kernels::axpy(h_try * kB1, k1, y5);
    kernels::axpy(h_try * kB3, k3, y5);
    kernels::axpy(h_try * kB4, k4, y5);
    kernels::axpy(h_try * kB5, k5, y5);
    kernels::axpy(h_try * kB6, k6, y5);

    ytmp = y5;
    stage(t + h_try, k7);  // FSAL stage, also the 4th-order difference input

    double err_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h_try * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] +
                                kE6 * k6[i] + kE7 * k7[i]);
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
      err_sq += (e / sc) * (e / sc);
    }
    double err = std::sqrt(err_sq / static_cast<double>(n));
    if (!std::isfinite(err)) err = 1e10;

    ++stats.steps;
    if (err <= 1.0) {
      ++stats.accepted;
      t = hit ? target : t + h_try;
      y.swap(y5);
      k1.swap(k7);
      if (hit) {
        for (double v : y)
          if (!std::isfinite(v))
            throw SolverError("non-finite state at t = " + fmt_time(t));
        on_output(out_idx, t, y);
        ++out_idx;
      }
      double fac = 0.9 * std::pow(err > 0.0 ? err : 1e-16, -0.17) * std::pow(err_old, 0.04);
      if (last_rejected) fac = std::min(fac, 1.0);
      fac = std::clamp(fac, 0.2, 5.0);
      err_old = std::max(err, 1e-4);
      last_rejected = false;
      if (!hit) h = h_try * fac;  // clipped steps keep the nominal size
      h = std::min(h, cfg.max_step);
    } else {
      ++stats.rejected;
      last_rejected = true;
      const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h = h_try * fac;
      if (h < cfg.min_step)
        throw SolverError("step size underflow at t = " + fmt_time(t) +
                          " (stiff generator for the explicit method; "
                          "use method \"voc_recursion\")");
    }
  }
}

// ---- Gauss-Legendre rule with partial-integration matrix -----------------------------

struct GaussRule {
  int q = 0;
  std::vector<double> nodes;    // ascending, in (-1, 1)
  std::vector<double> weights;  // full-interval weights
  std::vector<double> partial;  // q*q row-major: partial[i*q+j] = int_{-1}^{nodes[i]} L_j
};

// P_q(x) and its derivative by the three-term recurrence.
std::pair<double, double> legendre(int q, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= q; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = q * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

double lagrange_basis(const std::vector<double>& nodes, int j, double x) {
  double v = 1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (static_cast<int>(k) == j) continue;
    v *= (x - nodes[k]) / (nodes[j] - nodes[k]);
  }
  return v;
}

GaussRule build_gauss_rule(int q) {
  GaussRule rule;
  rule.q = q;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre(q, x);
      const double dx = p / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    auto [p, dp] = legendre(q, x);
    (void)p;
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  std::sort(rule.nodes.begin(), rule.nodes.end());
  for (int i = 0; i < q; ++i) {
    auto [p, dp] = legendre(q, rule.nodes[i]);
    (void)p;
    rule.weights[i] = 2.0 / ((1.0 - rule.nodes[i] * rule.nodes[i]) * dp * dp);
  }
  // Partial integrals of the Lagrange basis over [-1, x_i]: the same q-point
  // rule mapped onto [-1, x_i] is exact (degree q-1 <= 2q-1).
  rule.partial.assign(static_cast<std::size_t>(q) * q, 0.0);
  for (int i = 0; i < q; ++i) {
    const double half = 0.5 * (rule.nodes[i] + 1.0);
    for (int j = 0; j < q; ++j) {
      double acc = 0.0;
      for (int m = 0; m < q; ++m) {
        const double xm = -1.0 + half * (rule.nodes[m] + 1.0);
        acc += rule.weights[m] * lagrange_basis(rule.nodes, j, xm);
      }
      rule.partial[static_cast<std::size_t>(i) * q + j] = half * acc;
    }
  }
  return rule;
}

const GaussRule& gauss_rule(int q) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(q);
  if (it == cache.end()) it = cache.emplace(q, build_gauss_rule(q)).first;
  return it->second;
}

// ---- variation-of-constants column recursion ---------------------------------------

constexpr long kMaxPanels = 1L << 20;

// One full pass at a fixed panel count; returns the column head (m = 1..n).
std::vector<double> voc_pass(const CoefficientFamily& family, int n, double s, double t,
                             int panels, const GaussRule& rule) {
  const int q = rule.q;
  const std::size_t M = static_cast<std::size_t>(panels) * q;
  const double width = (t - s) / panels;

  // Node times, panel-major.
  std::vector<double> times(M);
  for (int k = 0; k < panels; ++k) {
    const double alpha = s + width * k;
    for (int i = 0; i < q; ++i)
      times[static_cast<std::size_t>(k) * q + i] = alpha + 0.5 * width * (rule.nodes[i] + 1.0);
  }

  // Daughter table for time-constant b: btab[(m-1)*n + (j-1)] = b(m, j).
  std::vector<double> btab;
  std::vector<double> row(static_cast<std::size_t>(n));
  if (family.time_constant_b()) {
    btab.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 2; j <= n; ++j) {
      family.daughter_row(j, s, row);
      for (int m = 1; m < j; ++m) btab[static_cast<std::size_t>(m - 1) * n + (j - 1)] = row[m - 1];
    }
  }

  // fay[j-1][idx] = a_j(times[idx]) * y_j(times[idx]) for completed rows j.
  std::vector<std::vector<double>> fay(static_cast<std::size_t>(n));
  std::vector<double> result(static_cast<std::size_t>(n), 0.0);

  std::vector<double> d(q), g(q), I(q), E(q), ynode(q);

  for (int m = n; m >= 1; --m) {
    auto& fay_m = fay[m - 1];
    fay_m.resize(M);
    double y_alpha = (m == n) ? 1.0 : 0.0;
    for (int k = 0; k < panels; ++k) {
      const std::size_t base = static_cast<std::size_t>(k) * q;
      const double half = 0.5 * width;
      for (int i = 0; i < q; ++i) {
        const double tau = times[base + i];
        d[i] = 1.0 + family.a(m, tau);
        double acc = 0.0;
        if (family.time_constant_b()) {
          const double* bm = &btab[static_cast<std::size_t>(m - 1) * n];
          for (int j = m + 1; j <= n; ++j) {
            const double bmj = bm[j - 1];
            if (bmj != 0.0) acc += bmj * fay[j - 1][base + i];
          }
        } else {
          for (int j = m + 1; j <= n; ++j) {
            const double bmj = family.b(m, j, tau);
            if (bmj != 0.0) acc += bmj * fay[j - 1][base + i];
          }
        }
        g[i] = acc;
      }
      double I_full = 0.0;
      for (int i = 0; i < q; ++i) {
        double acc = 0.0;
        const double* S = &rule.partial[static_cast<std::size_t>(i) * q];
        for (int j = 0; j < q; ++j) acc += S[j] * d[j];
        I[i] = half * acc;
        E[i] = std::exp(I[i]);
        I_full += rule.weights[i] * d[i];
      }
      I_full *= half;
      double end_acc = 0.0;
      for (int i = 0; i < q; ++i) {
        double acc = 0.0;
        const double* S = &rule.partial[static_cast<std::size_t>(i) * q];
        for (int j = 0; j < q; ++j) acc += S[j] * (E[j] * g[j]);
        ynode[i] = (y_alpha + half * acc) / E[i];
        end_acc += rule.weights[i] * E[i] * g[i];
      }
      y_alpha = (y_alpha + half * end_acc) * std::exp(-I_full);
      for (int i = 0; i < q; ++i) {
        const double tau = times[base + i];
        fay_m[base + i] = family.a(m, tau) * ynode[i];
      }
    }
    result[m - 1] = y_alpha;
  }
  return result;
}

}  // namespace

// ---- public API ---------------------------------------------------------------------

std::string_view method_name(SolveMethod method) {
  switch (method) {
    case SolveMethod::adaptive_rk:
      return "adaptive_rk";
    case SolveMethod::voc_recursion:
      return "voc_recursion";
    case SolveMethod::product_oracle:
      return "product_oracle";
  }
  return "unknown";
}

SolveMethod method_from_name(std::string_view name) {
  if (name == "adaptive_rk") return SolveMethod::adaptive_rk;
  if (name == "voc_recursion") return SolveMethod::voc_recursion;
  if (name == "product_oracle") return SolveMethod::product_oracle;
  throw std::invalid_argument("unknown solver method: " + std::string(name));
}

void SolverConfig::validate() const {
  require(std::isfinite(rel_tol) && rel_tol > 0.0, "solver: rel_tol must be positive");
  require(std::isfinite(abs_tol) && abs_tol > 0.0, "solver: abs_tol must be positive");
  require(std::isfinite(max_step) && max_step > 0.0, "solver: max_step must be positive");
  require(std::isfinite(min_step) && min_step > 0.0 && min_step <= max_step,
          "solver: need 0 < min_step <= max_step");
  require(quadrature_points >= 2 && quadrature_points <= 16,
          "solver: quadrature_points must lie in [2, 16]");
}

std::vector<double> column_voc(const CoefficientFamily& family, int n, double s, double t,
                               const SolverConfig& cfg, SolverStats* stats) {
  cfg.validate();
  require(n >= 1, "column_voc: column index must be >= 1");
  family.check_time(s);
  family.check_time(t);
  require(t >= s, "column_voc: need t >= s");

  std::vector<double> col(static_cast<std::size_t>(n), 0.0);
  if (t == s) {
    col[n - 1] = 1.0;
    return col;
  }

  const GaussRule& rule = gauss_rule(cfg.quadrature_points);
  long panels = std::clamp(static_cast<long>(std::ceil((t - s) / cfg.max_step)), 1L, kMaxPanels);
  std::vector<double> prev = voc_pass(family, n, s, t, static_cast<int>(panels), rule);
  for (;;) {
    if (panels * 2 > kMaxPanels)
      throw SolverError("panel refinement exceeded " + std::to_string(kMaxPanels) +
                        " panels before reaching abs_tol; increase quadrature_points or abs_tol");
    panels *= 2;
    std::vector<double> cur = voc_pass(family, n, s, t, static_cast<int>(panels), rule);
    double diff = 0.0;
    for (int m = 0; m < n; ++m) {
      const double d = std::fabs(cur[m] - prev[m]);
      if (!std::isfinite(cur[m]) || !std::isfinite(d))
        diff = std::numeric_limits<double>::infinity();
      else
        diff = std::max(diff, d);
    }
    prev = std::move(cur);
    if (diff < cfg.abs_tol) break;
  }
  if (stats) stats->panels += panels;
  for (double v : prev)
    if (!std::isfinite(v)) throw SolverError("non-finite column value in the integral recursion");
  return prev;
}

namespace {

// Shared incremental product-of-exponentials walk; invokes sink after each
// segment boundary in `times`.  forced_steps > 0 fixes the per-segment step
// count; otherwise it derives from max_step.
void product_walk(const CoefficientFamily& family, double s, std::span<const double> times, int n,
                  double max_step, int forced_steps, long* exp_evals,
                  const std::function<void(std::size_t, const Eigen::MatrixXd&)>& sink) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd gen(n, n);
  std::vector<double> row(static_cast<std::size_t>(n));
  double t_prev = s;
  for (std::size_t seg = 0; seg < times.size(); ++seg) {
    const double t_end = times[seg];
    const double span = t_end - t_prev;
    if (span > 0.0) {
      const int steps =
          forced_steps > 0 ? forced_steps
                           : static_cast<int>(std::min<double>(
                                 1 << 24, std::max(1.0, std::ceil(span / max_step))));
      const double h = span / steps;
      for (int k = 0; k < steps; ++k) {
        const double tk = t_prev + h * (static_cast<double>(k) + 0.5);
        gen.setZero();
        for (int m = 1; m <= n; ++m) gen(m - 1, m - 1) = -family.a(m, tk);
        for (int j = 2; j <= n; ++j) {
          const double aj = family.a(j, tk);
          if (aj == 0.0) continue;
          family.daughter_row(j, tk, row);
          for (int m = 1; m < j; ++m) gen(m - 1, j - 1) = aj * row[m - 1];
        }
        acc = ((h * gen).exp() * acc).eval();
        if (exp_evals) ++*exp_evals;
      }
    }
    sink(seg, acc);
    t_prev = t_end;
  }
}

TriangularMatrix matrix_from_dense(const Eigen::MatrixXd& dense, int n, double s, double t,
                                   bool rescaled) {
  TriangularMatrix m(n, s, t, rescaled);
  const double scale = rescaled ? std::exp(-(t - s)) : 1.0;
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= j; ++i) m.set(i, j, scale * dense(i - 1, j - 1));
  return m;
}

}  // namespace

TriangularMatrix product_oracle(const CoefficientFamily& family, double s, double t, int n,
                                int steps) {
  require(n >= 1, "product_oracle: size must be >= 1");
  require(steps >= 1, "product_oracle: steps must be >= 1");
  family.check_time(s);
  family.check_time(t);
  require(t >= s, "product_oracle: need t >= s");
  if (t == s) return TriangularMatrix::identity(n, s, t, false);

  std::array<double, 1> times{t};
  TriangularMatrix out(n, s, t, false);
  product_walk(family, s, times, n, 0.0, steps, nullptr,
               [&](std::size_t, const Eigen::MatrixXd& acc) {
                 out = matrix_from_dense(acc, n, s, t, false);
               });
  return out;
}

std::vector<TriangularMatrix> evolution_matrices(const CoefficientFamily& family, double s,
                                                 std::span<const double> times, int n,
                                                 const SolverConfig& cfg, bool rescaled,
                                                 int workers) {
  cfg.validate();
  require(n >= 1, "evolution_matrices: size must be >= 1");
  require(!times.empty(), "evolution_matrices: no output times");
  family.check_time(s);
  double prev = s;
  for (std::size_t i = 0; i < times.size(); ++i) {
    family.check_time(times[i]);
    require(times[i] >= s, "evolution_matrices: times must be >= s");
    require(i == 0 || times[i] > prev, "evolution_matrices: times must be strictly increasing");
    prev = times[i];
  }

  std::vector<TriangularMatrix> result;
  result.reserve(times.size());
  for (double t : times) result.emplace_back(n, s, t, rescaled);

  switch (cfg.method) {
    case SolveMethod::adaptive_rk: {
      parallel_for(n, workers, [&](int c) {
        const int col = c + 1;
        std::vector<double> y0(static_cast<std::size_t>(col), 0.0);
        y0[col - 1] = 1.0;
        GeneratorWorkspace ws;
        auto rhs = [&family, &ws](double tt, std::span<const double> y, std::span<double> dy) {
          apply_G_into(family, tt, y, dy, ws);
        };
        std::vector<double> outs;
        std::vector<std::size_t> out_slot;
        for (std::size_t i = 0; i < times.size(); ++i) {
          if (times[i] == s) {
            result[i].set(col, col, 1.0);
          } else {
            outs.push_back(times[i]);
            out_slot.push_back(i);
          }
        }
        if (outs.empty()) return;
        SolverStats stats;
        dopri5(rhs, s, y0, outs, cfg,
               [&](std::size_t oi, double tt, std::span<const double> y) {
                 const std::size_t slot = out_slot[oi];
                 const double scale = rescaled ? std::exp(-(tt - s)) : 1.0;
                 for (int i = 1; i <= col; ++i) result[slot].set(i, col, scale * y[i - 1]);
               },
               stats);
      });
      break;
    }
    case SolveMethod::voc_recursion: {
      const int tasks = n * static_cast<int>(times.size());
      parallel_for(tasks, workers, [&](int task) {
        const int col = task / static_cast<int>(times.size()) + 1;
        const std::size_t slot = static_cast<std::size_t>(task) % times.size();
        const double t = times[slot];
        if (t == s) {
          result[slot].set(col, col, 1.0);
          return;
        }
        std::vector<double> v = column_voc(family, col, s, t, cfg);
        const double scale = rescaled ? 1.0 : std::exp(t - s);
        for (int i = 1; i <= col; ++i) result[slot].set(i, col, scale * v[i - 1]);
      });
      break;
    }
    case SolveMethod::product_oracle: {
      product_walk(family, s, times, n, cfg.max_step, 0, nullptr,
                   [&](std::size_t seg, const Eigen::MatrixXd& acc) {
                     result[seg] = matrix_from_dense(acc, n, s, times[seg], rescaled);
                   });
      break;
    }
  }
  return result;
}

TriangularMatrix evolution_matrix(const CoefficientFamily& family, double s, double t, int n,
                                  const SolverConfig& cfg, bool rescaled, int workers) {
  if (t == s) return TriangularMatrix::identity(n, s, t, rescaled);
  std::array<double, 1> times{t};
  return std::move(evolution_matrices(family, s, times, n, cfg, rescaled, workers).front());
}

Trajectory integrate(const CoefficientFamily& family, std::span<const double> u0, double s,
                     std::span<const double> output_times, const SolverConfig& cfg) {
  cfg.validate();
  require(!u0.empty(), "integrate: empty initial state");
  for (double v : u0) require(std::isfinite(v), "integrate: initial state must be finite");
  family.check_time(s);
  double prev = s;
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    family.check_time(output_times[i]);
    require(output_times[i] >= s, "integrate: output times must be >= s");
    require(i == 0 || output_times[i] > prev, "integrate: output times must be strictly increasing");
    prev = output_times[i];
  }

  const int n = static_cast<int>(u0.size());
  Trajectory traj;
  traj.states.push_back(StateVector{s, std::vector<double>(u0.begin(), u0.end())});

  std::vector<double> outs;
  for (double t : output_times)
    if (t > s) outs.push_back(t);
  if (outs.empty()) return traj;

  switch (cfg.method) {
    case SolveMethod::adaptive_rk: {
      GeneratorWorkspace ws;
      auto rhs = [&family, &ws](double tt, std::span<const double> y, std::span<double> dy) {
        apply_G_into(family, tt, y, dy, ws);
      };
      dopri5(rhs, s, u0, outs, cfg,
             [&](std::size_t, double tt, std::span<const double> y) {
               traj.states.push_back(StateVector{tt, std::vector<double>(y.begin(), y.end())});
             },
             traj.stats);
      break;
    }
    case SolveMethod::voc_recursion: {
      std::vector<double> u(u0.begin(), u0.end());
      double t_prev = s;
      for (double t_end : outs) {
        std::vector<double> next(static_cast<std::size_t>(n), 0.0);
        const double growth = std::exp(t_end - t_prev);
        for (int col = 1; col <= n; ++col) {
          if (u[col - 1] == 0.0) continue;
          std::vector<double> v = column_voc(family, col, t_prev, t_end, cfg, &traj.stats);
          kernels::axpy(growth * u[col - 1], v, std::span<double>(next).first(col));
        }
        u = std::move(next);
        traj.states.push_back(StateVector{t_end, u});
        t_prev = t_end;
      }
      break;
    }
    case SolveMethod::product_oracle: {
      product_walk(family, s, outs, n, cfg.max_step, 0, &traj.stats.exp_evals,
                   [&](std::size_t seg, const Eigen::MatrixXd& acc) {
                     Eigen::Map<const Eigen::VectorXd> v0(u0.data(), n);
                     Eigen::VectorXd ut = acc * v0;
                     traj.states.push_back(
                         StateVector{outs[seg], std::vector<double>(ut.data(), ut.data() + n)});
                   });
      break;
    }
  }
  return traj;
}

double compose_check(const CoefficientFamily& family, double s, double r, double t, int n,
                     const SolverConfig& cfg, std::span<const double> w) {
  require(s <= r && r <= t, "compose_check: need s <= r <= t");
  TriangularMatrix u_ts = evolution_matrix(family, s, t, n, cfg);
  TriangularMatrix u_rs = evolution_matrix(family, s, r, n, cfg);
  TriangularMatrix u_tr = evolution_matrix(family, r, t, n, cfg);
  TriangularMatrix prod = multiply(u_tr, u_rs);
  std::vector<double> diff(prod.data().begin(), prod.data().end());
  const auto ref = u_ts.data();
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= ref[i];
  return opnorm_weighted(diff, n, w);
}

}  // namespace fragsim
