#include "fragsim/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fragsim/kernels.hpp"

namespace fragsim {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void require_weight(std::span<const double> w, int n, const char* who) {
  require(n >= 1, std::string(who) + ": size must be >= 1");
  require(w.size() >= static_cast<std::size_t>(n), std::string(who) + ": weight too short");
  for (int i = 0; i < n; ++i)
    require(std::isfinite(w[i]) && w[i] > 0.0, std::string(who) + ": weight entries must be positive and finite");
}

void require_grid(std::span<const double> grid, const CoefficientFamily& family,
                  const char* who) {
  require(!grid.empty(), std::string(who) + ": time grid empty");
  for (double t : grid) family.check_time(t);
}

}  // namespace

std::string_view construction_name(WeightConstruction::Kind kind) {
  switch (kind) {
    case WeightConstruction::Kind::iterative:
      return "iterative";
    case WeightConstruction::Kind::power:
      return "power";
    case WeightConstruction::Kind::external:
      return "external";
  }
  return "unknown";
}

KappaResult certify_kappa(std::span<const double> weight, const CoefficientFamily& family,
                          int n, std::span<const double> grid) {
  require_weight(weight, n, "certify_kappa");
  require_grid(grid, family, "certify_kappa");

  KappaResult result;
  for (int i = 1; i <= n; ++i) {
    if (weight[i - 1] < static_cast<double>(i)) {
      result.floor_ok = false;
      result.violation = KappaViolation{0, i, 0.0, weight[i - 1]};
      break;
    }
  }

  std::vector<double> row(std::max(0, n - 1));
  for (double t : grid) {
    for (int j = 2; j <= n; ++j) {
      family.daughter_row(j, t, row);
      const double ratio =
          kernels::weighted_abs_sum(weight.first(j - 1), std::span<const double>(row).first(j - 1)) /
          weight[j - 1];
      if (ratio > result.kappa_hat) {
        result.kappa_hat = ratio;
        result.argmax_j = j;
        result.argmax_t = t;
      }
    }
  }
  result.certified = result.floor_ok && result.kappa_hat < 1.0 && std::isfinite(result.kappa_hat);
  if (!result.certified && !result.violation)
    result.violation = KappaViolation{result.argmax_j, 0, result.argmax_t, result.kappa_hat};
  return result;
}

WeightCertificate certify_weight(std::vector<double> w, const CoefficientFamily& family,
                                 std::span<const double> grid,
                                 WeightConstruction construction) {
  const int n = static_cast<int>(w.size());
  KappaResult res = certify_kappa(w, family, n, grid);
  WeightCertificate cert;
  cert.w = std::move(w);
  cert.kappa_hat = res.kappa_hat;
  cert.certified = res.certified;
  cert.violation = res.violation;
  cert.grid = WeightGrid{n, std::vector<double>(grid.begin(), grid.end())};
  cert.construction = construction;
  return cert;
}

WeightCertificate construct_weight(const CoefficientFamily& family, double kappa_target, int n,
                                   std::span<const double> grid) {
  require(kappa_target > 0.0 && kappa_target < 1.0,
          "construct_weight: kappa_target must lie in (0, 1)");
  require(n >= 1, "construct_weight: size must be >= 1");
  require_grid(grid, family, "construct_weight");

  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  w[0] = 1.0;
  std::vector<double> row(std::max(0, n - 1));
  for (int j = 2; j <= n; ++j) {
    double sup = 0.0;
    for (double t : grid) {
      family.daughter_row(j, t, row);
      const double s = kernels::weighted_abs_sum(std::span<const double>(w).first(j - 1),
                                                 std::span<const double>(row).first(j - 1));
      sup = std::max(sup, s);
    }
    require(std::isfinite(sup), "construct_weight: daughter sums not finite on the grid");
    w[j - 1] = std::max(static_cast<double>(j), sup / kappa_target);
  }
  return certify_weight(std::move(w), family, grid, WeightConstruction::iterative(kappa_target));
}

std::vector<double> power_weight(double p, int n) {
  require(n >= 1, "power_weight: size must be >= 1");
  require(p >= 1.0, "power_weight: p must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) w[i - 1] = std::pow(static_cast<double>(i), p);
  return w;
}

double powerlaw_kappa_bound(double nu, double p) {
  require(nu >= -1.0, "powerlaw_kappa_bound: nu must be >= -1");
  require(p >= 1.0, "powerlaw_kappa_bound: p must be >= 1");
  return (nu + 2.0) * std::pow(2.0, nu + 2.0) / (p + nu + 1.0);
}

std::vector<double> shift_weight(std::span<const double> w) {
  require(w.size() >= 2, "shift_weight: need at least two entries");
  return std::vector<double>(w.begin() + 1, w.end());
}

}  // namespace fragsim
