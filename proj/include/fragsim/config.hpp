#pragma once

// Run configuration: a strict JSON schema with explicit schema_version.
// Unknown keys and type mismatches are rejected with the offending path so
// configs fail loudly instead of silently drifting.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fragsim/coefficients.hpp"
#include "fragsim/solver.hpp"
#include "fragsim/weights.hpp"

namespace fragsim {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AffineRateSpec {
  IndexGenerator c = IndexGenerator::constant(0.0);
  IndexGenerator d = IndexGenerator::constant(0.0);
  PhiSpec phi;
  bool zero_monomer_rate = false;

  RateModel to_model() const { return RateModel{c, d, phi, zero_monomer_rate}; }
};

struct FamilyConfig {
  std::string kind = "power_law";  // power_law | becker_doring | affine | custom
  double nu = 0.0;
  double b_scale = 1.0;
  AffineRateSpec a;
  std::vector<double> a_values;                  // custom
  std::vector<CustomTable::Entry> b_entries;     // custom
  double horizon = kUnboundedHorizon;

  CoefficientFamily build() const;  // throws ConfigError on inconsistency
};

struct InitialDataSpec {
  enum class Kind { basis, geometric, explicit_values };
  Kind kind = Kind::basis;
  int index = 1;                 // basis
  double ratio = 0.5;            // geometric
  std::optional<double> mass;    // geometric: rescale to this first moment
  std::vector<double> values;    // explicit

  std::vector<double> materialize(int n) const;  // throws ConfigError
};

struct WeightSpec {
  enum class Kind { iterative, power, explicit_values };
  Kind kind = Kind::iterative;
  double kappa_target = 0.5;
  double p = 1.0;
  std::vector<double> values;
};

struct TimeGrid {
  double start = 0.0;
  double end = 1.0;
  int outputs = 2;

  std::vector<double> times() const;  // linspace(start, end, outputs), exact endpoints
};

struct CheckSpec {
  int grid_points = 9;
  double sigma = 1.0;
  double lambda_tol = 1e-10;
  int decomp_samples = 1000;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  FamilyConfig family;
  int truncation = 2;
  InitialDataSpec initial;
  WeightSpec weight;
  SolverConfig solver;
  TimeGrid time;
  CheckSpec check;
  std::uint64_t seed = 0;
  int workers = 1;
};

RunConfig parse_run_config(const nlohmann::json& j);      // throws ConfigError
RunConfig load_run_config_file(const std::string& path);  // parse + schema, throws ConfigError

std::vector<double> linspace(double a, double b, int count);

}  // namespace fragsim
