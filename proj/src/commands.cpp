#include "fragsim/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <sstream>

#include "fragsim/diagnostics.hpp"
#include "fragsim/serialize.hpp"

namespace fragsim {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPositivityTol = 1e-12;
constexpr double kMassDriftTol = 1e-10;
constexpr double kDecompSlackTol = 1e-12;

struct Built {
  CoefficientFamily family;
  int truncation = 0;
  std::vector<double> check_grid;  // assumption-sampling times
  WeightCertificate cert;
};

// Weight certificates carry one extra index so the shifted system can reuse
// them without reconstruction.
Built build_all(const RunConfig& config) {
  Built built;
  built.family = config.family.build();
  built.truncation = config.truncation;
  const double horizon = built.family.horizon();
  const double end = std::isfinite(horizon) ? std::min(config.time.end, horizon)
                                            : config.time.end;
  built.check_grid = linspace(config.time.start, end, config.check.grid_points);

  const int n_cert = config.truncation + 1;
  switch (config.weight.kind) {
    case WeightSpec::Kind::iterative:
      built.cert = construct_weight(built.family, config.weight.kappa_target, n_cert,
                                    built.check_grid);
      break;
    case WeightSpec::Kind::power:
      built.cert = certify_weight(power_weight(config.weight.p, n_cert), built.family,
                                  built.check_grid, WeightConstruction::power(config.weight.p));
      break;
    case WeightSpec::Kind::explicit_values:
      built.cert = certify_weight(config.weight.values, built.family, built.check_grid,
                                  WeightConstruction::external());
      break;
  }
  return built;
}

std::span<const double> weight_head(const Built& built) {
  return std::span<const double>(built.cert.w.data(),
                                 static_cast<std::size_t>(built.truncation));
}

void write_out(const fs::path& out_dir, const std::string& name, const std::string& content) {
  fs::create_directories(out_dir);
  write_text_file((out_dir / name).string(), content);
}

void print_summary(const json& j) { std::cout << dump_json(j); }

void print_error(const std::string& code, const std::string& message, json detail = nullptr) {
  json j{{"error", json{{"code", code}, {"message", message}, {"detail", detail}}}};
  std::cout << dump_json(j);
}

// Uniform doubles in [-1, 1] from raw 64-bit draws; independent of library
// distribution implementations so byte-identical across toolchains.
double uniform_pm1(std::uint64_t raw) {
  const double u = static_cast<double>(raw >> 11) * 0x1.0p-53;  // [0, 1)
  return 2.0 * u - 1.0;
}

}  // namespace

int cmd_check(const RunConfig& config, const fs::path& out_dir) {
  Built built = build_all(config);
  const int n = built.truncation;

  NonnegativityReport nonneg = check_nonnegativity(built.family, n, built.check_grid);
  MassRuleReport mass =
      check_mass_rule(built.family, n, built.check_grid, config.check.lambda_tol);
  HolderCertificate holder = estimate_holder(built.family, weight_head(built),
                                             config.check.sigma, n, built.check_grid);

  // Spot check: the generator increments against the certified constants, at
  // the widest grid pair with tau in the middle.
  const double s0 = built.check_grid.front();
  const double t0 = built.check_grid.back();
  const double tau0 = built.check_grid[built.check_grid.size() / 2];
  HolderOpnormCheck opcheck =
      check_holder_opnorm(built.family, weight_head(built), holder, s0, t0, tau0, n);

  const bool pass = nonneg.pass && built.cert.certified &&
                    holder.status == HolderStatus::certified_on_grid && opcheck.pass;

  json report;
  report["schema_version"] = kSchemaVersion;
  report["rate_nonnegativity"] = nonnegativity_json(nonneg);
  report["mass_rule"] = mass_rule_json(mass);
  report["weight"] = weight_certificate_json(built.cert);
  report["holder"] = holder_json(holder);
  report["holder_opnorm_check"] = json{{"s", s0},
                                       {"t", t0},
                                       {"tau", tau0},
                                       {"measured", opcheck.measured},
                                       {"bound", opcheck.bound},
                                       {"pass", opcheck.pass}};
  report["pass"] = pass;
  write_out(out_dir, "check_report.json", dump_json(report));

  if (!pass) {
    print_error("certification_failed", "one or more assumption checks failed",
                json{{"rate_nonnegativity", nonneg.pass},
                     {"weight_certified", built.cert.certified},
                     {"holder", holder.status == HolderStatus::certified_on_grid},
                     {"holder_opnorm", opcheck.pass}});
    return 1;
  }
  print_summary(json{{"command", "check"},
                     {"pass", true},
                     {"mass_mode", std::string(mass_mode_name(mass.mode))},
                     {"kappa_hat", built.cert.kappa_hat},
                     {"c1", holder.c1},
                     {"c2", holder.c2}});
  return 0;
}

int cmd_weights(const RunConfig& config, const fs::path& out_dir) {
  Built built = build_all(config);
  write_out(out_dir, "weight_certificate.json", dump_json(weight_certificate_json(built.cert)));
  if (!built.cert.certified) {
    json detail = nullptr;
    if (built.cert.violation)
      detail = json{{"j", built.cert.violation->j},
                    {"n", built.cert.violation->n},
                    {"t", built.cert.violation->t},
                    {"ratio", built.cert.violation->ratio}};
    print_error("weight_not_certified", "weight fails the contraction or floor condition",
                detail);
    return 1;
  }
  print_summary(json{{"command", "weights"},
                     {"certified", true},
                     {"kappa_hat", built.cert.kappa_hat},
                     {"size", built.cert.size()}});
  return 0;
}

int cmd_simulate(const RunConfig& config, const fs::path& out_dir) {
  Built built = build_all(config);
  const int n = built.truncation;
  std::vector<double> u0 = config.initial.materialize(n);
  std::vector<double> grid = config.time.times();

  Trajectory traj = integrate(built.family, u0, config.time.start, grid, config.solver);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj, weight_head(built));
  write_out(out_dir, "trajectory.csv", csv.str());
  write_out(out_dir, "solver_stats.json", dump_json(solver_stats_json(traj.stats)));

  const bool nonneg_initial = std::all_of(u0.begin(), u0.end(), [](double v) { return v >= 0.0; });
  double min_component = std::numeric_limits<double>::infinity();
  for (const auto& state : traj.states)
    for (double v : state.u) min_component = std::min(min_component, v);

  MassRuleReport mass = check_mass_rule(built.family, n, built.check_grid, config.check.lambda_tol);
  const double mass0 = traj.states.front().mass();
  double max_drift = 0.0;
  if (mass.mode == MassMode::conserving && mass0 != 0.0) {
    for (const auto& state : traj.states)
      max_drift = std::max(max_drift, std::fabs(state.mass() - mass0) / std::fabs(mass0));
  }

  const bool positivity_ok = !nonneg_initial || min_component >= -kPositivityTol;
  const bool mass_ok = mass.mode != MassMode::conserving || max_drift <= kMassDriftTol;

  if (!positivity_ok || !mass_ok) {
    print_error("invariant_violated", "trajectory violates a structural invariant",
                json{{"min_component", min_component}, {"mass_drift", max_drift}});
    return 1;
  }
  print_summary(json{{"command", "simulate"},
                     {"states", traj.states.size()},
                     {"min_component", min_component},
                     {"mass_mode", std::string(mass_mode_name(mass.mode))},
                     {"mass_drift", max_drift},
                     {"final_wnorm", traj.states.back().weighted_norm(weight_head(built))}});
  return 0;
}

int cmd_matrix(const RunConfig& config, const fs::path& out_dir, std::optional<double> s_override,
               std::optional<double> t_override) {
  Built built = build_all(config);
  const int n = built.truncation;
  const double s = s_override.value_or(config.time.start);
  const double t = t_override.value_or(config.time.end);
  if (!(s >= 0.0) || t < s) throw ConfigError("matrix: need 0 <= s <= t");
  if (std::isfinite(built.family.horizon()) && t > built.family.horizon())
    throw ConfigError("matrix: t exceeds the family horizon");

  TriangularMatrix u =
      evolution_matrix(built.family, s, t, n, config.solver, false, config.workers);
  const double r = 0.5 * (s + t);
  const double defect = compose_check(built.family, s, r, t, n, config.solver,
                                      weight_head(built));

  json mj = matrix_json(u);
  mj["compose_defect"] = defect;
  mj["compose_r"] = r;
  write_out(out_dir, "matrix.json", dump_json(mj));
  std::ostringstream csv;
  write_matrix_csv(csv, u);
  write_out(out_dir, "matrix.csv", csv.str());

  print_summary(json{{"command", "matrix"},
                     {"n", n},
                     {"s", s},
                     {"t", t},
                     {"opnorm", opnorm_weighted(u, weight_head(built))},
                     {"compose_defect", defect}});
  return 0;
}

int cmd_decay(const RunConfig& config, const fs::path& out_dir) {
  Built built = build_all(config);
  const int n = built.truncation;
  if (!built.cert.certified) {
    print_error("weight_not_certified", "decay envelopes need a certified weight", nullptr);
    return 1;
  }
  std::vector<double> grid = config.time.times();

  DecayReport opnorm = check_opnorm_decay(built.family, built.cert, config.time.start, n, grid,
                                          config.solver, config.workers);
  std::vector<double> u0 = config.initial.materialize(n);
  DecayReport monomer =
      check_monomer_decay(built.family, built.cert, u0, config.time.start, grid, config.solver);

  // Randomised mass-free decomposition bound.
  std::uint64_t state = config.seed ? config.seed : 0x9e3779b97f4a7c15ULL;
  auto next_raw = [&state]() {  // splitmix64
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  double min_slack = std::numeric_limits<double>::infinity();
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int sample = 0; sample < config.check.decomp_samples; ++sample) {
    double tail_moment = 0.0;
    for (int i = 2; i <= n; ++i) {
      g[i - 1] = uniform_pm1(next_raw());
      tail_moment += static_cast<double>(i) * g[i - 1];
    }
    g[0] = -tail_moment;  // first moment vanishes by construction
    DecompBound bound = decomp_bound_check(g, weight_head(built));
    min_slack = std::min(min_slack, bound.rhs - bound.lhs);
  }

  std::ostringstream c1, c2;
  write_decay_csv(c1, opnorm);
  write_decay_csv(c2, monomer);
  write_out(out_dir, "decay_opnorm.csv", c1.str());
  write_out(out_dir, "decay_monomer.csv", c2.str());
  json report{{"schema_version", kSchemaVersion},
              {"opnorm", decay_report_json(opnorm)},
              {"monomer", decay_report_json(monomer)},
              {"decomp", json{{"samples", config.check.decomp_samples},
                              {"min_slack", min_slack},
                              {"pass", min_slack >= -kDecompSlackTol}}}};
  write_out(out_dir, "decay_report.json", dump_json(report));

  const bool pass = opnorm.pass && (!monomer.applicable || monomer.pass) &&
                    min_slack >= -kDecompSlackTol;
  if (!pass) {
    print_error("envelope_violated", "a decay envelope or decomposition bound failed",
                json{{"opnorm_pass", opnorm.pass},
                     {"monomer_applicable", monomer.applicable},
                     {"monomer_pass", monomer.pass},
                     {"decomp_min_slack", min_slack}});
    return 1;
  }
  print_summary(json{{"command", "decay"},
                     {"opnorm_margin", opnorm.margin},
                     {"monomer_applicable", monomer.applicable},
                     {"monomer_margin", monomer.applicable ? json(monomer.margin) : json(nullptr)},
                     {"decomp_min_slack", min_slack}});
  return 0;
}

}  // namespace fragsim
