#include "fragsim/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

namespace fragsim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) fail(path, "unknown key '" + key + "'");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

const json& get_required(const json& obj, const std::string& path, const char* key) {
  const json* p = find(obj, key);
  if (!p) fail(path, std::string("missing required key '") + key + "'");
  return *p;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> as_number_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

double opt_number(const json& obj, const std::string& path, const char* key, double dflt) {
  const json* p = find(obj, key);
  return p ? as_number(*p, path + "." + key) : dflt;
}

int opt_int(const json& obj, const std::string& path, const char* key, int dflt) {
  const json* p = find(obj, key);
  return p ? as_int(*p, path + "." + key) : dflt;
}

bool opt_bool(const json& obj, const std::string& path, const char* key, bool dflt) {
  const json* p = find(obj, key);
  return p ? as_bool(*p, path + "." + key) : dflt;
}

IndexGenerator parse_generator(const json& j, const std::string& path) {
  expect_object(j, path);
  check_keys(j, path, {"kind", "k", "q"});
  const std::string kind = as_string(get_required(j, path, "kind"), path + ".kind");
  const double k = as_number(get_required(j, path, "k"), path + ".k");
  if (!(std::isfinite(k) && k >= 0.0)) fail(path + ".k", "must be finite and >= 0");
  if (kind == "const") return IndexGenerator::constant(k);
  if (kind == "linear") return IndexGenerator::linear(k);
  if (kind == "power") {
    const double q = as_number(get_required(j, path, "q"), path + ".q");
    if (!std::isfinite(q)) fail(path + ".q", "must be finite");
    return IndexGenerator::power(k, q);
  }
  fail(path + ".kind", "expected 'const', 'linear' or 'power'");
}

AffineRateSpec parse_rate(const json& j, const std::string& path) {
  expect_object(j, path);
  check_keys(j, path, {"c", "d", "phi", "zero_monomer_rate"});
  AffineRateSpec spec;
  if (const json* p = find(j, "c")) spec.c = parse_generator(*p, path + ".c");
  if (const json* p = find(j, "d")) spec.d = parse_generator(*p, path + ".d");
  if (const json* p = find(j, "phi")) {
    const std::string pp = path + ".phi";
    expect_object(*p, pp);
    check_keys(*p, pp, {"gamma", "delta", "omega"});
    spec.phi.gamma = opt_number(*p, pp, "gamma", 1.0);
    spec.phi.delta = opt_number(*p, pp, "delta", 0.0);
    spec.phi.omega = opt_number(*p, pp, "omega", 1.0);
    try {
      spec.phi.validate();
    } catch (const std::invalid_argument& e) {
      fail(pp, e.what());
    }
  }
  spec.zero_monomer_rate = opt_bool(j, path, "zero_monomer_rate", false);
  return spec;
}

FamilyConfig parse_family(const json& j, const std::string& path) {
  expect_object(j, path);
  check_keys(j, path, {"kind", "nu", "b_scale", "a", "a_values", "b_entries", "horizon"});
  FamilyConfig fc;
  fc.kind = as_string(get_required(j, path, "kind"), path + ".kind");

  if (const json* p = find(j, "horizon")) {
    fc.horizon = as_number(*p, path + ".horizon");
    if (!(fc.horizon > 0.0)) fail(path + ".horizon", "must be positive (or null for unbounded)");
  }

  if (fc.kind == "power_law" || fc.kind == "becker_doring" || fc.kind == "affine") {
    fc.a = parse_rate(get_required(j, path, "a"), path + ".a");
    if (fc.kind == "power_law") {
      fc.nu = as_number(get_required(j, path, "nu"), path + ".nu");
      if (!(std::isfinite(fc.nu) && fc.nu >= -1.0)) fail(path + ".nu", "must be >= -1");
      fc.b_scale = opt_number(j, path, "b_scale", 1.0);
      if (!(std::isfinite(fc.b_scale) && fc.b_scale >= 0.0))
        fail(path + ".b_scale", "must be >= 0");
    } else {
      if (find(j, "nu")) fail(path + ".nu", "only valid for kind 'power_law'");
      if (find(j, "b_scale")) fail(path + ".b_scale", "only valid for kind 'power_law'");
    }
    if (find(j, "a_values")) fail(path + ".a_values", "only valid for kind 'custom'");
    if (find(j, "b_entries")) fail(path + ".b_entries", "only valid for kind 'custom'");
  } else if (fc.kind == "custom") {
    if (find(j, "a")) fail(path + ".a", "only valid for built-in kinds");
    if (find(j, "nu")) fail(path + ".nu", "only valid for kind 'power_law'");
    if (find(j, "b_scale")) fail(path + ".b_scale", "only valid for kind 'power_law'");
    fc.a_values = as_number_list(get_required(j, path, "a_values"), path + ".a_values");
    if (const json* p = find(j, "b_entries")) {
      const std::string pp = path + ".b_entries";
      if (!p->is_array()) fail(pp, "expected an array");
      for (std::size_t i = 0; i < p->size(); ++i) {
        const std::string ep = pp + "[" + std::to_string(i) + "]";
        const json& e = (*p)[i];
        expect_object(e, ep);
        check_keys(e, ep, {"n", "j", "value"});
        CustomTable::Entry entry;
        entry.n = as_int(get_required(e, ep, "n"), ep + ".n");
        entry.j = as_int(get_required(e, ep, "j"), ep + ".j");
        entry.value = as_number(get_required(e, ep, "value"), ep + ".value");
        if (entry.n < 1 || entry.j < 1) fail(ep, "indices must be >= 1");
        fc.b_entries.push_back(entry);
      }
    }
  } else {
    fail(path + ".kind",
         "expected 'power_law', 'becker_doring', 'affine' or 'custom', got '" + fc.kind + "'");
  }
  return fc;
}

InitialDataSpec parse_initial(const json& j, const std::string& path) {
  expect_object(j, path);
  check_keys(j, path, {"kind", "index", "ratio", "mass", "values"});
  InitialDataSpec spec;
  const std::string kind = as_string(get_required(j, path, "kind"), path + ".kind");
  if (kind == "basis") {
    spec.kind = InitialDataSpec::Kind::basis;
    spec.index = as_int(get_required(j, path, "index"), path + ".index");
    if (spec.index < 1) fail(path + ".index", "must be >= 1");
  } else if (kind == "geometric") {
    spec.kind = InitialDataSpec::Kind::geometric;
    spec.ratio = as_number(get_required(j, path, "ratio"), path + ".ratio");
    if (!(spec.ratio > 0.0 && spec.ratio < 1.0)) fail(path + ".ratio", "must lie in (0, 1)");
    if (const json* p = find(j, "mass")) {
      spec.mass = as_number(*p, path + ".mass");
      if (!(std::isfinite(*spec.mass) && *spec.mass > 0.0)) fail(path + ".mass", "must be > 0");
    }
  } else if (kind == "explicit") {
    spec.kind = InitialDataSpec::Kind::explicit_values;
    spec.values = as_number_list(get_required(j, path, "values"), path + ".values");
    for (double v : spec.values)
      if (!std::isfinite(v)) fail(path + ".values", "entries must be finite");
  } else {
    fail(path + ".kind", "expected 'basis', 'geometric' or 'explicit'");
  }
  return spec;
}

WeightSpec parse_weight(const json& j, const std::string& path) {
  expect_object(j, path);
  check_keys(j, path, {"kind", "kappa_target", "p", "values"});
  WeightSpec spec;
  const std::string kind = as_string(get_required(j, path, "kind"), path + ".kind");
  if (kind == "iterative") {
    spec.kind = WeightSpec::Kind::iterative;
    spec.kappa_target = as_number(get_required(j, path, "kappa_target"), path + ".kappa_target");
    if (!(spec.kappa_target > 0.0 && spec.kappa_target < 1.0))
      fail(path + ".kappa_target", "must lie in (0, 1)");
  } else if (kind == "power") {
    spec.kind = WeightSpec::Kind::power;
    spec.p = as_number(get_required(j, path, "p"), path + ".p");
    if (!(std::isfinite(spec.p) && spec.p >= 1.0)) fail(path + ".p", "must be >= 1");
  } else if (kind == "explicit") {
    spec.kind = WeightSpec::Kind::explicit_values;
    spec.values = as_number_list(get_required(j, path, "values"), path + ".values");
    for (double v : spec.values)
      if (!(std::isfinite(v) && v > 0.0)) fail(path + ".values", "entries must be positive");
  } else {
    fail(path + ".kind", "expected 'iterative', 'power' or 'explicit'");
  }
  return spec;
}

SolverConfig parse_solver(const json& j, const std::string& path) {
  expect_object(j, path);
  check_keys(j, path,
             {"rel_tol", "abs_tol", "max_step", "min_step", "quadrature_points", "method"});
  SolverConfig cfg;
  cfg.rel_tol = opt_number(j, path, "rel_tol", cfg.rel_tol);
  cfg.abs_tol = opt_number(j, path, "abs_tol", cfg.abs_tol);
  cfg.max_step = opt_number(j, path, "max_step", cfg.max_step);
  cfg.min_step = opt_number(j, path, "min_step", cfg.min_step);
  cfg.quadrature_points = opt_int(j, path, "quadrature_points", cfg.quadrature_points);
  if (const json* p = find(j, "method")) {
    try {
      cfg.method = method_from_name(as_string(*p, path + ".method"));
    } catch (const std::invalid_argument& e) {
      fail(path + ".method", e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return cfg;
}

TimeGrid parse_time(const json& j, const std::string& path) {
  expect_object(j, path);
  check_keys(j, path, {"start", "end", "outputs"});
  TimeGrid grid;
  grid.start = as_number(get_required(j, path, "start"), path + ".start");
  grid.end = as_number(get_required(j, path, "end"), path + ".end");
  grid.outputs = as_int(get_required(j, path, "outputs"), path + ".outputs");
  if (!(std::isfinite(grid.start) && grid.start >= 0.0)) fail(path + ".start", "must be >= 0");
  if (!(std::isfinite(grid.end) && grid.end > grid.start))
    fail(path + ".end", "must exceed start");
  if (grid.outputs < 2) fail(path + ".outputs", "must be >= 2");
  return grid;
}

CheckSpec parse_check(const json& j, const std::string& path) {
  expect_object(j, path);
  check_keys(j, path, {"grid_points", "sigma", "lambda_tol", "decomp_samples"});
  CheckSpec spec;
  spec.grid_points = opt_int(j, path, "grid_points", spec.grid_points);
  if (spec.grid_points < 2) fail (path + ".grid_points", "must be >= 2");
  spec.sigma = opt_number(j, path, "sigma", spec.sigma);
  if (!(spec.sigma > 0.0 && spec.sigma <= 1.0)) fail(path + ".sigma", "must lie in (0, 1]");
  spec.lambda_tol = opt_number(j, path, "lambda_tol", spec.lambda_tol);
  if (!(spec.lambda_tol >= 0.0)) fail(path + ".lambda_tol", "must be >= 0");
  spec.decomp_samples = opt_int(j, path, "decomp_samples", spec.decomp_samples);
  if (spec.decomp_samples < 1) fail(path + ".decomp_samples", "must be >= 1");
  return spec;
}

}  // namespace

CoefficientFamily FamilyConfig::build() const {
  try {
    if (kind == "power_law") return make_power_law_family(nu, a.to_model(), horizon, b_scale);
    if (kind == "becker_doring") return make_becker_doring_family(a.to_model(), horizon);
    if (kind == "affine") return make_pure_decay_family(a.to_model(), horizon);
    if (kind == "custom") return make_custom_family(CustomTable{a_values, b_entries, horizon});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("$.family: ") + e.what());
  }
  throw ConfigError("$.family.kind: unknown kind '" + kind + "'");
}

std::vector<double> InitialDataSpec::materialize(int n) const {
  std::vector<double> u(static_cast<std::size_t>(n), 0.0);
  switch (kind) {
    case Kind::basis:
      if (index > n) throw ConfigError("$.initial_data.index: exceeds truncation");
      u[index - 1] = 1.0;
      break;
    case Kind::geometric: {
      for (int i = 1; i <= n; ++i) u[i - 1] = std::pow(ratio, i - 1);
      if (mass) {
        double m = 0.0;
        for (int i = 1; i <= n; ++i) m += static_cast<double>(i) * u[i - 1];
        const double scale = *mass / m;
        for (double& v : u) v *= scale;
      }
      break;
    }
    case Kind::explicit_values:
      if (static_cast<int>(values.size()) != n)
        throw ConfigError("$.initial_data.values: length must equal truncation");
      u = values;
      break;
  }
  return u;
}

std::vector<double> TimeGrid::times() const { return linspace(start, end, outputs); }

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  out.front() = a;
  out.back() = b;
  return out;
}

RunConfig parse_run_config(const nlohmann::json& j) {
  const std::string root = "$";
  expect_object(j, root);
  check_keys(j, root,
             {"schema_version", "family", "truncation", "initial_data", "weight", "solver",
              "time", "check", "seed", "workers"});

  RunConfig config;
  config.schema_version =
      as_int(get_required(j, root, "schema_version"), root + ".schema_version");
  if (config.schema_version != kSchemaVersion)
    fail(root + ".schema_version",
         "unsupported version " + std::to_string(config.schema_version) + " (expected " +
             std::to_string(kSchemaVersion) + ")");

  config.family = parse_family(get_required(j, root, "family"), root + ".family");
  config.truncation = as_int(get_required(j, root, "truncation"), root + ".truncation");
  if (config.truncation < 2) fail(root + ".truncation", "must be >= 2");
  config.initial = parse_initial(get_required(j, root, "initial_data"), root + ".initial_data");
  config.weight = parse_weight(get_required(j, root, "weight"), root + ".weight");
  if (const json* p = find(j, "solver")) config.solver = parse_solver(*p, root + ".solver");
  config.time = parse_time(get_required(j, root, "time"), root + ".time");
  if (const json* p = find(j, "check")) config.check = parse_check(*p, root + ".check");

  if (const json* p = find(j, "seed")) {
    if (!p->is_number_integer() || p->get<std::int64_t>() < 0)
      fail(root + ".seed", "expected a non-negative integer");
    config.seed = p->get<std::uint64_t>();
  }
  config.workers = opt_int(j, root, "workers", 1);
  if (config.workers < 1 || config.workers > 256)
    fail(root + ".workers", "must lie in [1, 256]");

  // Cross-field consistency.
  if (config.family.kind == "custom" &&
      static_cast<int>(config.family.a_values.size()) < config.truncation)
    fail(root + ".family.a_values", "shorter than truncation");
  if (std::isfinite(config.family.horizon) && config.time.end > config.family.horizon)
    fail(root + ".time.end", "exceeds the family horizon");
  if (config.time.start > 0 && std::isfinite(config.family.horizon) &&
      config.time.start > config.family.horizon)
    fail(root + ".time.start", "exceeds the family horizon");
  if (config.initial.kind == InitialDataSpec::Kind::explicit_values &&
      static_cast<int>(config.initial.values.size()) != config.truncation)
    fail(root + ".initial_data.values", "length must equal truncation");
  if (config.weight.kind == WeightSpec::Kind::explicit_values &&
      static_cast<int>(config.weight.values.size()) < config.truncation)
    fail(root + ".weight.values", "shorter than truncation");
  if (config.initial.kind == InitialDataSpec::Kind::basis &&
      config.initial.index > config.truncation)
    fail(root + ".initial_data.index", "exceeds truncation");

  return config;
}

RunConfig load_run_config_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

}  // namespace fragsim
