#include "fragsim/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace fragsim {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

// JSON numbers keep full precision via nlohmann's shortest-roundtrip dump;
// non-finite values map to null explicitly (JSON has no inf/nan).
json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json num_list(std::span<const double> values) {
  json arr = json::array();
  for (double v : values) arr.push_back(num(v));
  return arr;
}

json grid_json(const WeightGrid& grid) {
  return json{{"j_max", grid.j_max}, {"times", num_list(grid.times)}};
}

json construction_json(const WeightConstruction& c) {
  json j{{"kind", std::string(construction_name(c.kind))}};
  if (c.kind == WeightConstruction::Kind::iterative) j["kappa_target"] = num(c.kappa_target);
  if (c.kind == WeightConstruction::Kind::power) j["p"] = num(c.p);
  return j;
}

}  // namespace

json weight_certificate_json(const WeightCertificate& cert) {
  json j;
  j["w"] = num_list(cert.w);
  j["kappa_hat"] = cert.certified ? num(cert.kappa_hat) : json(nullptr);
  j["grid"] = grid_json(cert.grid);
  j["construction"] = construction_json(cert.construction);
  j["certified"] = cert.certified;
  j["kappa_measured"] = num(cert.kappa_hat);
  if (cert.violation) {
    j["violation"] = json{{"j", cert.violation->j},
                          {"n", cert.violation->n},
                          {"t", num(cert.violation->t)},
                          {"ratio", num(cert.violation->ratio)}};
  } else {
    j["violation"] = nullptr;
  }
  return j;
}

json nonnegativity_json(const NonnegativityReport& report) {
  json j;
  j["pass"] = report.pass;
  j["n_max"] = report.n_max;
  j["grid"] = num_list(report.grid);
  if (report.witness) {
    j["witness"] = json{{"n", report.witness->n},
                        {"j", report.witness->j},
                        {"t", num(report.witness->t)},
                        {"value", num(report.witness->value)},
                        {"what", report.witness->what}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

json mass_rule_json(const MassRuleReport& report) {
  json j;
  j["mode"] = std::string(mass_mode_name(report.mode));
  j["tol"] = num(report.tol);
  j["max_abs_monomer_rate"] = num(report.max_abs_monomer_rate);
  json samples = json::array();
  for (const auto& s : report.samples)
    samples.push_back(json{{"j", s.j}, {"t", num(s.t)}, {"lambda", num(s.lambda)}});
  j["lambda_samples"] = samples;
  if (report.witness) {
    j["witness"] = json{{"j", report.witness->j},
                        {"t", num(report.witness->t)},
                        {"lambda", num(report.witness->value)}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

json holder_json(const HolderCertificate& cert) {
  json j;
  j["sigma"] = num(cert.sigma);
  j["c1"] = num(cert.c1);
  j["c2"] = num(cert.c2);
  j["status"] = cert.status == HolderStatus::certified_on_grid ? "certified_on_grid" : "violated";
  j["grid"] = num_list(cert.grid);
  j["n_max"] = cert.n_max;
  if (cert.witness) {
    j["witness"] = json{{"n", cert.witness->n},
                        {"s", num(cert.witness->s)},
                        {"t", num(cert.witness->t)},
                        {"tau", num(cert.witness->tau)}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

json decay_report_json(const DecayReport& report) {
  json j;
  j["kind"] = std::string(decay_kind_name(report.kind));
  j["times"] = num_list(report.times);
  j["measured"] = num_list(report.measured);
  j["envelope"] = num_list(report.envelope);
  j["rate_used"] = num(report.rate_used);
  j["rate_certified"] = report.rate_certified;
  j["kappa_used"] = num(report.kappa_used);
  j["prefactor"] = num(report.prefactor);
  j["margin"] = num(report.margin);
  j["applicable"] = report.applicable;
  j["pass"] = report.pass;
  j["fitted_rate"] = report.fitted_rate ? num(*report.fitted_rate) : json(nullptr);
  j["rate_bound"] = num(report.rate_bound);
  return j;
}

json solver_stats_json(const SolverStats& stats) {
  return json{{"steps", stats.steps},         {"accepted", stats.accepted},
              {"rejected", stats.rejected},   {"rhs_evals", stats.rhs_evals},
              {"panels", stats.panels},       {"exp_evals", stats.exp_evals}};
}

json matrix_json(const TriangularMatrix& m) {
  json j;
  j["n"] = m.size();
  j["s"] = num(m.s());
  j["t"] = num(m.t());
  j["rescaled"] = m.rescaled();
  json rows = json::array();
  for (int i = 1; i <= m.size(); ++i) {
    json row = json::array();
    for (int kj = 1; kj <= m.size(); ++kj) row.push_back(num(m(i, kj)));
    rows.push_back(row);
  }
  j["entries"] = rows;
  return j;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::span<const double> w) {
  const int n = traj.states.empty() ? 0 : traj.states.front().size();
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",u" << i;
  os << ",mass,wnorm\n";
  for (const auto& state : traj.states) {
    os << fmt_double(state.t);
    for (double v : state.u) os << ',' << fmt_double(v);
    os << ',' << fmt_double(state.mass()) << ',' << fmt_double(state.weighted_norm(w)) << '\n';
  }
}

void write_matrix_csv(std::ostream& os, const TriangularMatrix& m) {
  for (int j = 1; j <= m.size(); ++j) os << (j == 1 ? "c" : ",c") << j;
  os << '\n';
  for (int i = 1; i <= m.size(); ++i) {
    for (int j = 1; j <= m.size(); ++j) {
      if (j > 1) os << ',';
      os << fmt_double(m(i, j));
    }
    os << '\n';
  }
}

void write_decay_csv(std::ostream& os, const DecayReport& report) {
  os << "t,measured,envelope\n";
  for (std::size_t i = 0; i < report.times.size(); ++i)
    os << fmt_double(report.times[i]) << ',' << fmt_double(report.measured[i]) << ','
       << fmt_double(report.envelope[i]) << '\n';
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << content;
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace fragsim
