#pragma once

// Deterministic on-disk formats: CSV with '.' decimal separator, '\n' line
// endings and a header row; JSON pretty-printed with two-space indent and
// lexicographically sorted keys.  Doubles are rendered with 17 significant
// digits so identical runs produce identical bytes.

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "fragsim/coefficients.hpp"
#include "fragsim/diagnostics.hpp"
#include "fragsim/operators.hpp"
#include "fragsim/solver.hpp"
#include "fragsim/weights.hpp"

namespace fragsim {

std::string fmt_double(double v);

nlohmann::json weight_certificate_json(const WeightCertificate& cert);
nlohmann::json nonnegativity_json(const NonnegativityReport& report);
nlohmann::json mass_rule_json(const MassRuleReport& report);
nlohmann::json holder_json(const HolderCertificate& cert);
nlohmann::json decay_report_json(const DecayReport& report);
nlohmann::json solver_stats_json(const SolverStats& stats);
nlohmann::json matrix_json(const TriangularMatrix& m);

// Header "t,u1,...,uN,mass,wnorm"; one row per recorded state.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          std::span<const double> w);

// Header "c1,...,cN"; rows are matrix rows, explicit zeros below the diagonal.
void write_matrix_csv(std::ostream& os, const TriangularMatrix& m);

// Header "t,measured,envelope".
void write_decay_csv(std::ostream& os, const DecayReport& report);

std::string dump_json(const nlohmann::json& j);  // pretty + trailing newline

void write_text_file(const std::string& path, const std::string& content);

}  // namespace fragsim
