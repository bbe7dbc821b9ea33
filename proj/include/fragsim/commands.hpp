#pragma once

// Subcommand bodies shared by the CLI binary and the end-to-end tests.
// Each command writes its artifacts under `out_dir`, prints a deterministic
// one-object JSON summary to stdout, and returns the process exit code
// (0 success, 1 semantic failure; config problems throw ConfigError -> 2).

#include <filesystem>
#include <optional>

#include "fragsim/config.hpp"

namespace fragsim {

int cmd_check(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_weights(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_matrix(const RunConfig& config, const std::filesystem::path& out_dir,
               std::optional<double> s_override, std::optional<double> t_override);
int cmd_decay(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace fragsim
