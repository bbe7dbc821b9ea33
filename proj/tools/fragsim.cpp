// fragsim: simulation and certification CLI for time-dependent discrete
// fragmentation systems on weighted l1 spaces.
//
//   fragsim check    --config cfg.json [--out DIR]        assumption report
//   fragsim weights  --config cfg.json [--out DIR]        weight certificate
//   fragsim simulate --config cfg.json [--out DIR]        trajectory + stats
//   fragsim matrix   --config cfg.json [--s S --t T]      flow matrix + compose defect
//   fragsim decay    --config cfg.json [--out DIR]        decay envelopes + bounds
//
// Exit codes: 0 success, 1 runtime/semantic failure, 2 config or schema error.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fragsim/commands.hpp"
#include "fragsim/serialize.hpp"
#include "fragsim/solver.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::int64_t> seed;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration JSON file")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory (default: out)");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--workers", args.workers, "override the config worker count");
}

fragsim::RunConfig load(const CommonArgs& args) {
  fragsim::RunConfig config = fragsim::load_run_config_file(args.config_path);
  if (args.seed) {
    if (*args.seed < 0) throw fragsim::ConfigError("--seed: expected a non-negative integer");
    config.seed = static_cast<std::uint64_t>(*args.seed);
  }
  if (args.workers) {
    if (*args.workers < 1 || *args.workers > 256)
      throw fragsim::ConfigError("--workers: must lie in [1, 256]");
    config.workers = *args.workers;
  }
  return config;
}

void print_error_object(const std::string& code, const std::string& message) {
  nlohmann::json j{{"error", nlohmann::json{{"code", code}, {"message", message}}}};
  std::cout << fragsim::dump_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-dependent discrete fragmentation: simulation and certification"};
  app.require_subcommand(1);

  CommonArgs check_args, weights_args, simulate_args, matrix_args, decay_args;
  std::optional<double> matrix_s, matrix_t;

  CLI::App* check = app.add_subcommand("check", "sample the structural assumptions");
  add_common(check, check_args);
  CLI::App* weights = app.add_subcommand("weights", "construct and certify a weight");
  add_common(weights, weights_args);
  CLI::App* simulate = app.add_subcommand("simulate", "integrate the initial value problem");
  add_common(simulate, simulate_args);
  CLI::App* matrix = app.add_subcommand("matrix", "compute the flow matrix U(t, s)");
  add_common(matrix, matrix_args);
  matrix->add_option("--s", matrix_s, "interval start (default: time.start)");
  matrix->add_option("--t", matrix_t, "interval end (default: time.end)");
  CLI::App* decay = app.add_subcommand("decay", "decay envelopes and decomposition bounds");
  add_common(decay, decay_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    print_error_object("usage", e.what());
    return 2;
  }

  try {
    if (check->parsed()) return fragsim::cmd_check(load(check_args), check_args.out_dir);
    if (weights->parsed()) return fragsim::cmd_weights(load(weights_args), weights_args.out_dir);
    if (simulate->parsed())
      return fragsim::cmd_simulate(load(simulate_args), simulate_args.out_dir);
    if (matrix->parsed())
      return fragsim::cmd_matrix(load(matrix_args), matrix_args.out_dir, matrix_s, matrix_t);
    if (decay->parsed()) return fragsim::cmd_decay(load(decay_args), decay_args.out_dir);
  } catch (const fragsim::ConfigError& e) {
    print_error_object("config", e.what());
    return 2;
  } catch (const fragsim::SolverError& e) {
    print_error_object("solver", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error_object("runtime", e.what());
    return 1;
  }
  return 2;
}
