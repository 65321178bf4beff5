// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <iostream>

#include "cemint/experiment.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  int threads = -1;
  bool no_timestamp = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required) {
  auto* config = cmd->add_option("--config", opts.config_path, "experiment config file");
  if (config_required) config->required();
  cmd->add_option("--out", opts.out_dir, "output directory (overrides the config)");
  cmd->add_option("--threads", opts.threads, "worker threads, 0 = all cores");
  cmd->add_flag("--no-timestamp", opts.no_timestamp, "suppress the CSV timestamp comment");
}

cemint::ExperimentConfig load(const CommonOptions& opts) {
  cemint::ExperimentConfig cfg = cemint::ExperimentConfig::parse_file(opts.config_path);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.threads >= 0) cfg.threads = opts.threads;
  if (opts.no_timestamp) cfg.timestamp = false;
  return cfg;
}

int run_rows(const CommonOptions& opts, bool single_row) {
  cemint::ExperimentConfig cfg = load(opts);
  if (single_row && (cfg.coarse.size() != 1 || cfg.nt.size() != 1))
    throw std::invalid_argument(
        "'run' expects single-valued N_coarse and Nt lists; use 'sweep' for tables");
  const cemint::ExperimentResult result = cemint::run_experiment(cfg, std::cout);
  return result.any_failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale solver for semilinear parabolic problems in high-contrast media"};
  app.require_subcommand(1);

  CommonOptions run_opts, sweep_opts, basis_opts;
  CLI::App* run = app.add_subcommand("run", "single experiment (one coarse size, one Nt)");
  add_common(run, run_opts, true);
  CLI::App* sweep = app.add_subcommand("sweep", "full table over the configured H and Nt lists");
  add_common(sweep, sweep_opts, true);
  CLI::App* basis = app.add_subcommand("build-basis", "build the basis and emit a decay report");
  add_common(basis, basis_opts, true);
  app.add_subcommand("selftest", "quick oracle suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_rows(run_opts, true);
    if (sweep->parsed()) return run_rows(sweep_opts, false);
    if (basis->parsed()) return cemint::build_basis_report(load(basis_opts), std::cout);
    return cemint::selftest(std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
