// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

#include "cemint/config.hpp"
#include "cemint/metrics.hpp"

namespace cemint {

struct ExperimentResult {
  std::vector<ReportRow> rows;
  bool any_failed = false;
  std::string table_path;
};

// Full sweep: one row per (H, Nt) pairing of the config lists; the fine
// reference is computed once and shared. Failed rows are recorded and the
// remaining rows still run.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log);

// Basis diagnostics: builds the basis for the first coarse size and writes
// the per-column decay profile table.
int build_basis_report(const ExperimentConfig& cfg, std::ostream& log);

// Quick oracle suite: phi series agreement, linear exactness, eigenpair
// residuals. Returns 0 when everything passes.
int selftest(std::ostream& log);

}  // namespace cemint
