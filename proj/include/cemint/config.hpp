// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cemint {

// Flat key = value experiment description; list values are comma-separated
// and '#' starts a comment.
struct ExperimentConfig {
  int example = 1;
  int n_fine = 128;
  std::vector<int> coarse = {8};
  int layers = -1;  // -1 = auto from contrast and H
  double layer_coefficient = 1.0 / std::log(10.0);
  int basis_per_element = 4;
  std::string scheme = "EIRK1";
  std::vector<int> nt = {200};
  int nt_ref = 1000;
  double contrast = 100.0;
  double epsilon = -1.0;     // -1 = catalogue default
  double final_time = -1.0;  // -1 = catalogue default
  std::uint64_t seed = 1;
  std::string kappa_style = "channels";
  std::string kappa_file;
  std::uint64_t seed_v = 2;
  std::string kappa_style_v = "blobs";
  std::string kappa_file_v;
  std::string nonlinear = "picard";  // picard | lagged
  double picard_tol = 1e-10;
  int picard_max = 50;
  std::string out_dir = "out";
  bool write_fields = false;
  bool basis_cache = false;
  int threads = 0;  // 0 = hardware concurrency
  bool timestamp = true;

  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig parse_file(const std::string& path);

  // Throws std::invalid_argument naming the offending fields.
  void validate() const;
};

}  // namespace cemint
