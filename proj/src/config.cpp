// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include "cemint/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cemint {

namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) items.push_back(trim(item));
  return items;
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int parsed = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw std::invalid_argument("config key '" + key + "': expected boolean, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> items;
  for (const std::string& item : split_list(value)) items.push_back(parse_int(key, item));
  if (items.empty()) throw std::invalid_argument("config key '" + key + "': empty list");
  return items;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty())
      throw std::invalid_argument("config key '" + key + "': empty value");

    if (key == "example") cfg.example = parse_int(key, value);
    else if (key == "n_fine") cfg.n_fine = parse_int(key, value);
    else if (key == "N_coarse") cfg.coarse = parse_int_list(key, value);
    else if (key == "layers") cfg.layers = value == "auto" ? -1 : parse_int(key, value);
    else if (key == "layer_coefficient") cfg.layer_coefficient = parse_double(key, value);
    else if (key == "basis_per_element") cfg.basis_per_element = parse_int(key, value);
    else if (key == "scheme") cfg.scheme = value;
    else if (key == "Nt") cfg.nt = parse_int_list(key, value);
    else if (key == "Nt_ref") cfg.nt_ref = parse_int(key, value);
    else if (key == "contrast") cfg.contrast = parse_double(key, value);
    else if (key == "epsilon") cfg.epsilon = parse_double(key, value);
    else if (key == "T") cfg.final_time = parse_double(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "kappa_style") cfg.kappa_style = value;
    else if (key == "kappa_file") cfg.kappa_file = value;
    else if (key == "seed_v") cfg.seed_v = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "kappa_style_v") cfg.kappa_style_v = value;
    else if (key == "kappa_file_v") cfg.kappa_file_v = value;
    else if (key == "nonlinear") cfg.nonlinear = value;
    else if (key == "picard_tol") cfg.picard_tol = parse_double(key, value);
    else if (key == "picard_max") cfg.picard_max = parse_int(key, value);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "write_fields") cfg.write_fields = parse_bool(key, value);
    else if (key == "basis_cache") cfg.basis_cache = parse_bool(key, value);
    else if (key == "threads") cfg.threads = parse_int(key, value);
    else if (key == "timestamp") cfg.timestamp = parse_bool(key, value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  return parse(in);
}

void ExperimentConfig::validate() const {
  if (example < 1 || example > 5)
    throw std::invalid_argument("example must be 1..5, got " + std::to_string(example));
  if (n_fine < 2) throw std::invalid_argument("n_fine must be >= 2");
  for (int N : coarse) {
    if (N < 2) throw std::invalid_argument("N_coarse entries must be >= 2");
    if (n_fine % N != 0)
      throw std::invalid_argument("n_fine=" + std::to_string(n_fine) +
                                  " not divisible by N_coarse=" + std::to_string(N));
  }
  if (layers != -1 && layers < 1)
    throw std::invalid_argument("layers must be 'auto' or >= 1");
  if (layer_coefficient <= 0.0) throw std::invalid_argument("layer_coefficient must be positive");
  if (basis_per_element < 1) throw std::invalid_argument("basis_per_element must be >= 1");
  if (scheme != "EIRK1" && scheme != "EIRK22" && scheme != "FDBE" && scheme != "FDCN")
    throw std::invalid_argument("scheme must be one of EIRK1, EIRK22, FDBE, FDCN; got '" +
                                scheme + "'");
  if (example == 5 && (scheme == "FDBE" || scheme == "FDCN"))
    throw std::invalid_argument("example 5 runs the exponential schemes only");
  for (int steps : nt)
    if (steps < 1) throw std::invalid_argument("Nt entries must be >= 1");
  if (nt_ref < 1) throw std::invalid_argument("Nt_ref must be >= 1");
  if (contrast < 1.0) throw std::invalid_argument("contrast must be >= 1");
  if ((example == 3 || example == 4) && epsilon != -1.0 && epsilon <= 0.0)
    throw std::invalid_argument("epsilon must be positive for examples 3 and 4");
  if (final_time != -1.0 && final_time <= 0.0)
    throw std::invalid_argument("T must be positive");
  if (nonlinear != "picard" && nonlinear != "lagged")
    throw std::invalid_argument("nonlinear must be 'picard' or 'lagged', got '" + nonlinear +
                                "'");
  if (picard_tol <= 0.0) throw std::invalid_argument("picard_tol must be positive");
  if (picard_max < 1) throw std::invalid_argument("picard_max must be >= 1");
  if (kappa_style != "channels" && kappa_style != "blobs" && kappa_style != "mixed")
    throw std::invalid_argument("kappa_style must be channels, blobs or mixed");
  if (kappa_style_v != "channels" && kappa_style_v != "blobs" && kappa_style_v != "mixed")
    throw std::invalid_argument("kappa_style_v must be channels, blobs or mixed");
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
}

}  // namespace cemint
