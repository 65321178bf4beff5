// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include "cemint/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace cemint {

ErrorTriple error_norms(const Vec& u_ref, const Vec& u_test, const SpMat& M, const SpMat& A) {
  if (u_ref.size() != u_test.size())
    throw std::invalid_argument("error norms: vectors of different sizes");
  const Vec diff = u_ref - u_test;

  const double ref_l2 = std::sqrt(u_ref.dot(M * u_ref));
  const double ref_energy = std::sqrt(u_ref.dot(A * u_ref));
  const double ref_max = u_ref.cwiseAbs().maxCoeff();
  if (ref_l2 <= 0.0 || ref_energy <= 0.0 || ref_max <= 0.0)
    throw std::invalid_argument("error norms: reference has zero norm");

  ErrorTriple errors;
  errors.l2 = std::sqrt(std::max(0.0, diff.dot(M * diff))) / ref_l2;
  errors.energy = std::sqrt(std::max(0.0, diff.dot(A * diff))) / ref_energy;
  errors.max = diff.cwiseAbs().maxCoeff() / ref_max;
  return errors;
}

std::vector<double> convergence_rates(const std::vector<double>& errors) {
  if (errors.size() < 2)
    throw std::invalid_argument("convergence rates need at least two entries");
  std::vector<double> rates;
  rates.reserve(errors.size() - 1);
  for (std::size_t k = 1; k < errors.size(); ++k) {
    if (!(errors[k] > 0.0) || !(errors[k - 1] > 0.0))
      throw std::invalid_argument("convergence rates need positive error entries");
    rates.push_back(std::abs(std::log(errors[k]) - std::log(errors[k - 1])) / std::log(2.0));
  }
  return rates;
}

void emit_table(std::vector<ReportRow> rows, const std::string& path, bool timestamp) {
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    if (a.H != b.H) return a.H > b.H;
    return a.Nt < b.Nt;
  });

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write table: " + path);
  if (timestamp) {
    std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# generated " << stamp << '\n';
  }
  out << "scheme,H,m,Nt,basis,eps_a,eps_0,eps_inf,CR_a,CR_0\n";
  char line[512];
  for (const ReportRow& row : rows) {
    if (row.failed) {
      std::snprintf(line, sizeof line, "%s,%.10g,%d,%d,%d,FAIL,FAIL,FAIL,,\n",
                    row.scheme.c_str(), row.H, row.layers, row.Nt, row.basis);
      out << line;
      continue;
    }
    std::snprintf(line, sizeof line, "%s,%.10g,%d,%d,%d,%.6e,%.6e,%.6e", row.scheme.c_str(),
                  row.H, row.layers, row.Nt, row.basis, row.eps_a, row.eps_0, row.eps_inf);
    out << line;
    if (std::isnan(row.cr_a))
      out << ",";
    else {
      std::snprintf(line, sizeof line, ",%.4f", row.cr_a);
      out << line;
    }
    if (std::isnan(row.cr_0))
      out << ",";
    else {
      std::snprintf(line, sizeof line, ",%.4f", row.cr_0);
      out << line;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failure on table: " + path);
}

void write_field_dump(const std::string& path, int nx, int ny, const Vec& values) {
  if (values.size() != static_cast<Eigen::Index>(nx) * ny)
    throw std::invalid_argument("field dump: value count does not match the header");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write field dump: " + path);
  out << nx << ' ' << ny << '\n';
  out.precision(17);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      out << values[static_cast<Eigen::Index>(y) * nx + x];
      out << (x + 1 == nx ? '\n' : ' ');
    }
  }
}

Vec expand_with_boundary(const FineGrid& grid, const Vec& interior) {
  Vec full = Vec::Zero(grid.node_count());
  for (int iy = 1; iy < grid.n; ++iy)
    for (int ix = 1; ix < grid.n; ++ix)
      full[grid.node_id(ix, iy)] = interior[grid.interior_dof(ix, iy)];
  return full;
}

}  // namespace cemint
