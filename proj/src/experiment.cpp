// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include "cemint/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "cemint/basis.hpp"
#include "cemint/expint.hpp"
#include "cemint/fdtime.hpp"
#include "cemint/problems.hpp"
#include "cemint/reduced.hpp"

namespace cemint {

namespace {

namespace fs = std::filesystem;

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hardware = std::thread::hardware_concurrency();
  return hardware > 0 ? static_cast<int>(hardware) : 1;
}

ThetaConfig theta_from_config(const ExperimentConfig& cfg, double theta) {
  ThetaConfig tc;
  tc.theta = theta;
  tc.strategy = cfg.nonlinear == "lagged" ? ThetaConfig::Strategy::Lagged
                                          : ThetaConfig::Strategy::Picard;
  tc.picard_tol = cfg.picard_tol;
  tc.picard_max = cfg.picard_max;
  return tc;
}

CoefficientField load_kappa(const ExperimentConfig& cfg, const std::string& file,
                            std::uint64_t seed, const std::string& style) {
  if (!file.empty()) {
    CoefficientField field = read_raster(file);
    if (field.nx != cfg.n_fine || field.ny != cfg.n_fine)
      throw std::invalid_argument("raster " + file + " is " + std::to_string(field.nx) + "x" +
                                  std::to_string(field.ny) + " but n_fine=" +
                                  std::to_string(cfg.n_fine));
    return field;
  }
  return synth_field(seed, cfg.contrast, style, cfg.n_fine);
}

struct BasisBundle {
  MultiscaleBasis basis;
  int layers = 0;
};

BasisBundle prepare_basis(const ExperimentConfig& cfg, const Grids& grids,
                          const CoefficientField& kappa, const AuxiliarySpace& aux, int threads,
                          std::ostream& log, const std::string& species_tag) {
  BasisBundle bundle;
  bundle.layers = cfg.layers > 0
                      ? cfg.layers
                      : default_layers(grids.coarse.H, kappa.max_value(), cfg.layer_coefficient);

  std::string cache_path;
  if (cfg.basis_cache) {
    const fs::path dir = fs::path(cfg.out_dir) / "cache";
    fs::create_directories(dir);
    std::ostringstream name;
    name << "basis" << species_tag << "_n" << cfg.n_fine << "_N" << grids.coarse.N << "_m"
         << bundle.layers << "_L" << cfg.basis_per_element << "_" << std::hex
         << kappa.checksum() << ".bc";
    cache_path = (dir / name.str()).string();
    if (load_basis_cache(cache_path, cfg.n_fine, grids.coarse.N, bundle.layers,
                         cfg.basis_per_element, kappa.checksum(), &bundle.basis)) {
      log << "  basis N=" << grids.coarse.N << " m=" << bundle.layers << " loaded from cache\n";
      return bundle;
    }
  }
  bundle.basis = build_basis(grids.fine, grids.coarse, kappa, aux, bundle.layers, threads);
  if (!cache_path.empty())
    save_basis_cache(cache_path, bundle.basis, cfg.n_fine, grids.coarse.N, kappa.checksum());
  return bundle;
}

Vec run_scheme(const ExperimentConfig& cfg, const ReducedSystem& sys, const Reaction& reaction,
               const Vec& coarse0, int Nt, double T) {
  if (cfg.scheme == "EIRK1" || cfg.scheme == "EIRK22")
    return integrate_exponential(sys, parse_exp_scheme(cfg.scheme), reaction, coarse0, Nt, T);
  const double theta = cfg.scheme == "FDBE" ? 1.0 : 0.5;
  return theta_integrate_coarse(sys, theta_from_config(cfg, theta), reaction, coarse0, Nt, T);
}

// CR columns along the swept axis: the Nt sweep when present, otherwise the
// H sweep. Rows are brought into table order first so rates land between
// consecutive rows of one scheme.
void attach_rates(std::vector<ReportRow>& rows, bool nt_swept) {
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    if (a.H != b.H) return a.H > b.H;
    return a.Nt < b.Nt;
  });
  for (std::size_t k = 1; k < rows.size(); ++k) {
    ReportRow& cur = rows[k];
    const ReportRow& prev = rows[k - 1];
    if (cur.failed || prev.failed || cur.scheme != prev.scheme) continue;
    const bool consecutive = nt_swept ? (cur.H == prev.H && cur.Nt != prev.Nt)
                                      : (cur.Nt == prev.Nt && cur.H != prev.H);
    if (!consecutive) continue;
    if (cur.eps_a > 0.0 && prev.eps_a > 0.0)
      cur.cr_a = std::abs(std::log(cur.eps_a) - std::log(prev.eps_a)) / std::log(2.0);
    if (cur.eps_0 > 0.0 && prev.eps_0 > 0.0)
      cur.cr_0 = std::abs(std::log(cur.eps_0) - std::log(prev.eps_0)) / std::log(2.0);
  }
}

std::string field_dump_name(const std::string& scheme, int N, int Nt) {
  std::ostringstream name;
  name << "sol_" << scheme << "_N" << N << "_Nt" << Nt << ".txt";
  std::string text = name.str();
  for (char& c : text)
    if (c == ':') c = '_';
  return text;
}

void dump_solution(const ExperimentConfig& cfg, const FineGrid& fine, const Vec& interior,
                   const std::string& name) {
  const Vec full = expand_with_boundary(fine, interior);
  write_field_dump((fs::path(cfg.out_dir) / name).string(), fine.n + 1, fine.n + 1, full);
}

ExperimentResult run_single(const ExperimentConfig& cfg, std::ostream& log) {
  const int threads = resolve_threads(cfg.threads);
  SemilinearProblem problem = catalogue_single(cfg.example, cfg.contrast, cfg.epsilon);
  if (cfg.final_time > 0.0) problem.final_time = cfg.final_time;
  const double T = problem.final_time;

  const CoefficientField kappa = load_kappa(cfg, cfg.kappa_file, cfg.seed, cfg.kappa_style);
  const FineGrid fine(cfg.n_fine);
  const SpMat M = assemble_mass(fine);
  const SpMat A = assemble_stiffness(fine, kappa);
  const Vec u0 = interpolate_interior(fine, problem.initial);

  log << "reference: fine backward Euler, Nt_ref=" << cfg.nt_ref << "\n";
  const Vec reference = reference_solution(M, A, problem.reaction, u0, cfg.nt_ref, T,
                                           theta_from_config(cfg, 1.0));
  if (cfg.write_fields) {
    write_raster((fs::path(cfg.out_dir) / "kappa.txt").string(), kappa);
    dump_solution(cfg, fine, reference, "reference.txt");
  }

  ExperimentResult result;
  for (int N : cfg.coarse) {
    try {
      const Grids grids = build_grids(cfg.n_fine, N);
      const auto weight = spectral_weight(kappa, grids.pou);
      const AuxiliarySpace aux = build_auxiliary_space(grids.fine, grids.coarse, kappa, weight,
                                                       cfg.basis_per_element);
      const BasisBundle bundle = prepare_basis(cfg, grids, kappa, aux, threads, log, "");
      const ReducedSystem sys = reduce(bundle.basis, M, A);
      const Vec coarse0 = sys.project_fine(u0);
      log << "N=" << N << " m=" << bundle.layers << " dofs=" << sys.dim()
          << " gap=" << aux.spectral_gap << "\n";

      for (int Nt : cfg.nt) {
        ReportRow row;
        row.scheme = cfg.scheme;
        row.H = grids.coarse.H;
        row.layers = bundle.layers;
        row.Nt = Nt;
        row.basis = cfg.basis_per_element;
        try {
          const Vec final_coarse = run_scheme(cfg, sys, problem.reaction, coarse0, Nt, T);
          const Vec lifted = sys.lift(final_coarse);
          const ErrorTriple err = error_norms(reference, lifted, M, A);
          row.eps_a = err.energy;
          row.eps_0 = err.l2;
          row.eps_inf = err.max;
          if (cfg.write_fields)
            dump_solution(cfg, fine, lifted, field_dump_name(cfg.scheme, N, Nt));
        } catch (const std::exception& e) {
          row.failed = true;
          row.message = e.what();
          result.any_failed = true;
          log << "row N=" << N << " Nt=" << Nt << " failed: " << e.what() << "\n";
        }
        result.rows.push_back(std::move(row));
      }
    } catch (const std::exception& e) {
      // Basis-stage failure marks every Nt row of this coarse size.
      for (int Nt : cfg.nt) {
        ReportRow row;
        row.scheme = cfg.scheme;
        row.H = 1.0 / N;
        row.layers = cfg.layers;
        row.Nt = Nt;
        row.basis = cfg.basis_per_element;
        row.failed = true;
        row.message = e.what();
        result.rows.push_back(std::move(row));
      }
      result.any_failed = true;
      log << "coarse size N=" << N << " failed: " << e.what() << "\n";
    }
  }
  attach_rates(result.rows, cfg.nt.size() > 1);
  return result;
}

ExperimentResult run_coupled(const ExperimentConfig& cfg, std::ostream& log) {
  const int threads = resolve_threads(cfg.threads);
  CoupledProblem problem = catalogue_coupled(cfg.contrast);
  if (cfg.final_time > 0.0) problem.final_time = cfg.final_time;
  const double T = problem.final_time;

  const CoefficientField kappa_u = load_kappa(cfg, cfg.kappa_file, cfg.seed, cfg.kappa_style);
  const CoefficientField kappa_v =
      load_kappa(cfg, cfg.kappa_file_v, cfg.seed_v, cfg.kappa_style_v);
  const FineGrid fine(cfg.n_fine);
  const SpMat M = assemble_mass(fine);
  const SpMat A_u = assemble_stiffness(fine, kappa_u);
  const SpMat A_v = assemble_stiffness(fine, kappa_v);
  const Vec u0 = interpolate_interior(fine, problem.initial_u);
  const Vec v0 = interpolate_interior(fine, problem.initial_v);

  log << "coupled reference: fine backward Euler, Nt_ref=" << cfg.nt_ref << "\n";
  const CoupledFine reference =
      coupled_reference_solution(M, A_u, A_v, problem.reaction_u, problem.reaction_v, u0, v0,
                                 cfg.nt_ref, T, theta_from_config(cfg, 1.0));
  if (cfg.write_fields) {
    write_raster((fs::path(cfg.out_dir) / "kappa_u.txt").string(), kappa_u);
    write_raster((fs::path(cfg.out_dir) / "kappa_v.txt").string(), kappa_v);
    dump_solution(cfg, fine, reference.u, "reference_u.txt");
    dump_solution(cfg, fine, reference.v, "reference_v.txt");
  }

  ExperimentResult result;
  const ExpScheme scheme = parse_exp_scheme(cfg.scheme);
  for (int N : cfg.coarse) {
    try {
      const Grids grids = build_grids(cfg.n_fine, N);
      const AuxiliarySpace aux_u =
          build_auxiliary_space(grids.fine, grids.coarse, kappa_u,
                                spectral_weight(kappa_u, grids.pou), cfg.basis_per_element);
      const AuxiliarySpace aux_v =
          build_auxiliary_space(grids.fine, grids.coarse, kappa_v,
                                spectral_weight(kappa_v, grids.pou), cfg.basis_per_element);
      const BasisBundle bundle_u = prepare_basis(cfg, grids, kappa_u, aux_u, threads, log, "u");
      const BasisBundle bundle_v = prepare_basis(cfg, grids, kappa_v, aux_v, threads, log, "v");
      const ReducedSystem sys_u = reduce(bundle_u.basis, M, A_u);
      const ReducedSystem sys_v = reduce(bundle_v.basis, M, A_v);
      const CoupledState coarse0{sys_u.project_fine(u0), sys_v.project_fine(v0)};
      log << "N=" << N << " m=" << bundle_u.layers << " dofs=" << sys_u.dim() << "+"
          << sys_v.dim() << "\n";

      for (int Nt : cfg.nt) {
        ReportRow row_u, row_v;
        row_u.scheme = cfg.scheme + ":u";
        row_v.scheme = cfg.scheme + ":v";
        row_u.H = row_v.H = grids.coarse.H;
        row_u.layers = row_v.layers = bundle_u.layers;
        row_u.Nt = row_v.Nt = Nt;
        row_u.basis = row_v.basis = cfg.basis_per_element;
        try {
          const CoupledState final_state = integrate_exponential_coupled(
              sys_u, sys_v, scheme, problem.reaction_u, problem.reaction_v, coarse0, Nt, T);
          const Vec lifted_u = sys_u.lift(final_state.u);
          const Vec lifted_v = sys_v.lift(final_state.v);
          const ErrorTriple err_u = error_norms(reference.u, lifted_u, M, A_u);
          const ErrorTriple err_v = error_norms(reference.v, lifted_v, M, A_v);
          row_u.eps_a = err_u.energy;
          row_u.eps_0 = err_u.l2;
          row_u.eps_inf = err_u.max;
          row_v.eps_a = err_v.energy;
          row_v.eps_0 = err_v.l2;
          row_v.eps_inf = err_v.max;
          if (cfg.write_fields) {
            dump_solution(cfg, fine, lifted_u, field_dump_name(cfg.scheme + "_u", N, Nt));
            dump_solution(cfg, fine, lifted_v, field_dump_name(cfg.scheme + "_v", N, Nt));
          }
        } catch (const std::exception& e) {
          row_u.failed = row_v.failed = true;
          row_u.message = row_v.message = e.what();
          result.any_failed = true;
          log << "row N=" << N << " Nt=" << Nt << " failed: " << e.what() << "\n";
        }
        result.rows.push_back(std::move(row_u));
        result.rows.push_back(std::move(row_v));
      }
    } catch (const std::exception& e) {
      for (int Nt : cfg.nt)
        for (const char* species : {":u", ":v"}) {
          ReportRow row;
          row.scheme = cfg.scheme + species;
          row.H = 1.0 / N;
          row.layers = cfg.layers;
          row.Nt = Nt;
          row.basis = cfg.basis_per_element;
          row.failed = true;
          row.message = e.what();
          result.rows.push_back(std::move(row));
        }
      result.any_failed = true;
      log << "coarse size N=" << N << " failed: " << e.what() << "\n";
    }
  }
  attach_rates(result.rows, cfg.nt.size() > 1);
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  ExperimentResult result =
      is_coupled_example(cfg.example) ? run_coupled(cfg, log) : run_single(cfg, log);
  result.table_path = (fs::path(cfg.out_dir) / "results.csv").string();
  emit_table(result.rows, result.table_path, cfg.timestamp);
  log << "table written to " << result.table_path << "\n";
  return result;
}

int build_basis_report(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const int threads = resolve_threads(cfg.threads);
  const CoefficientField kappa = load_kappa(cfg, cfg.kappa_file, cfg.seed, cfg.kappa_style);
  const Grids grids = build_grids(cfg.n_fine, cfg.coarse.front());
  const auto weight = spectral_weight(kappa, grids.pou);
  const AuxiliarySpace aux = build_auxiliary_space(grids.fine, grids.coarse, kappa, weight,
                                                   cfg.basis_per_element);
  const BasisBundle bundle = prepare_basis(cfg, grids, kappa, aux, threads, log, "");

  const fs::path path = fs::path(cfg.out_dir) / "basis_decay.csv";
  std::ofstream out(path);
  out << "element,eig";
  for (int l = 0; l <= bundle.layers; ++l) out << ",outside_l" << l;
  out << "\n";
  double worst_ratio = 0.0;
  for (int col = 0; col < bundle.basis.column_count(); ++col) {
    out << bundle.basis.columns[col].element << "," << bundle.basis.columns[col].eig;
    char cell[32];
    for (int l = 0; l <= bundle.layers; ++l) {
      std::snprintf(cell, sizeof cell, ",%.6e", bundle.basis.decay(col, l));
      out << cell;
    }
    out << "\n";
    for (int l = 1; l < bundle.layers; ++l) {
      const double denom = bundle.basis.decay(col, l);
      if (denom > 0.0)
        worst_ratio = std::max(worst_ratio, bundle.basis.decay(col, l + 1) / denom);
    }
  }
  log << "spectral gap " << bundle.basis.spectral_gap << ", worst per-layer energy ratio "
      << worst_ratio << "\n";
  log << "decay table written to " << path.string() << "\n";
  return 0;
}

int selftest(std::ostream& log) {
  bool ok = true;

  // phi routes against the direct series.
  {
    auto series = [](const Mat& N, int k) {
      Mat term = Mat::Identity(N.rows(), N.cols());
      double factorial = 1.0;
      for (int j = 1; j <= k; ++j) factorial *= j;
      term /= factorial;
      Mat sum = term;
      for (int j = 1; j <= 30; ++j) {
        term = (term * N).eval() / (j + k);
        sum += term;
      }
      return sum;
    };
    double worst = 0.0;
    std::uint64_t state = 12345;
    auto next_uniform = [&state]() {
      state ^= state << 13;
      state ^= state >> 7;
      state ^= state << 17;
      return (state >> 11) * 0x1.0p-53 - 0.5;
    };
    for (int trial = 0; trial < 10; ++trial) {
      Mat B(8, 8);
      for (int i = 0; i < 64; ++i) B(i / 8, i % 8) = next_uniform();
      Mat G = 0.5 * (B + B.transpose());
      const double delta = 0.7;
      const Mat N = -delta * G;
      for (const PhiSet& phis : {phi_set(G, delta), phi_set_augmented(G, delta)}) {
        worst = std::max(worst, (phis.phi0 - series(N, 0)).cwiseAbs().maxCoeff());
        worst = std::max(worst, (phis.phi1 - series(N, 1)).cwiseAbs().maxCoeff());
        worst = std::max(worst, (phis.phi2 - series(N, 2)).cwiseAbs().maxCoeff());
      }
    }
    log << "selftest: phi routes vs series, max deviation " << worst << "\n";
    ok = ok && worst < 1e-12;
  }

  // Linear exactness on a small multiscale setup.
  {
    const int n = 16, N = 4;
    const CoefficientField kappa = synth_field(3, 10.0, "channels", n);
    const Grids grids = build_grids(n, N);
    const auto weight = spectral_weight(kappa, grids.pou);
    const AuxiliarySpace aux =
        build_auxiliary_space(grids.fine, grids.coarse, kappa, weight, 3);
    const MultiscaleBasis basis = build_basis(grids.fine, grids.coarse, kappa, aux, 2);
    const SpMat M = assemble_mass(grids.fine);
    const SpMat A = assemble_stiffness(grids.fine, kappa);
    const ReducedSystem sys = reduce(basis, M, A);

    const Vec u0 = interpolate_interior(grids.fine, [](double x, double y) {
      return x * (1 - x) * y * (1 - y);
    });
    const Vec c0 = sys.project_fine(u0);
    const double T = 0.05;
    const Vec via_steps = integrate_exponential(sys, ExpScheme::EIRK1, Reaction{}, c0, 7, T);

    const Mat E = expm_pade13(-T * sys.G);
    const Vec direct = sys.from_spectral(E * sys.to_spectral(c0));
    const double deviation = (via_steps - direct).norm() / direct.norm();
    log << "selftest: linear exactness deviation " << deviation << "\n";
    ok = ok && deviation < 1e-10;

    // Eigenpair residuals on the same setup.
    double worst = 0.0;
    for (const ElementBasis& element : aux.elements) {
      const SpMat A_i = assemble_stiffness(grids.fine, kappa,
                                           grids.coarse.element_cells(element.element),
                                           element.nodes);
      const double anorm = Mat(A_i).cwiseAbs().rowwise().sum().maxCoeff();
      for (int j = 0; j < aux.basis_per_element; ++j) {
        const Vec residual =
            A_i * element.vectors.col(j) - element.eigenvalues[j] * (element.S * element.vectors.col(j));
        worst = std::max(worst, residual.norm() / anorm);
      }
    }
    log << "selftest: worst eigenpair residual " << worst << "\n";
    ok = ok && worst < 1e-8;
  }

  log << (ok ? "selftest: all checks passed\n" : "selftest: FAILURES detected\n");
  return ok ? 0 : 1;
}

}  // namespace cemint
