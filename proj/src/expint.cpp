// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include "cemint/expint.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cemint {

double phi1_scalar(double z) {
  if (z == 0.0) return 1.0;
  return std::expm1(z) / z;
}

double phi2_scalar(double z) {
  if (std::abs(z) < 0.1) {
    // phi_2(z) = sum_k z^k / (k+2)!
    double term = 0.5;
    double sum = term;
    for (int k = 1; k <= 16; ++k) {
      term *= z / (k + 2);
      sum += term;
    }
    return sum;
  }
  return (std::expm1(z) - z) / (z * z);
}

PhiSet phi_set(const Mat& G, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("phi_set: step size must be positive");
  Eigen::SelfAdjointEigenSolver<Mat> eig(G);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("phi_set: eigendecomposition of the generator failed");
  const Mat& Q = eig.eigenvectors();
  const Vec z = -delta * eig.eigenvalues();

  auto conjugate = [&Q](const Vec& diag) {
    Mat result = (Q * diag.asDiagonal()) * Q.transpose();
    return Mat(0.5 * (result + result.transpose()));
  };
  PhiSet phis;
  phis.delta = delta;
  phis.phi0 = conjugate(z.array().exp().matrix());
  phis.phi1 = conjugate(z.unaryExpr([](double v) { return phi1_scalar(v); }));
  phis.phi2 = conjugate(z.unaryExpr([](double v) { return phi2_scalar(v); }));
  if (!phis.phi0.allFinite() || !phis.phi1.allFinite() || !phis.phi2.allFinite())
    throw std::runtime_error("phi_set: non-finite entries in the phi matrices");
  return phis;
}

Mat expm_pade13(const Mat& X) {
  static const double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
  const double theta13 = 5.371920351148152;
  const Eigen::Index n = X.rows();
  const double norm = X.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));

  const Mat A = X / std::pow(2.0, squarings);
  const Mat I = Mat::Identity(n, n);
  const Mat A2 = A * A;
  const Mat A4 = A2 * A2;
  const Mat A6 = A4 * A2;
  const Mat U =
      A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 +
           b[1] * I);
  const Mat V =
      A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

  Mat F = Eigen::PartialPivLU<Mat>(V - U).solve(V + U);
  for (int s = 0; s < squarings; ++s) F = (F * F).eval();
  return F;
}

PhiSet phi_set_augmented(const Mat& G, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("phi_set: step size must be positive");
  const Eigen::Index n = G.rows();
  Mat X = Mat::Zero(3 * n, 3 * n);
  X.topLeftCorner(n, n) = -delta * G;
  X.block(0, n, n, n).setIdentity();
  X.block(n, 2 * n, n, n).setIdentity();
  const Mat E = expm_pade13(X);
  PhiSet phis;
  phis.delta = delta;
  phis.phi0 = E.topLeftCorner(n, n);
  phis.phi1 = E.block(0, n, n, n);
  phis.phi2 = E.block(0, 2 * n, n, n);
  if (!phis.phi0.allFinite() || !phis.phi1.allFinite() || !phis.phi2.allFinite())
    throw std::runtime_error("phi_set: non-finite entries in the phi matrices");
  return phis;
}

ExpPropagator bind_phis(const ReducedSystem& sys, const PhiSet& phis) {
  const Mat U = sys.M0s_llt.matrixU();
  const Vec& d = sys.scale;
  auto conjugate = [&U, &d](const Mat& phi) {
    // C^{-T} phi C^{T} with M0 = C C^T and C = D^{-1} chol(D M0 D)
    const Mat inner = U.triangularView<Eigen::Upper>().solve((phi * U).eval());
    return Mat(d.asDiagonal() * inner * d.cwiseInverse().asDiagonal());
  };
  ExpPropagator prop;
  prop.delta = phis.delta;
  prop.phi0 = conjugate(phis.phi0);
  prop.phi1 = conjugate(phis.phi1);
  prop.phi2 = conjugate(phis.phi2);
  return prop;
}

ExpScheme parse_exp_scheme(const std::string& name) {
  if (name == "EIRK1") return ExpScheme::EIRK1;
  if (name == "EIRK22") return ExpScheme::EIRK22;
  throw std::invalid_argument("unknown exponential scheme '" + name + "'");
}

namespace {

// Coefficients of the M-orthogonal projection of f(u) onto the coarse space.
Vec project_reaction(const ReducedSystem& sys, const Reaction& f, const Vec& coarse) {
  const Vec lifted = sys.lift(coarse);
  return sys.solve_mass(sys.R0.transpose() * nonlinear_load(sys.M, f.f, lifted));
}

}  // namespace

// Steps are evaluated in the tableau form phi0*c + delta*phi1*g rather than
// c + delta*phi1*(g - L c); the two are algebraically identical through the
// phi recurrence, but the latter cancels catastrophically on strongly damped
// modes when delta*lambda is large.
Vec eirk1_step(const ReducedSystem& sys, const ExpPropagator& prop, const Reaction& f,
               const Vec& coarse) {
  Vec next = prop.phi0 * coarse;
  if (!f.is_zero()) next += prop.delta * (prop.phi1 * project_reaction(sys, f, coarse));
  return next;
}

Vec eirk22_step(const ReducedSystem& sys, const ExpPropagator& prop, const Reaction& f,
                const Vec& coarse) {
  if (f.is_zero()) return Vec(prop.phi0 * coarse);
  const Vec g_prev = project_reaction(sys, f, coarse);
  const Vec stage = prop.phi0 * coarse + prop.delta * (prop.phi1 * g_prev);
  const Vec g_stage = project_reaction(sys, f, stage);
  return stage + prop.delta * (prop.phi2 * (g_stage - g_prev));
}

Vec integrate_exponential(const ReducedSystem& sys, ExpScheme scheme, const Reaction& f,
                          const Vec& coarse0, int Nt, double T, std::vector<Vec>* checkpoints) {
  if (Nt < 1) throw std::invalid_argument("integrate: need at least one time step");
  if (T <= 0.0) throw std::invalid_argument("integrate: final time must be positive");
  const double delta = T / Nt;
  const ExpPropagator prop = bind_phis(sys, phi_set(sys.G, delta));

  Vec state = coarse0;
  for (int n = 1; n <= Nt; ++n) {
    try {
      state = scheme == ExpScheme::EIRK1 ? eirk1_step(sys, prop, f, state)
                                         : eirk22_step(sys, prop, f, state);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(std::string(e.what()) + " at step " + std::to_string(n) + " of " +
                               std::to_string(Nt));
    }
    if (!state.allFinite())
      throw std::runtime_error("exponential integrator blew up at step " + std::to_string(n) +
                               " of " + std::to_string(Nt));
    if (checkpoints) checkpoints->push_back(state);
  }
  return state;
}

CoupledState integrate_exponential_coupled(
    const ReducedSystem& sys_u, const ReducedSystem& sys_v, ExpScheme scheme,
    const std::function<double(double, double)>& f_u,
    const std::function<double(double, double)>& f_v, const CoupledState& coarse0, int Nt,
    double T) {
  if (Nt < 1) throw std::invalid_argument("integrate: need at least one time step");
  const double delta = T / Nt;
  const ExpPropagator prop_u = bind_phis(sys_u, phi_set(sys_u.G, delta));
  const ExpPropagator prop_v = bind_phis(sys_v, phi_set(sys_v.G, delta));

  auto project_pair = [&](const Vec& cu, const Vec& cv, Vec& gu, Vec& gv) {
    const Vec U = sys_u.lift(cu);
    const Vec V = sys_v.lift(cv);
    Vec fu(U.size()), fv(V.size());
    for (Eigen::Index i = 0; i < U.size(); ++i) {
      fu[i] = f_u(U[i], V[i]);
      fv[i] = f_v(U[i], V[i]);
    }
    if (!fu.allFinite() || !fv.allFinite())
      throw std::runtime_error("coupled reactions produced non-finite values");
    gu = sys_u.solve_mass(sys_u.R0.transpose() * (sys_u.M * fu));
    gv = sys_v.solve_mass(sys_v.R0.transpose() * (sys_v.M * fv));
  };

  CoupledState state = coarse0;
  for (int n = 1; n <= Nt; ++n) {
    Vec gu, gv;
    project_pair(state.u, state.v, gu, gv);
    Vec stage_u = prop_u.phi0 * state.u + delta * (prop_u.phi1 * gu);
    Vec stage_v = prop_v.phi0 * state.v + delta * (prop_v.phi1 * gv);
    if (scheme == ExpScheme::EIRK1) {
      state.u = std::move(stage_u);
      state.v = std::move(stage_v);
    } else {
      Vec gu1, gv1;
      project_pair(stage_u, stage_v, gu1, gv1);
      state.u = stage_u + delta * (prop_u.phi2 * (gu1 - gu));
      state.v = stage_v + delta * (prop_v.phi2 * (gv1 - gv));
    }
    if (!state.u.allFinite() || !state.v.allFinite())
      throw std::runtime_error("exponential integrator blew up at step " + std::to_string(n) +
                               " of " + std::to_string(Nt));
  }
  return state;
}

}  // namespace cemint
