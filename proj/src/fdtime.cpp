// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#include "cemint/fdtime.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cemint {

ThetaFineStepper::ThetaFineStepper(const SpMat& M, const SpMat& A, double delta, ThetaConfig cfg)
    : M_(M), A_(A), delta_(delta), cfg_(cfg) {
  if (delta < 0.0) throw std::invalid_argument("theta stepper: negative step size");
  SpMat system = M_ + (delta_ * cfg_.theta) * A_;
  factor_.compute(system);
  if (factor_.info() != Eigen::Success)
    throw std::runtime_error("theta stepper: factorization of (M + delta*theta*A) failed");
}

Vec ThetaFineStepper::step(const Vec& u_prev, const Reaction& f) const {
  if (delta_ == 0.0) return u_prev;
  const double explicit_weight = delta_ * (1.0 - cfg_.theta);
  Vec rhs_fixed = M_ * u_prev - explicit_weight * (A_ * u_prev);
  if (f.is_zero()) return factor_.solve(rhs_fixed);

  const Vec load_prev = nonlinear_load(M_, f.f, u_prev);
  if (cfg_.strategy == ThetaConfig::Strategy::Lagged)
    return factor_.solve(rhs_fixed + delta_ * load_prev);

  rhs_fixed += explicit_weight * load_prev;
  const double implicit_weight = delta_ * cfg_.theta;
  Vec iterate = u_prev;
  double residual = 0.0;
  for (int k = 0; k < cfg_.picard_max; ++k) {
    const Vec next =
        factor_.solve(rhs_fixed + implicit_weight * nonlinear_load(M_, f.f, iterate));
    residual = (next - iterate).norm() / std::max(next.norm(), 1e-300);
    iterate = next;
    if (residual <= cfg_.picard_tol) return iterate;
  }
  throw std::runtime_error("Picard iteration did not converge within " +
                           std::to_string(cfg_.picard_max) +
                           " iterations (last relative change " + std::to_string(residual) + ")");
}

Vec theta_integrate_fine(const SpMat& M, const SpMat& A, ThetaConfig cfg, const Reaction& f,
                         const Vec& u0, int Nt, double T, std::vector<Vec>* checkpoints) {
  if (Nt < 1) throw std::invalid_argument("theta integrate: need at least one time step");
  ThetaFineStepper stepper(M, A, T / Nt, cfg);
  Vec state = u0;
  for (int n = 1; n <= Nt; ++n) {
    state = stepper.step(state, f);
    if (!state.allFinite())
      throw std::runtime_error("theta scheme blew up at step " + std::to_string(n));
    if (checkpoints) checkpoints->push_back(state);
  }
  return state;
}

Vec theta_integrate_coarse(const ReducedSystem& sys, ThetaConfig cfg, const Reaction& f,
                           const Vec& coarse0, int Nt, double T) {
  if (Nt < 1) throw std::invalid_argument("theta integrate: need at least one time step");
  const double delta = T / Nt;
  const auto d = sys.scale.asDiagonal();
  const Mat system = d * (sys.M0 + (delta * cfg.theta) * sys.A0) * d;
  Eigen::LLT<Mat> equilibrated(system);
  if (equilibrated.info() != Eigen::Success)
    throw std::runtime_error("coarse theta stepper: factorization failed");
  auto solve = [&](const Vec& rhs) { return Vec(d * equilibrated.solve(d * rhs)); };

  auto coarse_load = [&sys, &f](const Vec& coarse) {
    return Vec(sys.R0.transpose() * nonlinear_load(sys.M, f.f, sys.lift(coarse)));
  };

  Vec state = coarse0;
  const double explicit_weight = delta * (1.0 - cfg.theta);
  const double implicit_weight = delta * cfg.theta;
  for (int n = 1; n <= Nt; ++n) {
    Vec rhs_fixed = sys.M0 * state - explicit_weight * (sys.A0 * state);
    if (f.is_zero()) {
      state = solve(rhs_fixed);
    } else if (cfg.strategy == ThetaConfig::Strategy::Lagged) {
      state = solve(rhs_fixed + delta * coarse_load(state));
    } else {
      rhs_fixed += explicit_weight * coarse_load(state);
      Vec iterate = state;
      bool converged = false;
      for (int k = 0; k < cfg.picard_max; ++k) {
        const Vec next = solve(rhs_fixed + implicit_weight * coarse_load(iterate));
        const double change = (next - iterate).norm();
        iterate = next;
        if (change <= cfg.picard_tol * std::max(iterate.norm(), 1e-300)) {
          converged = true;
          break;
        }
      }
      if (!converged)
        throw std::runtime_error("coarse Picard iteration did not converge at step " +
                                 std::to_string(n));
      state = iterate;
    }
    if (!state.allFinite())
      throw std::runtime_error("coarse theta scheme blew up at step " + std::to_string(n));
  }
  return state;
}

Vec reference_solution(const SpMat& M, const SpMat& A, const Reaction& f, const Vec& u0,
                       int Nt_ref, double T, ThetaConfig cfg) {
  return theta_integrate_fine(M, A, cfg, f, u0, Nt_ref, T);
}

CoupledFine coupled_reference_solution(const SpMat& M, const SpMat& A_u, const SpMat& A_v,
                                       const std::function<double(double, double)>& f_u,
                                       const std::function<double(double, double)>& f_v,
                                       const Vec& u0, const Vec& v0, int Nt_ref, double T,
                                       ThetaConfig cfg) {
  if (Nt_ref < 1) throw std::invalid_argument("coupled reference: need at least one time step");
  const double delta = T / Nt_ref;
  Eigen::SimplicialLDLT<SpMat> factor_u(SpMat(M + (delta * cfg.theta) * A_u));
  Eigen::SimplicialLDLT<SpMat> factor_v(SpMat(M + (delta * cfg.theta) * A_v));
  if (factor_u.info() != Eigen::Success || factor_v.info() != Eigen::Success)
    throw std::runtime_error("coupled reference: factorization failed");

  auto loads = [&](const Vec& u, const Vec& v, Vec& load_u, Vec& load_v) {
    Vec fu(u.size()), fv(v.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      fu[i] = f_u(u[i], v[i]);
      fv[i] = f_v(u[i], v[i]);
    }
    if (!fu.allFinite() || !fv.allFinite())
      throw std::runtime_error("coupled reactions produced non-finite values");
    load_u = M * fu;
    load_v = M * fv;
  };

  const double explicit_weight = delta * (1.0 - cfg.theta);
  const double implicit_weight = delta * cfg.theta;
  Vec u = u0, v = v0;
  for (int n = 1; n <= Nt_ref; ++n) {
    Vec load_u, load_v;
    loads(u, v, load_u, load_v);
    const Vec rhs_u = M * u - explicit_weight * (A_u * u) + explicit_weight * load_u;
    const Vec rhs_v = M * v - explicit_weight * (A_v * v) + explicit_weight * load_v;

    Vec iter_u = u, iter_v = v;
    if (cfg.strategy == ThetaConfig::Strategy::Lagged) {
      iter_u = factor_u.solve(rhs_u + implicit_weight * load_u);
      iter_v = factor_v.solve(rhs_v + implicit_weight * load_v);
    } else {
      bool converged = false;
      for (int k = 0; k < cfg.picard_max; ++k) {
        Vec cur_u, cur_v;
        loads(iter_u, iter_v, cur_u, cur_v);
        const Vec next_u = factor_u.solve(rhs_u + implicit_weight * cur_u);
        const Vec next_v = factor_v.solve(rhs_v + implicit_weight * cur_v);
        const double change = (next_u - iter_u).norm() + (next_v - iter_v).norm();
        iter_u = next_u;
        iter_v = next_v;
        if (change <= cfg.picard_tol * std::max(iter_u.norm() + iter_v.norm(), 1e-300)) {
          converged = true;
          break;
        }
      }
      if (!converged)
        throw std::runtime_error("coupled Picard iteration did not converge at step " +
                                 std::to_string(n));
    }
    u = iter_u;
    v = iter_v;
    if (!u.allFinite() || !v.allFinite())
      throw std::runtime_error("coupled reference blew up at step " + std::to_string(n));
  }
  return {u, v};
}

}  // namespace cemint
