// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/SparseCholesky>

#include "cemint/problems.hpp"
#include "cemint/reduced.hpp"

namespace cemint {

// theta = 1 is backward Euler, theta = 1/2 Crank-Nicolson. The implicit
// reaction is resolved either by Picard iteration or by lagging it to the
// previous time level.
struct ThetaConfig {
  double theta = 1.0;
  enum class Strategy { Picard, Lagged } strategy = Strategy::Picard;
  double picard_tol = 1e-10;
  int picard_max = 50;

  static ThetaConfig backward_euler() { return {}; }
  static ThetaConfig crank_nicolson() { return {0.5}; }
};

// Fine-grid stepper; (M + delta*theta*A) is factorized once and reused.
class ThetaFineStepper {
 public:
  ThetaFineStepper(const SpMat& M, const SpMat& A, double delta, ThetaConfig cfg);
  Vec step(const Vec& u_prev, const Reaction& f) const;
  double delta() const { return delta_; }

 private:
  const SpMat M_;
  const SpMat A_;
  double delta_;
  ThetaConfig cfg_;
  Eigen::SimplicialLDLT<SpMat> factor_;
};

Vec theta_integrate_fine(const SpMat& M, const SpMat& A, ThetaConfig cfg, const Reaction& f,
                         const Vec& u0, int Nt, double T,
                         std::vector<Vec>* checkpoints = nullptr);

// Same scheme on the reduced operators.
Vec theta_integrate_coarse(const ReducedSystem& sys, ThetaConfig cfg, const Reaction& f,
                           const Vec& coarse0, int Nt, double T);

// Fine backward-Euler reference; ground truth for the error reports.
Vec reference_solution(const SpMat& M, const SpMat& A, const Reaction& f, const Vec& u0,
                       int Nt_ref, double T, ThetaConfig cfg = ThetaConfig::backward_euler());

// Coupled fine reference: both species advanced together, the reactions
// resolved inside one Picard loop per step.
struct CoupledFine {
  Vec u;
  Vec v;
};
CoupledFine coupled_reference_solution(const SpMat& M, const SpMat& A_u, const SpMat& A_v,
                                       const std::function<double(double, double)>& f_u,
                                       const std::function<double(double, double)>& f_v,
                                       const Vec& u0, const Vec& v0, int Nt_ref, double T,
                                       ThetaConfig cfg = ThetaConfig::backward_euler());

}  // namespace cemint
