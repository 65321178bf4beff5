// Copyright (c) 2026 the cemint developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "cemint/problems.hpp"
#include "cemint/reduced.hpp"

namespace cemint {

// phi_0(-delta G), phi_1(-delta G), phi_2(-delta G) for one step size.
struct PhiSet {
  double delta = 0.0;
  Mat phi0;
  Mat phi1;
  Mat phi2;
};

// Scalar phi functions, stable for arguments of either sign.
double phi1_scalar(double z);
double phi2_scalar(double z);

// Spectral evaluation for symmetric G; all three matrices share one
// eigendecomposition, so the recurrence holds to round-off.
PhiSet phi_set(const Mat& G, double delta);

// Pade degree-13 scaling-and-squaring exponential of a general matrix.
Mat expm_pade13(const Mat& X);

// phi functions read off the exponential of the augmented block matrix
// [[-delta G, I, 0], [0, 0, I], [0, 0, 0]]. Cross-checked against the
// spectral route in the tests; cost grows with log ||delta G||.
PhiSet phi_set_augmented(const Mat& G, double delta);

// PhiSet conjugated into coarse coefficients: C^{-T} phi_k(-delta G) C^{T}.
struct ExpPropagator {
  double delta = 0.0;
  Mat phi0;
  Mat phi1;
  Mat phi2;
};

ExpPropagator bind_phis(const ReducedSystem& sys, const PhiSet& phis);

enum class ExpScheme { EIRK1, EIRK22 };
ExpScheme parse_exp_scheme(const std::string& name);

Vec eirk1_step(const ReducedSystem& sys, const ExpPropagator& prop, const Reaction& f,
               const Vec& coarse);
Vec eirk22_step(const ReducedSystem& sys, const ExpPropagator& prop, const Reaction& f,
                const Vec& coarse);

// Nt uniform steps with one PhiSet; throws on non-finite states naming the
// step. Checkpoints, when requested, collect the state after every step.
Vec integrate_exponential(const ReducedSystem& sys, ExpScheme scheme, const Reaction& f,
                          const Vec& coarse0, int Nt, double T,
                          std::vector<Vec>* checkpoints = nullptr);

// Two species advanced with the same scheme; the coupling reactions are
// evaluated nodewise on the lifted fine representations at every stage.
struct CoupledState {
  Vec u;
  Vec v;
};

CoupledState integrate_exponential_coupled(
    const ReducedSystem& sys_u, const ReducedSystem& sys_v, ExpScheme scheme,
    const std::function<double(double, double)>& f_u,
    const std::function<double(double, double)>& f_v, const CoupledState& coarse0, int Nt,
    double T);

}  // namespace cemint
