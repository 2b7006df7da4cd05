#pragma once

#include <functional>

#include "ahres/geometry.hpp"

namespace ahres {

// Coefficients of the extended operator, D = -i d/dmu:
//   P_sigma = 4(1+a1) mu D^2 - 4(1+a2) sigma D - (1+a3) sigma^2 + Delta_h
//             - 4i D + b1 mu D + b2 sigma + c1.
// Stored as callables so tests can perturb individual entries.
struct ExtendedCoeffs {
  int n = 2;
  std::function<Real(Real)> a1, a2, a3;
  std::function<Real(Real)> da1, da2, da3;
  std::function<Cplx(Real)> b1, b2, c1;
  std::function<Real(Real)> gamma;
  std::function<Real(Real)> w, dw;
  EvenMetricModel model;

  // lambda_mode / w(mu); no interval check so it can be used on grids.
  Real lambda_over_w(int mode_index, Real mu) const;
};

ExtendedCoeffs derive_extended_coeffs(const EvenMetricModel& model);

// Value and first two derivatives of a test function.
struct Jet2 {
  Cplx v, d1, d2;
};
using TestFunction = std::function<Jet2(Real)>;

// Relative difference between the assembled P_sigma applied to test_fn and the
// literal conjugated Laplacian
//   (1+mu)^{-i s/4} mu^{-1/2} mu^{i s/2-(n+1)/4} (Delta - (n-1)^2/4 - s^2)
//   mu^{-i s/2+(n+1)/4} mu^{-1/2} (1+mu)^{i s/4},
// with Delta evaluated as -4 mu^{(n+1)/2} W^{-1} d(mu^{(3-n)/2} W d) + mu lambda/w,
// W = w^{(n-1)/2}.
Real verify_conjugation_identity(const ExtendedCoeffs& coeffs, const EvenMetricModel& model, Cplx sigma,
                                 const TestFunction& test_fn, Real mu, int mode_index = 0);

// Value of the assembled operator on a jet, shared by the oracle and grid checks.
Cplx apply_extended_operator(const ExtendedCoeffs& coeffs, Cplx sigma, const Jet2& u, Real mu, int mode_index);

// Interior phase weight with e^phi = mu^{1/2}(1+mu)^{-1/4} near the boundary and
// phi constant from the plateau start on. The derivative is blended by a
// monotone quintic so |d phi|_{G0} never exceeds the boundary value.
struct PhaseWeight {
  Real mu_match = 0.5L;
  Real plateau_a = 1.5L, plateau_b = 3.5L;
  Real mu_right = 4;

  Real phi(Real mu) const;
  Real dphi(Real mu) const;
  Real boundary_exp_phi(Real mu) const;  // mu^{1/2}(1+mu)^{-1/4}
  Real dphi_norm_sq(Real mu) const;      // |d phi|^2_{G0} = 4 mu^2 phi'^2
  Real max_sampled_norm_sq = 0;          // certification result over 1e3 samples
};

PhaseWeight build_phase_weight(const EvenMetricModel& model, Real plateau_a, Real plateau_b,
                               Real mu_match = 0.5L);

}  // namespace ahres
