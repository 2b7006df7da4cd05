#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ahres/types.hpp"

namespace ahres {

enum class CrossSection { circle, round_sphere };
enum class ModelType { hyperbolic_plane, hyperbolic_space_3, cylinder, funnel, custom };

// Even conformally compact metric g0 = (dx^2 + w(mu) h0)/x^2 with mu = x^2.
// Model data are functions of mu only, so evenness holds by construction.
struct EvenMetricModel {
  ModelType type = ModelType::hyperbolic_plane;
  int n = 2;
  CrossSection cross_section = CrossSection::circle;
  Real ell_tilde = 1;             // cylinder/funnel: ell / (2 pi)
  std::vector<Real> custom_warp;  // custom: polynomial coefficients in mu
  Real mu_left = -0.5L;
  Real mu_right = 4;
  bool trapping_flag = false;

  Real warp(Real mu) const;
  Real warp_d1(Real mu) const;
  Real warp_d2(Real mu) const;
  // True when w vanishes at mu_right (polar center); false for a symmetric neck.
  bool has_center() const;
  std::string name() const;
};

EvenMetricModel hyperbolic_plane(Real mu_left = -0.5L, Real mu_right = 4);
EvenMetricModel hyperbolic_space_3(Real mu_left = -0.5L, Real mu_right = 4);
EvenMetricModel cylinder(Real ell, Real mu_left = -0.5L, Real mu_right = 4);
EvenMetricModel funnel(Real ell, Real mu_left = -0.5L, Real mu_right = 4);
EvenMetricModel custom_model(int n, std::vector<Real> warp_poly, Real mu_left, Real mu_right);

// Throws a domain error if the sampled warp is not positive on [mu_left, mu_right).
void validate_model(const EvenMetricModel& model);

// gamma = 2 d/dmu log sqrt(det h) = (n-1) w'/w.
Real gamma_from_metric(const EvenMetricModel& model, Real mu);

// Eigenvalue of the cross-section Laplacian on the given mode:
// m^2 on the circle, l(l+n-2) on the round (n-1)-sphere.
Real mode_eigenvalue(const EvenMetricModel& model, int mode_index);

// lambda_mode / w(mu).
Real mode_laplacian_coeff(const EvenMetricModel& model, int mode_index, Real mu);

struct EvennessReport {
  bool pass = false;
  std::vector<Real> even_coeffs;  // c0, c2, c4, c6
  std::vector<Real> odd_coeffs;   // c1, c3, c5, c7
  std::vector<int> offending;     // orders of odd coefficients above tolerance
};

// Estimates Taylor coefficients of user_h at x = 0 from symmetric samples.
EvennessReport validate_evenness(const std::function<Real(Real)>& user_h, Real tolerance);

}  // namespace ahres
