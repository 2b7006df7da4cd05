#include "ahres/extension.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

namespace ahres {

Real ExtendedCoeffs::lambda_over_w(int mode_index, Real mu) const {
  return mode_eigenvalue(model, mode_index) / w(mu);
}

ExtendedCoeffs derive_extended_coeffs(const EvenMetricModel& model) {
  ExtendedCoeffs c;
  c.n = model.n;
  c.model = model;
  const int n = model.n;
  auto gs = [model](Real mu) { return (model.n - 1) * model.warp_d1(mu) / model.warp(mu); };
  // The conjugation produces the first-order term with gamma entering with the
  // opposite sign of (n-1) w'/w; gp is that combination.
  auto gp = [gs](Real mu) { return -gs(mu); };
  c.gamma = gs;
  c.w = [model](Real mu) { return model.warp(mu); };
  c.dw = [model](Real mu) { return model.warp_d1(mu); };
  c.a1 = [](Real) { return Real(0); };
  c.da1 = [](Real) { return Real(0); };
  c.a2 = [](Real mu) { return -mu / (2 * (1 + mu)); };
  c.da2 = [](Real mu) { return -1 / (2 * (1 + mu) * (1 + mu)); };
  c.a3 = [](Real mu) { return 1 / (1 + mu) - mu / (4 * (1 + mu) * (1 + mu)) - 1; };
  c.da3 = [](Real mu) {
    const Real s = 1 + mu;
    return -1 / (s * s) - (1 - mu) / (4 * s * s * s);
  };
  c.b1 = [gp](Real mu) { return Cplx(0, 2 * gp(mu)); };
  c.b2 = [gp](Real mu) {
    const Real s = 1 + mu, g = gp(mu);
    return Cplx(0, mu / (s * s) - 1 / s + g * mu / (2 * s) - g);
  };
  c.c1 = [gp, n](Real mu) { return Cplx(gp(mu) * (n - 1) / 2, 0); };
  return c;
}

Cplx apply_extended_operator(const ExtendedCoeffs& c, Cplx sigma, const Jet2& u, Real mu, int mode_index) {
  // D u = -i u', D^2 u = -u''.
  const Cplx Du = -kI * u.d1;
  const Cplx D2u = -u.d2;
  return 4 * (1 + c.a1(mu)) * mu * D2u - 4 * (1 + c.a2(mu)) * sigma * Du - (1 + c.a3(mu)) * sigma * sigma * u.v +
         c.lambda_over_w(mode_index, mu) * u.v - Real(4) * kI * Du + c.b1(mu) * mu * Du + c.b2(mu) * sigma * u.v +
         c.c1(mu) * u.v;
}

Real verify_conjugation_identity(const ExtendedCoeffs& coeffs, const EvenMetricModel& model, Cplx sigma,
                                 const TestFunction& test_fn, Real mu, int mode_index) {
  if (!(mu > 0)) throw Error(ErrorKind::domain, "conjugation identity is evaluated at mu > 0 only");
  const int n = model.n;
  const Jet2 u = test_fn(mu);
  const Real lmu = std::log(mu), l1 = std::log1p(mu);

  // g = p u with p = mu^{alpha} (1+mu)^{beta}.
  const Cplx alpha = -kI * sigma / Real(2) + Real(n + 1) / 4 - Real(0.5L);
  const Cplx beta = kI * sigma / Real(4);
  const Cplx p = std::exp(alpha * lmu + beta * l1);
  const Cplx L1 = alpha / mu + beta / (1 + mu);
  const Cplx L2 = L1 * L1 - alpha / (mu * mu) - beta / ((1 + mu) * (1 + mu));
  const Cplx g0 = p * u.v;
  const Cplx g1 = p * (L1 * u.v + u.d1);
  const Cplx g2 = p * (L2 * u.v + Real(2) * L1 * u.d1 + u.d2);

  // F = mu^{(3-n)/2} W g', differentiated term by term.
  const Real w = model.warp(mu), dw = model.warp_d1(mu);
  const Real W = std::pow(w, Real(n - 1) / 2);
  const Real dW = W * (n - 1) * dw / (2 * w);
  const Real m3 = std::pow(mu, Real(3 - n) / 2);
  const Real dm3 = Real(3 - n) / 2 * std::pow(mu, Real(1 - n) / 2);
  const Cplx dF = (dm3 * W + m3 * dW) * g1 + m3 * W * g2;
  const Real lam = mode_eigenvalue(model, mode_index);
  const Cplx lap = -4 * std::pow(mu, Real(n + 1) / 2) / W * dF + mu * lam / w * g0;
  const Cplx inner = lap - (Real((n - 1) * (n - 1)) / 4 + sigma * sigma) * g0;
  const Cplx pre = std::exp((-kI * sigma / Real(4)) * l1 - Real(0.5L) * lmu +
                            (kI * sigma / Real(2) - Real(n + 1) / 4) * lmu);
  const Cplx rhs = pre * inner;

  const Cplx lhs = apply_extended_operator(coeffs, sigma, u, mu, mode_index);
  // Scale: sum of magnitudes of the individual terms of the assembled form.
  const Cplx Du = -kI * u.d1;
  Real scale = std::abs(4 * mu * u.d2) + std::abs(4 * (1 + coeffs.a2(mu)) * sigma * Du) +
               std::abs((1 + coeffs.a3(mu)) * sigma * sigma * u.v) + std::abs(lam / w * u.v) + std::abs(Real(4) * Du) +
               std::abs(coeffs.b1(mu) * mu * Du) + std::abs(coeffs.b2(mu) * sigma * u.v) +
               std::abs(coeffs.c1(mu) * u.v);
  if (scale == 0) scale = 1;
  return std::abs(lhs - rhs) / scale;
}

namespace {

Real smoothstep5(Real t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return t * t * t * (10 - 15 * t + 6 * t * t);
}

Real phi_boundary(Real mu) { return std::log(mu) / 2 - std::log1p(mu) / 4; }
Real dphi_boundary(Real mu) { return 1 / (2 * mu) - 1 / (4 * (1 + mu)); }

}  // namespace

Real PhaseWeight::dphi(Real mu) const {
  const Real t = (mu - mu_match) / (plateau_a - mu_match);
  return (1 - smoothstep5(t)) * dphi_boundary(mu);
}

Real PhaseWeight::phi(Real mu) const {
  if (mu <= mu_match) return phi_boundary(mu);
  const Real top = std::min(mu, plateau_a);
  auto f = [this](Real s) { return dphi(s); };
  return phi_boundary(mu_match) + boost::math::quadrature::gauss<Real, 30>::integrate(f, mu_match, top);
}

Real PhaseWeight::boundary_exp_phi(Real mu) const { return std::sqrt(mu) * std::pow(1 + mu, Real(-0.25L)); }

Real PhaseWeight::dphi_norm_sq(Real mu) const {
  const Real v = 2 * mu * dphi(mu);
  return v * v;
}

PhaseWeight build_phase_weight(const EvenMetricModel& model, Real plateau_a, Real plateau_b, Real mu_match) {
  if (!(mu_match > 0) || !(plateau_a > mu_match) || !(plateau_b >= plateau_a) || plateau_b > model.mu_right)
    throw Error(ErrorKind::validation, "phase weight needs 0 < mu_match < plateau_a <= plateau_b <= mu_right");
  PhaseWeight pw;
  pw.mu_match = mu_match;
  pw.plateau_a = plateau_a;
  pw.plateau_b = plateau_b;
  pw.mu_right = model.mu_right;
  for (int k = 1; k <= 1000; ++k) {
    const Real mu = model.mu_right * k / 1000;
    const Real v = pw.dphi_norm_sq(mu);
    pw.max_sampled_norm_sq = std::max(pw.max_sampled_norm_sq, v);
    if (!(v < 1)) {
      std::ostringstream os;
      os << "|d phi|_G0 >= 1 at mu = " << static_cast<double>(mu);
      throw Error(ErrorKind::numerical, os.str());
    }
  }
  return pw;
}

}  // namespace ahres
