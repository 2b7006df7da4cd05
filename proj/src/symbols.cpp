#include "ahres/symbols.hpp"

#include <cmath>

namespace ahres {

namespace {

// Real part of 4(1+a1) mu xi^2 - 4(1+a2) A xi - (1+a3) B + |eta|^2 with
// A = Re(param) and B = Re(param^2); A = B = 0 is the classical symbol.
struct SymbolParams {
  Real A = 0, B = 0;
};

SymbolParams params_for(const FieldSpec& k) {
  if (k.kind == FieldKind::classical) return {};
  return {k.param.real(), (k.param * k.param).real()};
}

Real dmu_symbol(const ExtendedCoeffs& c, const PhasePoint& pt, SymbolParams s) {
  const Real mu = pt.mu, w = c.w(mu);
  return 4 * c.da1(mu) * mu * pt.xi * pt.xi + 4 * (1 + c.a1(mu)) * pt.xi * pt.xi - 4 * c.da2(mu) * s.A * pt.xi -
         c.da3(mu) * s.B - pt.eta * pt.eta * c.dw(mu) / (w * w);
}

}  // namespace

SpectralParam SpectralParam::from_sigma(Cplx sigma) {
  SpectralParam p;
  p.sigma = sigma;
  const Real a = std::abs(sigma);
  if (a > 0) {
    p.h = 1 / a;
    p.z = sigma / a;
  }
  return p;
}

PhasePoint to_phase_point(const CompactifiedPhasePoint& c) {
  if (!(c.nu > 0)) throw Error(ErrorKind::domain, "fiber infinity has no finite phase point");
  return {c.mu, c.y, c.sgn / c.nu, c.eta_hat / c.nu};
}

CompactifiedPhasePoint to_compactified(const PhasePoint& p) {
  if (p.xi == 0) throw Error(ErrorKind::domain, "xi = 0 lies outside the projective chart");
  const Real ax = std::fabs(p.xi);
  return {p.mu, p.y, 1 / ax, p.eta / ax, p.xi > 0 ? 1 : -1};
}

Real eta_norm_sq(const ExtendedCoeffs& c, Real mu, Real eta) { return eta * eta / c.w(mu); }

Real eval_p(const ExtendedCoeffs& c, const PhasePoint& pt) {
  return 4 * (1 + c.a1(pt.mu)) * pt.mu * pt.xi * pt.xi + eta_norm_sq(c, pt.mu, pt.eta);
}

Cplx eval_p_full(const ExtendedCoeffs& c, Cplx sigma, const PhasePoint& pt) {
  const Real mu = pt.mu;
  return 4 * (1 + c.a1(mu)) * mu * pt.xi * pt.xi - 4 * (1 + c.a2(mu)) * sigma * pt.xi -
         (1 + c.a3(mu)) * sigma * sigma + eta_norm_sq(c, mu, pt.eta);
}

SemiSymbol eval_p_semi(const ExtendedCoeffs& c, Cplx z, const PhasePoint& pt) {
  const Cplx p = eval_p_full(c, z, pt);
  return {p.real(), p.imag()};
}

Real field_symbol(const ExtendedCoeffs& c, const PhasePoint& pt, const FieldSpec& kind) {
  if (kind.kind == FieldKind::classical) return eval_p(c, pt);
  return eval_p_full(c, kind.param, pt).real();
}

Tangent hamilton_field(const ExtendedCoeffs& c, const PhasePoint& pt, const FieldSpec& kind) {
  const SymbolParams s = params_for(kind);
  const Real mu = pt.mu;
  Tangent t;
  t.dmu = 8 * (1 + c.a1(mu)) * mu * pt.xi - 4 * (1 + c.a2(mu)) * s.A;
  t.dy = 2 * pt.eta / c.w(mu);
  t.dxi = -dmu_symbol(c, pt, s);
  t.deta = 0;
  return t;
}

CompactTangent hamilton_field(const ExtendedCoeffs& c, const CompactifiedPhasePoint& pt, const FieldSpec& kind) {
  if (kind.kind == FieldKind::full) throw Error(ErrorKind::domain, "compactified field needs classical or semiclassical kind");
  if (pt.nu < 0) throw Error(ErrorKind::domain, "nu must be nonnegative");
  const SymbolParams s = params_for(kind);
  const Real mu = pt.mu, w = c.w(mu), nu = pt.nu, sg = static_cast<Real>(pt.sgn);
  // K = nu^2 d_mu p, finite at nu = 0.
  const Real K = 4 * c.da1(mu) * mu + 4 * (1 + c.a1(mu)) - 4 * c.da2(mu) * s.A * sg * nu -
                 c.da3(mu) * s.B * nu * nu - pt.eta_hat * pt.eta_hat * c.dw(mu) / (w * w);
  CompactTangent t;
  t.dmu = 8 * (1 + c.a1(mu)) * mu * sg - 4 * (1 + c.a2(mu)) * s.A * nu;
  t.dy = 2 * pt.eta_hat / w;
  t.dnu = nu * sg * K;
  t.deta_hat = pt.eta_hat * sg * K;
  return t;
}

RadialQuantities radial_quantities(const ExtendedCoeffs& c, const CompactifiedPhasePoint& pt) {
  const Real phat = 4 * (1 + c.a1(pt.mu)) * pt.mu + eta_norm_sq(c, pt.mu, pt.eta_hat);
  return {pt.nu, pt.eta_hat * pt.eta_hat + phat * phat};
}

const char* to_string(CharComponent c) {
  switch (c) {
    case CharComponent::SigmaPlus: return "SigmaPlus";
    case CharComponent::SigmaMinus: return "SigmaMinus";
    case CharComponent::SemiPlus: return "SemiPlus";
    case CharComponent::SemiMinus: return "SemiMinus";
    case CharComponent::NotCharacteristic: return "NotCharacteristic";
  }
  return "?";
}

CharComponent char_component(const ExtendedCoeffs& c, const PhasePoint& pt, std::optional<Cplx> z, Real tol) {
  const Real scale = 1 + pt.xi * pt.xi + pt.eta * pt.eta;
  if (!z) {
    if (pt.xi == 0) return CharComponent::NotCharacteristic;
    if (std::fabs(eval_p(c, pt)) / scale >= tol) return CharComponent::NotCharacteristic;
    return pt.xi > 0 ? CharComponent::SigmaPlus : CharComponent::SigmaMinus;
  }
  if (std::abs(eval_p_full(c, *z, pt)) / scale >= tol) return CharComponent::NotCharacteristic;
  const Real split = 2 * (1 + c.a2(pt.mu)) * pt.xi + (1 + c.a3(pt.mu)) * z->real();
  if (std::fabs(split) < tol * std::sqrt(scale))
    throw Error(ErrorKind::internal, "characteristic point on the separating hypersurface");
  return split > 0 ? CharComponent::SemiPlus : CharComponent::SemiMinus;
}

}  // namespace ahres
