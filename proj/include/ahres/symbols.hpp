#pragma once

#include <optional>

#include "ahres/extension.hpp"

namespace ahres {

// Covector xi dmu + eta dy over (mu, y).
struct PhasePoint {
  Real mu = 0, y = 0, xi = 0, eta = 0;
};

// Fiber-compactified chart: nu = 1/|xi| (nu = 0 is fiber infinity), eta_hat = eta/|xi|.
struct CompactifiedPhasePoint {
  Real mu = 0, y = 0, nu = 0, eta_hat = 0;
  int sgn = 1;
};

struct SpectralParam {
  Cplx sigma;
  Real h = 0;  // 1/|sigma|
  Cplx z;      // sigma/|sigma|
  static SpectralParam from_sigma(Cplx sigma);
};

PhasePoint to_phase_point(const CompactifiedPhasePoint& c);
CompactifiedPhasePoint to_compactified(const PhasePoint& p);

// |eta|^2 with respect to the dual of w(mu) h0.
Real eta_norm_sq(const ExtendedCoeffs& c, Real mu, Real eta);

Real eval_p(const ExtendedCoeffs& c, const PhasePoint& pt);
Cplx eval_p_full(const ExtendedCoeffs& c, Cplx sigma, const PhasePoint& pt);

struct SemiSymbol {
  Real re = 0, im = 0;
};
SemiSymbol eval_p_semi(const ExtendedCoeffs& c, Cplx z, const PhasePoint& pt);

enum class FieldKind { classical, full, semiclassical };
struct FieldSpec {
  FieldKind kind = FieldKind::classical;
  Cplx param{0, 0};  // sigma for full, z for semiclassical
  static FieldSpec classical() { return {}; }
  static FieldSpec full(Cplx sigma) { return {FieldKind::full, sigma}; }
  static FieldSpec semiclassical(Cplx z) { return {FieldKind::semiclassical, z}; }
};

struct Tangent {
  Real dmu = 0, dy = 0, dxi = 0, deta = 0;
};
struct CompactTangent {
  Real dmu = 0, dy = 0, dnu = 0, deta_hat = 0;
};

// Hamilton field of the real part of the selected symbol.
Tangent hamilton_field(const ExtendedCoeffs& c, const PhasePoint& pt, const FieldSpec& kind);
// Rescaled field W = nu H, smooth up to fiber infinity. The full kind is rejected.
CompactTangent hamilton_field(const ExtendedCoeffs& c, const CompactifiedPhasePoint& pt, const FieldSpec& kind);

// Real part of the selected symbol, the function whose flow hamilton_field returns.
Real field_symbol(const ExtendedCoeffs& c, const PhasePoint& pt, const FieldSpec& kind);

struct RadialQuantities {
  Real rho_tilde = 0, rho0 = 0;
};
RadialQuantities radial_quantities(const ExtendedCoeffs& c, const CompactifiedPhasePoint& pt);

enum class CharComponent { SigmaPlus, SigmaMinus, SemiPlus, SemiMinus, NotCharacteristic };
const char* to_string(CharComponent c);

inline constexpr Real kCharTol = 1e-9L;

CharComponent char_component(const ExtendedCoeffs& c, const PhasePoint& pt, std::optional<Cplx> z = std::nullopt,
                             Real tol = kCharTol);

}  // namespace ahres
