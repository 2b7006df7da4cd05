#include <doctest.h>

#include <cmath>

#include "ahres/flow.hpp"
#include "ahres/symbols.hpp"

using namespace ahres;

namespace {
const ExtendedCoeffs& h2() {
  static const ExtendedCoeffs c = derive_extended_coeffs(hyperbolic_plane());
  return c;
}
}  // namespace

TEST_CASE("principal symbol values") {
  const ExtendedCoeffs& c = h2();
  CHECK(eval_p(c, {0, 0, 3, 0}) == 0);
  CHECK(std::fabs(eval_p(c, {1, 0, 1, 0}) - 4) < 1e-18L);
  CHECK(std::fabs(eval_p(c, {-1, 0, 1, 0}) + 4) < 1e-18L);
  // sigma = 2 at mu = 0: -8 - 4 = -12.
  CHECK(std::abs(eval_p_full(c, Cplx(2, 0), {0, 0, 1, 0}) - Cplx(-12, 0)) < 1e-18L);
  CHECK(std::abs(eval_p_full(c, Cplx(0, 0), {0.3L, 0, 1.1L, 0.4L}) - eval_p(c, {0.3L, 0, 1.1L, 0.4L})) < 1e-17L);
}

TEST_CASE("semiclassical imaginary part") {
  const ExtendedCoeffs& c = h2();
  CHECK(eval_p_semi(c, Cplx(1, 0), {0.2L, 0, 1, 1}).im == 0);
  CHECK(std::fabs(eval_p_semi(c, Cplx(0, 1), {0, 0, 1, 0}).im + 4) < 1e-18L);
  // On the separating hypersurface with non-real z, the real part is positive near mu = 0.
  const Cplx z = std::polar(Real(1), Real(0.7L));
  const Real mu = 0.01L;
  const Real xi = -(1 + c.a3(mu)) * z.real() / (2 * (1 + c.a2(mu)));
  CHECK(eval_p_semi(c, z, {mu, 0, xi, 0}).re > 0);
}

TEST_CASE("Hamilton field components") {
  const ExtendedCoeffs& c = h2();
  CHECK(std::fabs(hamilton_field(c, PhasePoint{0.1L, 0, 1, 0}, FieldSpec::classical()).dmu - 0.8L) < 1e-18L);
  const Tangent r = hamilton_field(c, PhasePoint{0, 0, 2, 0}, FieldSpec::classical());
  CHECK(r.dmu == 0);
  CHECK(std::fabs(r.dxi + 4 * 4) < 1e-17L);
  CHECK(r.deta == 0);
  CHECK(std::fabs(hamilton_field(c, PhasePoint{0, 0, 0.7L, 0}, FieldSpec::semiclassical(Cplx(1, 0))).dmu + 4) < 1e-18L);
}

TEST_CASE("radial quantities") {
  const ExtendedCoeffs& c = h2();
  const RadialQuantities onL = radial_quantities(c, {0, 0, 0, 0, 1});
  CHECK(onL.rho0 == 0);
  CHECK(onL.rho_tilde == 0);
  const RadialQuantities q = radial_quantities(c, {0, 0, 0, 0.1L, 1});
  // p_hat = eta_hat^2 / w(0) = 0.01 with w(0) = 1.
  CHECK(std::fabs(q.rho0 - (0.01L + 1e-4L)) < 1e-15L);
  // Homogeneity: the same covector scaled by t.
  const PhasePoint p{-0.05L, 0, 2, 0.3L};
  const RadialQuantities a = radial_quantities(c, to_compactified(p));
  const RadialQuantities b = radial_quantities(c, to_compactified({p.mu, p.y, 5 * p.xi, 5 * p.eta}));
  CHECK(std::fabs(a.rho0 - b.rho0) < 1e-15L);
}

TEST_CASE("characteristic components") {
  const ExtendedCoeffs& c = h2();
  const Real w = c.w(-0.1L);
  // mu = -0.1, xi = 1/2: p = 4(1+a1)(-0.1)/4 + eta^2/w; choose eta to cancel.
  CHECK(char_component(c, {-0.1L, 0, 0.5L, 0}) == CharComponent::NotCharacteristic);
  CHECK(char_component(c, {-0.1L, 0, 0.5L, std::sqrt(0.1L * w)}) == CharComponent::SigmaPlus);
  CHECK(char_component(c, {-0.1L, 0, -0.5L, std::sqrt(0.1L * w)}) == CharComponent::SigmaMinus);
  // z = 1, mu = 0: p = -4 xi - 1 + eta^2; xi = 0, eta = 1 lies in the plus component.
  CHECK(char_component(c, {0, 0, 0, 1}, Cplx(1, 0)) == CharComponent::SemiPlus);
  CHECK(char_component(c, {0.2L, 0, 0, 0.3L}) == CharComponent::NotCharacteristic);
}

TEST_CASE("Hamilton field is the symplectic gradient") {
  const ExtendedCoeffs c = derive_extended_coeffs(hyperbolic_space_3());
  Rng rng(5);
  const Real h = 1e-6L;
  for (int k = 0; k < 200; ++k) {
    const PhasePoint pt{rng.uniform(-0.4L, 3), rng.uniform(0, 6), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const FieldSpec kind = FieldSpec::semiclassical(std::polar(Real(1), rng.uniform(-3, 3)));
    auto f = [&](Real dm, Real dx, Real de) {
      return field_symbol(c, {pt.mu + dm, pt.y, pt.xi + dx, pt.eta + de}, kind);
    };
    const Tangent t = hamilton_field(c, pt, kind);
    CHECK(std::fabs(t.dmu - (f(0, h, 0) - f(0, -h, 0)) / (2 * h)) < 1e-7L * (1 + std::fabs(t.dmu)));
    CHECK(std::fabs(t.dxi + (f(h, 0, 0) - f(-h, 0, 0)) / (2 * h)) < 1e-7L * (1 + std::fabs(t.dxi)));
    CHECK(std::fabs(t.dy - (f(0, 0, h) - f(0, 0, -h)) / (2 * h)) < 1e-7L * (1 + std::fabs(t.dy)));
  }
}

TEST_CASE("compactified field rejects the full symbol") {
  CHECK_THROWS_AS(hamilton_field(h2(), CompactifiedPhasePoint{0, 0, 0.1L, 0, 1}, FieldSpec::full(Cplx(1, 0))), Error);
}
