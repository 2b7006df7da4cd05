#include <doctest.h>

#include <cmath>

#include "ahres/extension.hpp"
#include "ahres/flow.hpp"

using namespace ahres;

namespace {

Jet2 test_fn(Real mu) {
  const Cplx k(0.4L, -0.9L);
  const Cplx e = std::exp(k * mu);
  return {e + mu * mu, k * e + 2 * mu, k * k * e + Real(2)};
}

// Independent evaluation of the conjugated Laplacian on the same jet by
// nested finite differences of the literal formula.
Cplx literal_operator(const EvenMetricModel& m, Cplx s, Real mu, int mode) {
  const int n = m.n;
  auto pre = [&](Real x) { return std::pow(Cplx(1 + x), -kI * s / Real(4)) * std::pow(Cplx(x), kI * s / Real(2) - Real(n + 3) / 4); };
  auto post = [&](Real x) {
    return std::pow(Cplx(x), -kI * s / Real(2) + Real(n + 1) / 4 - Real(0.5L)) * std::pow(Cplx(1 + x), kI * s / Real(4));
  };
  auto v = [&](Real x) { return post(x) * test_fn(x).v; };
  auto W = [&](Real x) { return std::pow(m.warp(x), Real(n - 1) / 2); };
  const Real h = 1e-4L;
  auto flux = [&](Real x) { return std::pow(x, Real(3 - n) / 2) * W(x) * (v(x + h) - v(x - h)) / (2 * h); };
  const Cplx lap = -4 * std::pow(mu, Real(n + 1) / 2) / W(mu) * (flux(mu + h) - flux(mu - h)) / (2 * h) +
                   mu * mode_eigenvalue(m, mode) / m.warp(mu) * v(mu);
  const Real shift = Real(n - 1) * (n - 1) / 4;
  return pre(mu) * (lap - (shift + s * s) * v(mu));
}

}  // namespace

TEST_CASE("conjugation identity holds for the derived coefficients") {
  for (const EvenMetricModel& m : {hyperbolic_plane(), cylinder(2 * kPi), hyperbolic_space_3()}) {
    const ExtendedCoeffs c = derive_extended_coeffs(m);
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
      const Cplx s(rng.uniform(-3, 3), rng.uniform(-2, 3));
      const Real mu = rng.uniform(0.05L, 1);
      CHECK(verify_conjugation_identity(c, m, s, test_fn, mu, k % 3) < 1e-10L);
    }
  }
}

TEST_CASE("assembled operator agrees with a finite-difference evaluation of the literal formula") {
  const EvenMetricModel m = hyperbolic_plane();
  const ExtendedCoeffs c = derive_extended_coeffs(m);
  for (Real mu : {0.2L, 0.7L}) {
    const Cplx s(1.3L, -0.4L);
    const Cplx a = apply_extended_operator(c, s, test_fn(mu), mu, 1);
    const Cplx b = literal_operator(m, s, mu, 1);
    CHECK(std::abs(a - b) < 1e-5L * (1 + std::abs(a)));
  }
}

TEST_CASE("a perturbed coefficient breaks the identity") {
  const EvenMetricModel m = hyperbolic_plane();
  ExtendedCoeffs c = derive_extended_coeffs(m);
  const auto b2 = c.b2;
  c.b2 = [b2](Real mu) { return b2(mu) + Cplx(0, 1e-3L); };
  CHECK(verify_conjugation_identity(c, m, Cplx(1, -0.5L), test_fn, 0.4L) > 1e-6L);
}

TEST_CASE("coefficients vanish at the boundary") {
  const ExtendedCoeffs c = derive_extended_coeffs(hyperbolic_plane());
  CHECK(c.a1(0) == 0);
  CHECK(c.a2(0) == 0);
  CHECK(std::fabs(c.a3(0)) < 1e-18L);
}

TEST_CASE("identity is only asserted in mu > 0") {
  const EvenMetricModel m = hyperbolic_plane();
  CHECK_THROWS_AS(verify_conjugation_identity(derive_extended_coeffs(m), m, Cplx(1, 0), test_fn, -0.1L), Error);
}

TEST_CASE("phase weight is constant on the plateau and timelike") {
  const PhaseWeight pw = build_phase_weight(hyperbolic_plane(), 1.5L, 3.5L, 0.5L);
  CHECK(pw.max_sampled_norm_sq < 1);
  CHECK(std::fabs(pw.phi(2) - pw.phi(3)) < 1e-15L);
  CHECK(pw.dphi(2.5L) == 0);
  // Near the boundary e^phi matches mu^{1/2}(1+mu)^{-1/4} up to a constant.
  const Real r1 = std::exp(pw.phi(0.1L)) / pw.boundary_exp_phi(0.1L);
  const Real r2 = std::exp(pw.phi(0.3L)) / pw.boundary_exp_phi(0.3L);
  CHECK(std::fabs(r1 / r2 - 1) < 1e-12L);
}
