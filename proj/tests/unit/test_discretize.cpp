#include <doctest.h>

#include <cmath>

#include "ahres/absorption.hpp"
#include "ahres/discretize.hpp"

using namespace ahres;

TEST_CASE("Chebyshev differentiation") {
  const ChebBlock b = chebyshev_block(-0.5L, 4, 64);
  VecR s(64), one = VecR::Ones(64);
  for (int i = 0; i < 64; ++i) s(i) = std::sin(b.nodes(i));
  const VecR ds = b.D1 * s;
  for (int i = 0; i < 64; ++i) CHECK(std::fabs(ds(i) - std::cos(b.nodes(i))) < 1e-10L);
  CHECK((b.D1 * one).cwiseAbs().maxCoeff() < 1e-12L);
  for (int i = 1; i < 64; ++i) CHECK(b.nodes(i) > b.nodes(i - 1));
  CHECK(std::fabs(b.weights.sum() - 4.5L) < 1e-15L);
  CHECK_THROWS_AS(chebyshev_block(0, 1, 7), Error);
}

TEST_CASE("toy coefficients reproduce the grouped form") {
  ExtendedCoeffs c;
  c.n = 2;
  auto zero = [](Real) { return Real(0); };
  auto czero = [](Real) { return Cplx(0); };
  c.a1 = c.a2 = c.a3 = c.da1 = c.da2 = c.da3 = c.gamma = c.dw = zero;
  c.b1 = c.b2 = c.c1 = czero;
  c.w = [](Real) { return Real(1); };
  c.model = hyperbolic_plane();
  const ChebBlock b = chebyshev_block(0.1L, 2, 16);
  const BlockOperator op = assemble_block_operator(c, b.nodes, b.D1, 0);
  const MatC D = b.D1.cast<Cplx>() * Cplx(0, -1);  // D_mu = -i d/dmu
  const MatC mu = b.nodes.cast<Cplx>().asDiagonal();
  CHECK((op.A2 + MatC::Identity(16, 16)).norm() < 1e-15L);
  CHECK((op.A1 + Real(4) * D).norm() < 1e-12L * D.norm());
  const MatC A0 = Real(4) * mu * D * D - Real(4) * kI * D;
  CHECK((op.A0 - A0).norm() < 1e-12L * A0.norm());
}

TEST_CASE("center regularity forces vanishing for m = 1") {
  const EvenMetricModel m = hyperbolic_plane();
  const ExtendedCoeffs c = derive_extended_coeffs(m);
  const Grid g = build_grid(-0.5L, -0.15L, 4, 20, 60, BoundaryKind::center_regularity, 1);
  const ModeOperatorPencil P = assemble_pencil(c, g, 1, m);
  const int last = g.size() - 1;
  // Last row is the point evaluation u(mu_right) = 0.
  CHECK(std::abs(P.A0(last, last) - Cplx(1)) < 1e-18L);
  CHECK(P.A0.row(last).norm() == 1);
  CHECK(P.A1.row(last).norm() == 0);
  CHECK(P.A2.row(last).norm() == 0);
}

TEST_CASE("weighted symmetry for real sigma") {
  const ExtendedCoeffs c = derive_extended_coeffs(hyperbolic_plane());
  CHECK(weighted_asymmetry(c, 0, 1, 96, 0.2L, 3.2L) < 1e-6L);
  CHECK(weighted_asymmetry(c, 2, 1, 96, 0.2L, 3.2L) < 1e-6L);
  // The asymmetry is genuine for complex sigma.
  CHECK(weighted_asymmetry(c, 0, 1, 96, 0.2L, 3.2L) < 1e-3L * weighted_asymmetry(c, 0, 0, 96, -0.4L, 0.6L) + 1e-6L);
}

TEST_CASE("semiclassical Sobolev norms") {
  const Grid g = build_grid(-0.5L, -0.15L, 4, 24, 200, BoundaryKind::center_regularity, 0);
  VecC u(g.size());
  for (int i = 0; i < g.size(); ++i) {
    const Real t = (g.nodes(i) - 2) / 0.8L;
    u(i) = std::fabs(t) < 1 ? std::exp(-1 / (1 - t * t)) : 0;
  }
  const Real l2 = std::sqrt((u.cwiseAbs2().cwiseProduct(g.quad_weights)).sum());
  CHECK(std::fabs(sobolev_norm(sobolev_norm_matrix(g, 0, 0.1L), u) - l2) < 1e-15L);
  // Oscillation at frequency 1/h: the H^1_h norm is sqrt(2) times L^2 up to O(h^2).
  for (Real h : {5e-2L, 2e-2L}) {
    VecC v(g.size());
    for (int i = 0; i < g.size(); ++i) v(i) = u(i) * std::exp(kI * g.nodes(i) / h);
    const Real r = sobolev_norm(sobolev_norm_matrix(g, 1, h), v) / sobolev_norm(sobolev_norm_matrix(g, 0, h), v);
    CHECK(std::fabs(r - std::sqrt(Real(2))) < 4 * h * h);
  }
  Real prev = 0;
  for (Real s : {-1.0L, -0.5L, 0.0L, 0.5L, 1.0L, 2.0L}) {
    const Real nrm = sobolev_norm(sobolev_norm_matrix(g, s, 0.05L), u);
    CHECK(nrm >= prev * (1 - 1e-12L));
    prev = nrm;
  }
  CHECK_THROWS_AS(sobolev_norm_matrix(g, 1, std::numeric_limits<Real>::infinity()), Error);
}

TEST_CASE("subprincipal part at the radial set") {
  const ExtendedCoeffs c = derive_extended_coeffs(hyperbolic_plane());
  const Cplx sigma(1, -0.5L);
  Real last = 1e9L;
  for (Real h : {1e-2L, 5e-3L, 2.5e-3L}) {
    const Real dev = std::fabs(subprincipal_rayleigh(c, 0, sigma, 1, h) - 2);
    CHECK(dev < last);
    last = dev;
  }
  CHECK(last < 0.01L);
}
