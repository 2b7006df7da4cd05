#include <doctest.h>

#include <cmath>

#include "ahres/absorption.hpp"
#include "ahres/solver.hpp"

using namespace ahres;

TEST_CASE("principal square root") {
  CHECK((principal_sqrt(MatC::Identity(3, 3)) - MatC::Identity(3, 3)).norm() < 1e-18L);
  MatC D = MatC::Zero(2, 2);
  D(0, 0) = 4;
  D(1, 1) = 9;
  const MatC R = principal_sqrt(D);
  CHECK(std::abs(R(0, 0) - Cplx(2)) < 1e-18L);
  CHECK(std::abs(R(1, 1) - Cplx(3)) < 1e-18L);
  MatC M(2, 2);
  M << 0, 1, -1, 0;
  const MatC S = principal_sqrt(M);
  CHECK((S * S - M).norm() < 1e-12L);
  // Oracle: diagonalize, eigenvalues +-i, roots e^{+-i pi/4}.
  Eigen::ComplexEigenSolver<MatC> es(S);
  for (int k = 0; k < 2; ++k) {
    CHECK(es.eigenvalues()(k).real() > 0);
    CHECK(std::fabs(std::abs(es.eigenvalues()(k)) - 1) < 1e-15L);
    CHECK(std::fabs(es.eigenvalues()(k).real() - std::sqrt(Real(0.5L))) < 1e-15L);
  }
  MatC neg = -MatC::Identity(2, 2);
  CHECK_THROWS_AS(principal_sqrt(neg), Error);
}

TEST_CASE("chi profile") {
  AbsorptionConfig cfg;
  const Real hi = cfg.mu0 / 2, lo = hi - 2 * cfg.chi_width;
  CHECK(chi_profile(0.5L, cfg) == 0);
  CHECK(chi_profile(lo - 0.01L, cfg) == 0);
  CHECK(chi_profile((lo + hi) / 2, cfg) == 1);
  for (int k = 0; k <= 1000; ++k) CHECK(chi_profile(-0.6L + 0.7L * k / 1000, cfg) >= 0);
}

TEST_CASE("off mode gives a zero operator; support and holomorphy in paper mode") {
  const EvenMetricModel m = hyperbolic_plane();
  const ExtendedCoeffs c = derive_extended_coeffs(m);
  const Grid g = build_grid(-0.5L, -0.15L, 4, 20, 60, BoundaryKind::center_regularity, 0);
  AbsorptionConfig off;
  off.mode = AbsorptionMode::off;
  CHECK(assemble_Q(g, 0, Cplx(1, -1), c, off).norm() == 0);
  AbsorptionConfig paper;
  const MatC Q = assemble_Q(g, 0, Cplx(1, -1), c, paper);
  CHECK(Q.norm() > 0);
  for (int i = 0; i < g.size(); ++i)
    if (chi_profile(g.nodes(i), paper) == 0) {
      CHECK(Q.row(i).norm() == 0);
      CHECK(Q.col(i).norm() == 0);
    }
  CHECK(cauchy_holomorphy_defect(make_q_rule(g, 0, c, paper), Cplx(0.5L, -1), 0.2L, 32) < 1e-8L);
  CHECK_THROWS_AS(assemble_Q(g, 0, Cplx(0, -6), c, paper), Error);
}

TEST_CASE("sign conditions and ellipticity") {
  const ExtendedCoeffs c = derive_extended_coeffs(hyperbolic_plane());
  AbsorptionConfig cfg;
  const SignReport r = verify_sign_conditions(cfg, c, 1, 300, 3);
  CHECK(r.pass);
  CHECK(r.classical_ok == r.classical_samples);
  CHECK(r.min_elliptic_ratio > 0);
  // Sigma_+ sample in the window: xi > 0 with q >= 0.
  const Real mu = cfg.mu0 / 2 - cfg.chi_width;
  const Real eta = std::sqrt(-4 * mu * c.w(mu));
  CHECK(q_symbol_classical(c, cfg, {mu, 0, 1, eta}) >= 0);
  CHECK(q_symbol_classical(c, cfg, {mu, 0, -1, eta}) <= 0);
}

TEST_CASE("sigma-independent absorption keeps a quadratic pencil") {
  AbsorptionConfig cfg;
  cfg.mode = AbsorptionMode::sigma_independent;
  const ModeOperatorPencil P = build_mode_pencil(hyperbolic_plane(), cfg, 64, 0, 0, BoundaryKind::center_regularity);
  CHECK(P.q_is_polynomial);
  CHECK((P.Q(Cplx(1, 0)) - P.Q(Cplx(0, -2))).norm() == 0);
}
