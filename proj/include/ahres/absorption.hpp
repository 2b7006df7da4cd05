#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ahres/discretize.hpp"
#include "ahres/symbols.hpp"

namespace ahres {

enum class AbsorptionMode { paper_sigma_dependent, sigma_independent, off };
const char* to_string(AbsorptionMode m);
AbsorptionMode absorption_mode_from_string(const std::string& s);

struct AbsorptionConfig {
  AbsorptionMode mode = AbsorptionMode::paper_sigma_dependent;
  Real mu0 = -0.3L;  // support in mu < mu0/2
  Real strength = 1;
  Real chi_width = 0.25L;
  std::optional<std::pair<Real, Real>> interior_window;  // trapping models
  Real C = 5;  // cut of the square root moved to |Im sigma| >= C
};

// Smooth bump, 1 on the inner half of [mu0/2 - 2 chi_width, mu0/2] (and of the
// interior window when present), exp(1 - 1/(1-s^2)) transitions, 0 outside.
Real chi_profile(Real mu, const AbsorptionConfig& cfg);

// Principal square root by complex Schur form and the triangular recurrence.
MatC principal_sqrt(const MatC& M);

// Absorbing operator on the full grid. Paper mode:
//   strength chi^{1/2} (A S + S A)/2 chi^{1/2},
//   A = 2(2(1+a2) D_mu + (1+a3) sigma), S = sqrt(D_mu^2 + lambda/w + sigma^2 + C^2),
// on the absorbing block interior (and the interior window for trapping models).
// sigma_independent: strength chi^{1/2} (D_mu S1 + S1 D_mu)/2 chi^{1/2}, S1 = sqrt(D_mu^2 + lambda/w + 1).
MatC assemble_Q(const Grid& grid, int mode_index, Cplx sigma, const ExtendedCoeffs& c, const AbsorptionConfig& cfg);

// Precomputes sigma-independent pieces and returns the rule sigma -> Q(sigma).
std::function<MatC(Cplx)> make_q_rule(const Grid& grid, int mode_index, const ExtendedCoeffs& c,
                                      const AbsorptionConfig& cfg);

// Attaches the rule to a pencil.
void attach_absorption(ModeOperatorPencil& P, const ExtendedCoeffs& c, const AbsorptionConfig& cfg);

// Principal symbols: classical (fiber infinity) and semiclassical with real z.
Real q_symbol_classical(const ExtendedCoeffs& c, const AbsorptionConfig& cfg, const PhasePoint& pt);
Real q_symbol_semiclassical(const ExtendedCoeffs& c, const AbsorptionConfig& cfg, Real z, Real h, const PhasePoint& pt);

struct SignReport {
  int classical_samples = 0, classical_ok = 0;
  int semi_samples = 0, semi_ok = 0;
  Real min_elliptic_ratio = 0;  // min |p - i q| / (xi^2 + |eta|^2) on the fiber-infinity ring at mu0
  std::vector<std::string> violations;
  bool pass = false;
};
SignReport verify_sign_conditions(const AbsorptionConfig& cfg, const ExtendedCoeffs& c, Real z, int n_samples,
                                  std::uint64_t seed = 1);

// |(1/2 pi i) \oint Q(s)/(s - s0) ds - Q(s0)| / |Q(s0)| on a circle of radius r.
Real cauchy_holomorphy_defect(const std::function<MatC(Cplx)>& rule, Cplx s0, Real r, int n_nodes);

}  // namespace ahres
