#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ahres/symbols.hpp"

namespace ahres {

enum class Terminal { ConvergedLPlus, ConvergedLMinus, ExitMuLeft, ExitMuRight, ExitChart, Trapped };
const char* to_string(Terminal t);

struct FlowStops {
  Real eps0 = 0.1L;                  // exit when mu < -eps0
  Real eps1 = 1e-14L;                // converged when rho_tilde^2 + rho0 < eps1
  Real max_time = 1000;              // trapped cutoff in rescaled time
  std::optional<Real> mu_right_stop;  // exit when mu exceeds this; defaults to eps0
  Real rtol = 1e-10L;
  Real nu_max = 1e8L;  // leaving the projective chart (xi -> 0)
};

struct TrajectorySample {
  Real t = 0;  // signed rescaled time
  CompactifiedPhasePoint pt;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  Terminal terminal = Terminal::Trapped;
  int mu_reversals = 0;    // sign changes of the mu increment
  int rho_increases = 0;   // steps where rho_tilde^2 + rho0 grew
  bool mu_monotone() const { return mu_reversals == 0; }
  bool rho_monotone() const { return rho_increases == 0; }
};

// Adaptive Dormand-Prince 5(4) integration of W = nu H_p (classical) or
// W = nu H_{p_h,z} (semiclassical) in (mu, y, nu, eta_hat); sgn(xi) is fixed.
Trajectory integrate_bicharacteristic(const ExtendedCoeffs& c, const CompactifiedPhasePoint& start, int direction,
                                      const FieldSpec& kind, const FlowStops& stops);

struct SourceSinkReport {
  int n_samples = 0;
  int converged = 0;
  Real min_rho0_rate = 0;
  Real min_rho_tilde_rate = 0, max_rho_tilde_rate = 0;
  std::vector<std::string> failures;
  bool pass = false;
};

// Seeds at distance ~radius from L_+ (integrated backward) and L_- (forward),
// fits exponential decay rates of rho0 and rho_tilde in |t|.
SourceSinkReport check_source_sink(const ExtendedCoeffs& c, Real radius, int n_samples, std::uint64_t seed = 1);

struct EscapeReport {
  int n_samples = 0;
  int sign_ok = 0;
  int class_ok = 0;
  Real radial_hp_mu = 0;  // H_p mu at a mu = 0 radial point
  bool pass = false;
};
EscapeReport check_escape_function(const ExtendedCoeffs& c, Real eps0, int n_samples, std::uint64_t seed = 1);

struct ConvexityReport {
  int n_samples = 0, constructed = 0, skipped = 0;
  int negative = 0;        // analytic H^2 mu < 0
  int flow_negative = 0;   // second difference along an integrated trajectory < 0
  Real max_rel_mismatch = 0;
  int hp_xi_negative = 0;  // H_p xi < 0 at the sample
  bool pass = false;
};
// Glancing points with 0 < mu < eps0: p_{h,z} = 0 and H mu = 0 for real z.
ConvexityReport check_glancing_convexity(const ExtendedCoeffs& c, Real z, Real eps0, int n_samples,
                                         std::uint64_t seed = 1, bool constant_mode = false);

// Analytic second derivative of mu along the semiclassical flow at a glancing point.
Real glancing_second_derivative(const ExtendedCoeffs& c, Real z, const PhasePoint& pt);

// Lift of the neck closed geodesic for the semiclassical field with real z.
CompactifiedPhasePoint neck_orbit_point(const ExtendedCoeffs& c, Real z, Real mu_neck);

struct DichotomyReport {
  int n_samples = 0, consistent = 0, trapped = 0;
  bool pass = false;
};
// Random semiclassical characteristic seeds near the boundary: forward/backward
// terminal states must follow the source-to-exit pattern.
DichotomyReport check_semiclassical_dichotomy(const ExtendedCoeffs& c, Real z, Real eps0, int n_samples,
                                              std::uint64_t seed = 1);

// Uniform and normal draws built directly on mt19937_64 bits, so sequences do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Real uniform();
  Real uniform(Real a, Real b) { return a + (b - a) * uniform(); }
  Real normal();

 private:
  std::mt19937_64 eng_;
};

}  // namespace ahres
