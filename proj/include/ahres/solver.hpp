#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ahres/absorption.hpp"
#include "ahres/discretize.hpp"

namespace ahres {

struct SolveResult {
  VecC u;
  Real residual = 0;  // |T u - f| / |f|
  Real rcond = 0;     // LU reciprocal condition estimate
};

// Dense LU solve of (P(s) - i Q(s)) u = f with iterative refinement. A
// condition estimate below near_pole_rcond raises a near_pole error.
SolveResult solve_resolvent(const ModeOperatorPencil& P, Cplx sigma, const VecC& f, Real near_pole_rcond = 1e-17L);

struct Contour {
  Cplx center;
  Real radius = 0.5L;
  int n_nodes = 32;
};

struct ResonanceEntry {
  Cplx sigma;
  int mode = 0;
  std::string sector;
  Real residual = 0;    // |T v| / (|T|_F |v|) at the refined eigenpair
  Real refine_err = 0;  // |sigma_N - sigma_{1.25N}|
  Real absorption_err = 0;
  int contour_id = -1;
  int multiplicity = 1;
};

struct ResonanceResult {
  std::vector<ResonanceEntry> entries;
  std::vector<Contour> window;
  std::vector<ResonanceEntry> flagged;  // absorption-window or refinement-unstable
  std::vector<std::string> notes;
};

struct ContourOptions {
  int probe_rank = 8;
  std::uint64_t seed = 1;
  Real rank_tol = 1e-6L;  // singular values below rank_tol * mean node norm are dropped
  int threads = 1;
  bool refine = true;
};

// Moment method on (1/2 pi i) \oint R T(s)^{-1} E V s^k ds, k = 0, 1. The probes
// V are smooth and supported in mu > 0, and rows are read back only at
// mu > 0.05, so the moments see the resolvent of the unextended problem:
// poles of the extended family whose residues vanish there are not returned.
ResonanceResult find_resonances_contour(const ModeOperatorPencil& P, const Contour& contour,
                                        const ContourOptions& opts = {}, int contour_id = 0);

// Ratio (largest moment singular value)/(mean node norm) on a small circle.
Real physical_pole_weight(const ModeOperatorPencil& P, Cplx sigma, Real radius, const ContourOptions& opts = {});

struct RefineResult {
  Cplx sigma;
  VecC v;
  Real residual = 0;
  int iterations = 0;
  bool converged = false;
};
// Two-sided Newton (inverse iteration for both null vectors), iterated to convergence.
RefineResult refine_eigenvalue(const ModeOperatorPencil& P, Cplx sigma0, int max_iter = 30);

// Companion linearization for polynomial Q: shift-invert in tau = 1/(s - shift).
// Returns all finite eigenvalues inside the rectangle, with residuals.
ResonanceResult find_resonances_linearized(const ModeOperatorPencil& P, Cplx shift, Real re0, Real re1, Real im0,
                                           Real im1);

// Keeps entries with a refined counterpart within filter_tol.
ResonanceResult filter_spurious(const ResonanceResult& res_N, const ResonanceResult& res_refined, Real filter_tol);
// Moves entries that shift by more than filter_tol under a second absorption
// configuration to the flagged list.
ResonanceResult filter_absorption(const ResonanceResult& res, const ResonanceResult& res_alt, Real filter_tol);

std::vector<Contour> cover_window(Real re0, Real re1, Real im0, Real im1, int n_nodes);

// Smallest singular value at sigma over the maximum along a circle around it.
Real singular_value_dip(const ModeOperatorPencil& P, Cplx sigma, Real radius, int n_nodes = 16);

// Full resonance computation over a rectangle for a list of modes.
struct ResonanceRun {
  EvenMetricModel model;
  AbsorptionConfig absorption;
  int N = 120;
  int n_left = 0;  // 0: default split
  std::vector<int> modes{0};
  std::string method = "contour";
  Real re0 = -0.5L, re1 = 0.5L, im0 = -4, im1 = -0.2L;
  int n_nodes = 32;
  ContourOptions contour;
  Real filter_tol = 1e-6L;
  Real residual_tol = 1e-10L;
  bool absorption_check = true;
  std::vector<BoundaryKind> sectors;  // empty: boundary_sectors(model)
};

std::vector<BoundaryKind> boundary_sectors(const EvenMetricModel& model);
ModeOperatorPencil build_mode_pencil(const EvenMetricModel& model, const AbsorptionConfig& abs, int N, int n_left,
                                     int mode, BoundaryKind bc);
ResonanceResult compute_resonances(const ResonanceRun& run);

struct SweepRow {
  Cplx sigma;
  Real ratio = 0;      // |u|_{H^s_h} / |f|_{H^{s-1}_h}
  Real ratio_sm2 = 0;  // |u|_{H^s_h} / |f|_{H^{s-2}_h}
  Real s = 0, h = 0;
  int N = 0;
};
struct SweepResult {
  std::vector<SweepRow> rows;
  Real slope = 0, slope_lo = 0, slope_hi = 0;  // least squares with 95% interval
  Real max_ratio_sigma = 0;                    // max ratio * |sigma|
  Real max_ratio_sm2_sigma = 0;
};
struct SweepConfig {
  Real im_sigma = -1;
  Real re0 = 20, re1 = 160;
  int n_points = 18;
  Real s = 2;
  Real f_lo = 0.5L, f_hi = 1.5L;  // bump support in mu
  Real f_phase = 0;               // f = bump * exp(i sigma f_phase log(1+mu)); 0 = plain bump
  int N = 420, n_left = 60;
  int mode = 0;
  int threads = 1;
};
SweepResult sweep_norm_estimate(const EvenMetricModel& model, const SweepConfig& sweep, const AbsorptionConfig& abs);

// Least-squares fit of the solution near mu = 0+ against polynomials and
// mu^{i sigma} times polynomials; returns |singular coeffs| / |smooth coeffs|.
Real indicial_branch_ratio(const ModeOperatorPencil& P, Cplx sigma, const VecC& f, Real mu_max = 0.1L,
                           int n_smooth = 18, int n_sing = 2);
// The same fit for an arbitrary function sampled on (0, mu_max].
Real branch_ratio(const std::function<Cplx(Real)>& u, Cplx sigma, Real mu_max = 0.1L, int n_smooth = 18,
                  int n_sing = 2);

// Smooth bump exp(-1/(1-t^2)) on [lo, hi] sampled at the pencil's equation rows.
VecC bump_rhs(const ModeOperatorPencil& P, Real lo, Real hi);

}  // namespace ahres
