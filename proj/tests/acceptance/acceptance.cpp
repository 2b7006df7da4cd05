// Acceptance run: one PASS/FAIL line per criterion, with runtime.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "ahres/flow.hpp"
#include "ahres/solver.hpp"

using namespace ahres;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Criteria whose failure is analysed and recorded rather than fixed.
const std::set<int> kExpectedFail{9};

int threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string num(Real x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3Le", x);
  return buf;
}

TestFunction jet_fn() {
  return [](Real mu) {
    const Cplx k(0.3L, 0.7L), e = std::exp(k * mu);
    return Jet2{e + std::sin(2 * mu), k * e + 2 * std::cos(2 * mu), k * k * e - 4 * std::sin(2 * mu)};
  };
}

Outcome conjugation() {
  Rng rng(11);
  Real worst = 0;
  for (const EvenMetricModel& m : {hyperbolic_plane(), cylinder(2 * kPi)}) {
    const ExtendedCoeffs c = derive_extended_coeffs(m);
    for (int k = 0; k < 20; ++k) {
      const Cplx sigma(rng.uniform(-3, 3), rng.uniform(-2, 3));
      const Real mu = rng.uniform(0.05L, 1);
      worst = std::max(worst, verify_conjugation_identity(c, m, sigma, jet_fn(), mu, k % 3));
    }
  }
  return {worst < 1e-10L, "max residual " + num(worst)};
}

Outcome symbols() {
  const ExtendedCoeffs c = derive_extended_coeffs(hyperbolic_plane());
  Rng rng(12);
  const Real h = 1e-6L;
  Real im_err = 0, real_err = 0, ns_err = 0, ham_err = 0, dp_err = 0;
  for (int k = 0; k < 1000; ++k) {
    const PhasePoint pt{rng.uniform(-0.5L, 3.6L), rng.uniform(0, 2 * kPi), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Cplx z = std::polar(Real(1), rng.uniform(-kPi, kPi));
    const Real want = -2 * z.imag() * (2 * (1 + c.a2(pt.mu)) * pt.xi + (1 + c.a3(pt.mu)) * z.real());
    im_err = std::max(im_err, std::fabs(eval_p_semi(c, z, pt).im - want) / (1 + std::fabs(want)));
    const Cplx pf = eval_p_full(c, Cplx(rng.uniform(-5, 5), 0), pt);
    real_err = std::max(real_err, std::fabs(pf.imag()) / (1 + std::abs(pf)));
    ns_err = std::max(ns_err, std::fabs(eval_p(c, PhasePoint{0, pt.y, pt.xi, 0})));
    for (const FieldSpec& kind : {FieldSpec::classical(), FieldSpec::semiclassical(z)}) {
      auto f = [&](Real a, Real b, Real x, Real e) {
        return field_symbol(c, PhasePoint{pt.mu + a, pt.y + b, pt.xi + x, pt.eta + e}, kind);
      };
      const Real fmu = (f(h, 0, 0, 0) - f(-h, 0, 0, 0)) / (2 * h), fy = (f(0, h, 0, 0) - f(0, -h, 0, 0)) / (2 * h);
      const Real fxi = (f(0, 0, h, 0) - f(0, 0, -h, 0)) / (2 * h), fe = (f(0, 0, 0, h) - f(0, 0, 0, -h)) / (2 * h);
      const Tangent t = hamilton_field(c, pt, kind);
      const Real dn = std::hypot(std::hypot(t.dmu - fxi, t.dy - fe), std::hypot(t.dxi + fmu, t.deta + fy));
      ham_err = std::max(ham_err, dn / std::max(Real(1), std::hypot(std::hypot(fxi, fe), std::hypot(fmu, fy))));
    }
  }
  for (Real xi : {-2.0L, -0.5L, 1.0L, 3.0L}) {
    auto p = [&](Real a, Real b, Real x, Real e) { return eval_p(c, PhasePoint{a, 0.3L + b, xi + x, e}); };
    dp_err = std::max({dp_err, std::fabs((p(h, 0, 0, 0) - p(-h, 0, 0, 0)) / (2 * h) - 4 * xi * xi),
                       std::fabs((p(0, h, 0, 0) - p(0, -h, 0, 0)) / (2 * h)),
                       std::fabs((p(0, 0, h, 0) - p(0, 0, -h, 0)) / (2 * h)),
                       std::fabs((p(0, 0, 0, h) - p(0, 0, 0, -h)) / (2 * h))});
  }
  const bool ok = im_err < 1e-15L && real_err < 1e-15L && ns_err == 0 && dp_err < 1e-8L && ham_err < 1e-6L;
  return {ok, "im " + num(im_err) + ", real " + num(real_err) + ", N*S " + num(ns_err) + ", dp " + num(dp_err) +
                  ", hamilton " + num(ham_err)};
}

Outcome radial() {
  const ExtendedCoeffs c = derive_extended_coeffs(hyperbolic_plane());
  const SourceSinkReport r = check_source_sink(c, 1e-3L, 200, 13);
  // Structural rates 8 (rho0) and 4 (rho_tilde).
  const bool ok = r.n_samples == 200 && r.converged == r.n_samples && r.min_rho0_rate >= 7.6L &&
                  r.min_rho_tilde_rate >= 3.8L && r.max_rho_tilde_rate <= 4.2L;
  return {ok, std::to_string(r.converged) + "/" + std::to_string(r.n_samples) + " classified, rho0 rate >= " +
                  num(r.min_rho0_rate) + ", rho_tilde rate in [" + num(r.min_rho_tilde_rate) + ", " +
                  num(r.max_rho_tilde_rate) + "]"};
}

Outcome escape_convexity() {
  const ExtendedCoeffs c = derive_extended_coeffs(hyperbolic_plane());
  const EscapeReport e = check_escape_function(c, 0.1L, 1000, 14);
  const ConvexityReport v = check_glancing_convexity(c, 1, 0.1L, 1000, 14);
  const bool ok = e.n_samples == 1000 && e.sign_ok == 1000 && v.constructed == 1000 && v.negative == 1000;
  return {ok, "escape sign " + std::to_string(e.sign_ok) + "/1000, convex " + std::to_string(v.negative) + "/" +
                  std::to_string(v.constructed)};
}

// Poles of the explicit H^2 resolvent: with lambda = 1/2 - i sigma the full
// kernel has rank 2k+1 at lambda = -k, one for each angular mode |m| <= k.
std::vector<std::pair<int, Cplx>> h2_oracle(const std::vector<int>& modes, Real im0) {
  std::vector<std::pair<int, Cplx>> out;
  for (int m : modes)
    for (int k = std::abs(m); k + Real(0.5L) < -im0; ++k) out.push_back({m, Cplx(0, -(k + Real(0.5L)))});
  return out;
}

// Zeros of the cylinder zeta product for l = 2 pi: s = -k + i j, so sigma =
// -i(s - 1/2) = j - i(k + 1/2). Angular mode |j| carries sigma = +-j - i(k+1/2).
std::vector<std::pair<int, Cplx>> cylinder_oracle(int jmax, int kmax) {
  std::vector<std::pair<int, Cplx>> out;
  for (int j = -jmax; j <= jmax; ++j)
    for (int k = 0; k <= kmax; ++k) out.push_back({std::abs(j), Cplx(j, -(k + Real(0.5L)))});
  return out;
}

// Every oracle point has an entry of its mode within tol, and every entry is
// within tol of an oracle point.
Outcome match(const ResonanceResult& r, const std::vector<std::pair<int, Cplx>>& oracle, Real tol) {
  Real worst = 0;
  int missing = 0, extra = 0;
  for (const auto& [m, s] : oracle) {
    Real best = 1e300L;
    for (const auto& e : r.entries)
      if (e.mode == m) best = std::min(best, std::abs(e.sigma - s));
    if (best > tol) ++missing;
    else worst = std::max(worst, best);
  }
  for (const auto& e : r.entries) {
    Real best = 1e300L;
    for (const auto& [m, s] : oracle)
      if (e.mode == m) best = std::min(best, std::abs(e.sigma - s));
    if (best > tol) ++extra;
  }
  return {missing == 0 && extra == 0, std::to_string(r.entries.size()) + " entries, " + std::to_string(missing) +
                                          " missing, " + std::to_string(extra) + " extra, max |dsigma| " + num(worst)};
}

// The two runs give the same filtered set entry for entry.
Outcome same_set(const ResonanceResult& a, const ResonanceResult& b, Real tol) {
  Real worst = 0;
  int unmatched = 0;
  for (const auto* p : {&a, &b}) {
    const auto* q = p == &a ? &b : &a;
    for (const auto& e : p->entries) {
      Real best = 1e300L;
      for (const auto& f : q->entries)
        if (f.mode == e.mode) best = std::min(best, std::abs(e.sigma - f.sigma));
      if (best > tol) ++unmatched;
      else worst = std::max(worst, best);
    }
  }
  return {unmatched == 0 && a.entries.size() == b.entries.size(),
          std::to_string(a.entries.size()) + " vs " + std::to_string(b.entries.size()) + " entries, max |dsigma| " +
              num(worst)};
}

ResonanceRun h2_run() {
  ResonanceRun run;
  run.model = hyperbolic_plane();
  run.N = 120;
  run.modes = {0, 1, 2, 3};
  run.re0 = -0.5L;
  run.re1 = 0.5L;
  run.im0 = -4;
  run.im1 = -0.2L;
  run.contour.threads = threads();
  return run;
}

ResonanceRun cylinder_run() {
  ResonanceRun run;
  run.model = cylinder(2 * kPi);
  run.N = 120;
  run.modes = {0, 1, 2};
  run.re0 = -2.5L;
  run.re1 = 2.5L;
  run.im0 = -3;
  run.im1 = -0.2L;
  run.contour.threads = threads();
  return run;
}

ResonanceRun with_alt_absorption(ResonanceRun run) {
  run.absorption.strength *= 2;
  run.absorption.chi_width *= 1.5L;
  return run;
}

ResonanceResult h2_result, cyl_result;

Outcome h2() {
  const ResonanceRun run = h2_run();
  h2_result = compute_resonances(run);
  return match(h2_result, h2_oracle(run.modes, run.im0), 1e-6L);
}

Outcome h3() {
  ResonanceRun run;
  run.model = hyperbolic_space_3();
  run.N = 120;
  run.modes = {0};
  // Covers the disc |sigma| < 5 above Im = -3 up to Im = 4.9, below the cut of
  // the absorption square root; the strip above is in the physical half-plane.
  run.re0 = -5;
  run.re1 = 5;
  run.im0 = -3;
  run.im1 = 4.9L;
  run.contour.threads = threads();
  const ResonanceResult r = compute_resonances(run);
  int inside = 0;
  for (const auto& e : r.entries)
    if (std::abs(e.sigma) < 5 && e.sigma.imag() > -3) ++inside;
  return {inside == 0, std::to_string(inside) + " resonances in the region"};
}

Outcome cyl() {
  cyl_result = compute_resonances(cylinder_run());
  return match(cyl_result, cylinder_oracle(2, 2), 1e-5L);
}

Outcome absorption_independence() {
  const Outcome a = same_set(h2_result, compute_resonances(with_alt_absorption(h2_run())), 1e-6L);
  const Outcome b = same_set(cyl_result, compute_resonances(with_alt_absorption(cylinder_run())), 1e-6L);
  return {a.pass && b.pass, "H2: " + a.detail + "; cylinder: " + b.detail};
}

SweepConfig sweep_config() {
  SweepConfig sw;
  sw.im_sigma = -1;
  sw.re0 = 20;
  sw.re1 = 160;
  sw.n_points = 18;
  sw.s = 2;
  sw.f_lo = 0.5L;
  sw.f_hi = 1.5L;
  sw.threads = threads();
  return sw;
}

// ratio * |sigma| over the upper half of the sweep never exceeds its maximum
// over the lower half.
bool bounded(const SweepResult& r) {
  Real lo = 0, hi = 0;
  const size_t n = r.rows.size();
  for (size_t k = 0; k < n; ++k) {
    const Real v = r.rows[k].ratio * std::abs(r.rows[k].sigma);
    if (!std::isfinite(static_cast<double>(v))) return false;
    (2 * k < n ? lo : hi) = std::max(2 * k < n ? lo : hi, v);
  }
  return hi <= lo;
}

Outcome sweep() {
  const SweepResult r = sweep_norm_estimate(hyperbolic_plane(), sweep_config(), AbsorptionConfig{});
  const bool slope_ok = r.slope >= -1.2L && r.slope <= -0.8L;
  const bool bound_ok = bounded(r);
  return {slope_ok && bound_ok, "slope " + num(r.slope) + " [" + num(r.slope_lo) + ", " + num(r.slope_hi) +
                                    "] " + (slope_ok ? "in" : "outside") + " [-1.2, -0.8]; max ratio*|sigma| " +
                                    num(r.max_ratio_sigma) + (bound_ok ? " bounded" : " growing")};
}

// Supplementary: right-hand side oscillating with sigma along the flow.
void sweep_phase_supplement() {
  SweepConfig sw = sweep_config();
  sw.f_phase = -0.25L;
  const SweepResult r = sweep_norm_estimate(hyperbolic_plane(), sw, AbsorptionConfig{});
  std::printf("INFO  sweep with f_phase = -0.25: slope %s, max ratio*|sigma| %s\n", num(r.slope).c_str(),
              num(r.max_ratio_sigma).c_str());
}

Outcome indicial() {
  const Cplx sigma(2, -0.5L);
  const ModeOperatorPencil P = build_mode_pencil(hyperbolic_plane(), AbsorptionConfig{}, 120, 0, 0,
                                                 BoundaryKind::center_regularity);
  const Real ratio = indicial_branch_ratio(P, sigma, bump_rhs(P, 0.5L, 1.5L));
  // Negative control: the same fit sees an injected mu^{i sigma} component.
  const VecR rn = P.grid.nodes.tail(P.grid.n_right);
  const VecC ru = solve_resolvent(P, sigma, bump_rhs(P, 0.5L, 1.5L)).u.tail(P.grid.n_right);
  const Real scale = std::abs(barycentric_eval(rn, ru, 0.05L));
  const Real control = branch_ratio(
      [&](Real x) { return barycentric_eval(rn, ru, x) + Real(1e-4L) * scale * std::exp(kI * sigma * std::log(x)); },
      sigma);
  return {ratio < 1e-6L && control > 1e-5L, "singular/smooth " + num(ratio) + ", injected control " + num(control)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("ahres_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  {
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"model": {"type": "hyperbolic-plane"}, "grid": {"N": 120}, "modes": [0, 1],)"
        << R"( "solver": {"window": {"re": [-0.5, 0.5], "im": [-2, -0.2]}}, "seed": 7})" << "\n";
  }
  int rc = 0;
  for (const char* sub : {"a", "b"}) {
    const std::string cmd = std::string("\"") + AHRES_BIN + "\" resonances --config \"" + (dir / "config.json").string() +
                            "\" --out \"" + (dir / sub).string() + "\" --seed 7 > /dev/null";
    rc |= std::system(cmd.c_str());
  }
  const std::string a = slurp(dir / "a" / "resonances.json"), b = slurp(dir / "b" / "resonances.json");
  fs::remove_all(dir);
  return {rc == 0 && !a.empty() && a == b,
          "exit " + std::to_string(rc) + ", " + std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "differ")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "conjugation identity", 5, conjugation},
      {2, "symbol identities", 10, symbols},
      {3, "radial source/sink dynamics", 30, radial},
      {4, "escape function and glancing convexity", 30, escape_convexity},
      {5, "H2 resonances modes 0-3", 60, h2},
      {6, "H3 mode 0 has no resonances", 60, h3},
      {7, "cylinder lattice", 120, cyl},
      {8, "absorption independence", 240, absorption_independence},
      {9, "high-energy sweep slope", 120, sweep},
      {10, "indicial branch purity", 10, indicial},
      {11, "determinism of resonances output", 120, determinism},
  };
  int unexpected = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt <= c.budget_s;
    const bool pass = o.pass && in_time;
    const bool expected = kExpectedFail.count(c.id) > 0;
    std::printf("%s  %2d %s: %s; %.1f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                dt, c.budget_s, !pass && expected ? " [expected failure]" : "");
    std::fflush(stdout);
    if (!pass && !expected) ++unexpected;
    if (c.id == 9) sweep_phase_supplement();
  }
  std::printf("%d unexpected failure(s)\n", unexpected);
  return unexpected == 0 ? 0 : 1;
}
