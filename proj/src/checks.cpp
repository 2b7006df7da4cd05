#include "ahres/checks.hpp"

#include <cmath>

#include "ahres/flow.hpp"

namespace ahres {

using nlohmann::json;

namespace {

json item(const std::string& name, bool pass, json values = json::object()) {
  values["name"] = name;
  values["pass"] = pass;
  return values;
}

double d(Real x) { return static_cast<double>(x); }

// The reference models plus the configured one when it is not among them.
std::vector<EvenMetricModel> models_with(const EvenMetricModel& m) {
  std::vector<EvenMetricModel> out{hyperbolic_plane(), cylinder(2 * kPi), hyperbolic_space_3()};
  bool seen = false;
  for (const auto& r : out)
    seen = seen || (r.name() == m.name() && r.mu_left == m.mu_left && r.mu_right == m.mu_right &&
                    r.ell_tilde == m.ell_tilde && m.type != ModelType::custom);
  if (!seen) out.push_back(m);
  return out;
}

// Test function with nonzero derivatives everywhere used by the oracles.
TestFunction analytic_test_fn() {
  return [](Real mu) {
    const Cplx e = std::exp(Cplx(0.3L, 0.7L) * mu);
    const Real s = std::sin(2 * mu), c = std::cos(2 * mu);
    return Jet2{e + s, Cplx(0.3L, 0.7L) * e + 2 * c, Cplx(0.3L, 0.7L) * Cplx(0.3L, 0.7L) * e - 4 * s};
  };
}

json geometry_suite(const RunConfig& cfg) {
  json out = json::array();
  Real worst = 0;
  for (const EvenMetricModel& m : models_with(cfg.model)) {
    const Real h = 1e-5L;
    for (int k = 1; k < 50; ++k) {
      const Real mu = m.mu_left + (m.mu_right - m.mu_left) * k / 51;
      const Real fd = (m.n - 1) * (std::log(m.warp(mu + h)) - std::log(m.warp(mu - h))) / (2 * h);
      worst = std::max(worst, std::fabs(gamma_from_metric(m, mu) - fd) / (1 + std::fabs(fd)));
    }
  }
  out.push_back(item("gamma_vs_finite_difference", worst < 1e-8L, {{"max_rel_err", d(worst)}}));
  const EvennessReport even = validate_evenness([](Real x) { return 1 + x * x + 0.5L * x * x * x * x; }, 1e-8L);
  const EvennessReport odd = validate_evenness([](Real x) { return 1 + 0.3L * x + x * x; }, 1e-8L);
  out.push_back(item("evenness_detects_odd_terms", even.pass && !odd.pass));
  bool threw = false;
  try {
    validate_model(custom_model(2, {1, -1}, -0.5L, 4));  // w = 1 - mu vanishes inside
  } catch (const Error&) {
    threw = true;
  }
  out.push_back(item("nonpositive_warp_rejected", threw));
  return out;
}

json extension_suite(const RunConfig& cfg) {
  json out = json::array();
  Rng rng(cfg.seed);
  for (const EvenMetricModel& m : models_with(cfg.model)) {
    const ExtendedCoeffs c = derive_extended_coeffs(m);
    Real worst = 0;
    for (int k = 0; k < 20; ++k) {
      const Cplx sigma(rng.uniform(-3, 3), rng.uniform(-2, 3));
      const Real mu = rng.uniform(0.05L, 1);
      const int mode = static_cast<int>(rng.uniform(0, 3));
      worst = std::max(worst, verify_conjugation_identity(c, m, sigma, analytic_test_fn(), mu, mode));
    }
    out.push_back(item("conjugation_identity_" + m.name(), worst < 1e-10L, {{"max_residual", d(worst)}}));
  }
  const PhaseWeight pw = build_phase_weight(cfg.model, cfg.plateau_a, cfg.plateau_b, cfg.mu_match);
  out.push_back(item("phase_weight_timelike", pw.max_sampled_norm_sq < 1,
                     {{"max_dphi_norm_sq", d(pw.max_sampled_norm_sq)}}));
  return out;
}

json symbols_suite(const RunConfig& cfg) {
  json out = json::array();
  const ExtendedCoeffs c = derive_extended_coeffs(cfg.model);
  Rng rng(cfg.seed + 1);
  const Real lo = cfg.model.mu_left, hi = cfg.model.mu_right * 0.9L;
  Real im_err = 0, real_err = 0, ns_err = 0, ham_err = 0, compact_err = 0;
  int xi0_bad = 0, char_bad = 0;
  const Real h = 1e-6L;
  for (int k = 0; k < 1000; ++k) {
    const PhasePoint pt{rng.uniform(lo, hi), rng.uniform(0, 2 * kPi), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Cplx z = std::polar(Real(1), rng.uniform(-kPi, kPi));
    const SemiSymbol ps = eval_p_semi(c, z, pt);
    const Real want = -2 * z.imag() * (2 * (1 + c.a2(pt.mu)) * pt.xi + (1 + c.a3(pt.mu)) * z.real());
    im_err = std::max(im_err, std::fabs(ps.im - want) / (1 + std::fabs(want)));
    const Real sr = rng.uniform(-5, 5);
    real_err = std::max(real_err, std::fabs(eval_p_full(c, Cplx(sr, 0), pt).imag()) / (1 + std::abs(eval_p_full(c, Cplx(sr, 0), pt))));
    const Real xi = rng.uniform(-3, 3);
    ns_err = std::max(ns_err, std::fabs(eval_p(c, PhasePoint{0, pt.y, xi, 0})));
    for (const FieldSpec& kind : {FieldSpec::classical(), FieldSpec::full(Cplx(sr, rng.uniform(-1, 1))),
                                  FieldSpec::semiclassical(z)}) {
      auto f = [&](Real dm, Real dy, Real dx, Real de) {
        return field_symbol(c, PhasePoint{pt.mu + dm, pt.y + dy, pt.xi + dx, pt.eta + de}, kind);
      };
      const Tangent t = hamilton_field(c, pt, kind);
      const Real fmu = (f(h, 0, 0, 0) - f(-h, 0, 0, 0)) / (2 * h), fy = (f(0, h, 0, 0) - f(0, -h, 0, 0)) / (2 * h);
      const Real fxi = (f(0, 0, h, 0) - f(0, 0, -h, 0)) / (2 * h), feta = (f(0, 0, 0, h) - f(0, 0, 0, -h)) / (2 * h);
      const Real dn = std::hypot(std::hypot(t.dmu - fxi, t.dy - feta), std::hypot(t.dxi + fmu, t.deta + fy));
      const Real sc = std::hypot(std::hypot(fxi, feta), std::hypot(fmu, fy));
      ham_err = std::max(ham_err, dn / (1 + sc));
    }
    // Rescaled field W = nu H in (mu, y, nu, eta_hat) against the chain rule.
    if (std::fabs(pt.xi) > 0.1L) {
      const FieldSpec kind = FieldSpec::semiclassical(Cplx(z.real(), 0));
      const Tangent t = hamilton_field(c, pt, kind);
      const CompactifiedPhasePoint cp = to_compactified(pt);
      const CompactTangent w = hamilton_field(c, cp, kind);
      const Real nu = cp.nu, sg = cp.sgn;
      const Real dnu = -sg * nu * nu * t.dxi * nu;
      const Real deh = nu * (t.deta * nu - pt.eta * sg * nu * nu * t.dxi);
      const Real dn = std::hypot(std::hypot(w.dmu - nu * t.dmu, w.dy - nu * t.dy), std::hypot(w.dnu - dnu, w.deta_hat - deh));
      compact_err = std::max(compact_err, dn / (1 + std::hypot(nu * t.dmu, nu * t.dy)));
    }
    if (char_component(c, PhasePoint{pt.mu, pt.y, 0, pt.eta}) != CharComponent::NotCharacteristic) ++xi0_bad;
    const CharComponent cc = char_component(c, pt);
    if (cc != CharComponent::NotCharacteristic && pt.mu > 0) ++char_bad;
  }
  out.push_back(item("im_semiclassical_identity", im_err < 1e-15L, {{"max_err", d(im_err)}}));
  out.push_back(item("real_for_real_sigma", real_err < 1e-15L, {{"max_err", d(real_err)}}));
  out.push_back(item("vanishes_on_conormal", ns_err == 0, {{"max_abs", d(ns_err)}}));
  Real dp_err = 0;
  for (Real xi : {-2.0L, -0.5L, 1.0L, 3.0L}) {
    const PhasePoint p0{0, 0.3L, xi, 0};
    auto p = [&](Real dm, Real dy, Real dx, Real de) {
      return eval_p(c, PhasePoint{p0.mu + dm, p0.y + dy, p0.xi + dx, p0.eta + de});
    };
    const Real g[4] = {(p(h, 0, 0, 0) - p(-h, 0, 0, 0)) / (2 * h), (p(0, h, 0, 0) - p(0, -h, 0, 0)) / (2 * h),
                       (p(0, 0, h, 0) - p(0, 0, -h, 0)) / (2 * h), (p(0, 0, 0, h) - p(0, 0, 0, -h)) / (2 * h)};
    dp_err = std::max({dp_err, std::fabs(g[0] - 4 * xi * xi), std::fabs(g[1]), std::fabs(g[2]), std::fabs(g[3])});
  }
  out.push_back(item("dp_on_conormal", dp_err < 1e-8L, {{"max_err", d(dp_err)}}));
  out.push_back(item("hamilton_field_vs_symplectic_gradient", ham_err < 1e-6L, {{"max_rel_err", d(ham_err)}}));
  out.push_back(item("compactified_field_chain_rule", compact_err < 1e-12L, {{"max_rel_err", d(compact_err)}}));
  out.push_back(item("xi_zero_not_characteristic", xi0_bad == 0, {{"violations", xi0_bad}}));
  out.push_back(item("characteristic_set_in_mu_le_0", char_bad == 0, {{"violations", char_bad}}));
  return out;
}

json flow_suite(const RunConfig& cfg) {
  json out = json::array();
  const ExtendedCoeffs c = derive_extended_coeffs(cfg.model);
  const SourceSinkReport ss = check_source_sink(c, 1e-3L, 200, cfg.seed);
  out.push_back(item("radial_source_sink", ss.pass,
                     {{"converged", ss.converged}, {"n", ss.n_samples}, {"min_rho0_rate", d(ss.min_rho0_rate)},
                      {"rho_tilde_rate", {d(ss.min_rho_tilde_rate), d(ss.max_rho_tilde_rate)}}}));
  const EscapeReport es = check_escape_function(c, 0.1L, 1000, cfg.seed);
  out.push_back(item("escape_function", es.pass, {{"sign_ok", es.sign_ok}, {"class_ok", es.class_ok}, {"n", es.n_samples}}));
  const ConvexityReport cv = check_glancing_convexity(c, 1, 0.1L, 1000, cfg.seed);
  out.push_back(item("glancing_convexity", cv.pass,
                     {{"constructed", cv.constructed}, {"negative", cv.negative}, {"flow_negative", cv.flow_negative},
                      {"skipped", cv.skipped}, {"max_rel_mismatch", d(cv.max_rel_mismatch)}}));
  const DichotomyReport dr = check_semiclassical_dichotomy(c, 1, 0.1L, 200, cfg.seed);
  out.push_back(item("semiclassical_dichotomy", dr.pass,
                     {{"consistent", dr.consistent}, {"trapped", dr.trapped}, {"n", dr.n_samples}}));
  // Crossing direction: at mu = 0 the semiclassical field points outward.
  Rng rng(cfg.seed + 7);
  int inward = 0;
  for (int k = 0; k < 200; ++k) {
    const Real xi = rng.uniform(-5, 5), eta = rng.uniform(-3, 3);
    if (hamilton_field(c, PhasePoint{0, 0, xi, eta}, FieldSpec::semiclassical(Cplx(1, 0))).dmu >= 0) ++inward;
  }
  out.push_back(item("outward_crossing_at_boundary", inward == 0, {{"violations", inward}}));
  if (cfg.model.trapping_flag) {
    FlowStops st;
    st.max_time = 2;
    st.mu_right_stop = cfg.model.mu_right + 1;
    const Trajectory tr = integrate_bicharacteristic(c, neck_orbit_point(c, 1, cfg.model.mu_right), 1,
                                                     FieldSpec::semiclassical(Cplx(1, 0)), st);
    out.push_back(item("neck_orbit_trapped", tr.terminal == Terminal::Trapped, {{"terminal", to_string(tr.terminal)}}));
  }
  return out;
}

json absorption_suite(const RunConfig& cfg) {
  json out = json::array();
  MatC M(2, 2);
  M << 0, 1, -1, 0;
  const MatC R = principal_sqrt(M);
  Eigen::ComplexEigenSolver<MatC> es(R);
  const bool rhp = es.eigenvalues()(0).real() > 0 && es.eigenvalues()(1).real() > 0;
  out.push_back(item("principal_sqrt_rotation", rhp && (R * R - M).norm() < 1e-12L, {{"residual", d((R * R - M).norm())}}));
  const ExtendedCoeffs c = derive_extended_coeffs(cfg.model);
  const SignReport sr = verify_sign_conditions(cfg.absorption, c, 1, 1000, cfg.seed);
  out.push_back(item("sign_conditions", sr.pass,
                     {{"classical_ok", sr.classical_ok}, {"classical", sr.classical_samples}, {"semi_ok", sr.semi_ok},
                      {"semi", sr.semi_samples}, {"min_elliptic_ratio", d(sr.min_elliptic_ratio)}}));
  if (cfg.absorption.mode == AbsorptionMode::paper_sigma_dependent) {
    const ModeOperatorPencil P = build_mode_pencil(cfg.model, cfg.absorption, 64, 0, cfg.run.modes[0],
                                                   boundary_sectors(cfg.model).front());
    const Real defect = cauchy_holomorphy_defect(P.Q_rule, Cplx(0.3L, -1), 0.1L, 32);
    out.push_back(item("q_holomorphic", defect < 1e-8L, {{"defect", d(defect)}}));
    // Support: rows and columns outside the chi window vanish.
    const MatC Q = P.Q(Cplx(0.3L, -1));
    Real leak = 0;
    for (int i = 0; i < Q.rows(); ++i)
      if (chi_profile(P.grid.nodes(i), cfg.absorption) == 0) leak = std::max({leak, Q.row(i).norm(), Q.col(i).norm()});
    out.push_back(item("q_support", leak <= 1e-14L * Q.norm(), {{"leak", d(leak)}}));
  }
  return out;
}

json discretize_suite(const RunConfig& cfg) {
  json out = json::array();
  const ChebBlock b = chebyshev_block(-0.5L, 4, 64);
  Real err = 0, cst = 0;
  for (int i = 0; i < 64; ++i) {
    Real s = 0, sc = 0;
    for (int j = 0; j < 64; ++j) {
      s += b.D1(i, j) * std::sin(b.nodes(j));
      sc += b.D1(i, j);
    }
    err = std::max(err, std::fabs(s - std::cos(b.nodes(i))));
    cst = std::max(cst, std::fabs(sc));
  }
  out.push_back(item("d1_sine", err < 1e-10L, {{"max_err", d(err)}}));
  out.push_back(item("d1_constants", cst < 1e-12L, {{"max_abs", d(cst)}}));
  const ExtendedCoeffs c = derive_extended_coeffs(cfg.model);
  const Real asym = weighted_asymmetry(c, cfg.run.modes[0], 1, 96, 0.2L, cfg.model.mu_right * 0.8L);
  out.push_back(item("weighted_symmetry", asym < 1e-6L, {{"asymmetry", d(asym)}}));
  // Spectral convergence of the collocated operator on an analytic function.
  std::vector<double> errs;
  const Cplx sigma(2, -1);
  // Pole at mu = -0.35 just outside [0.1, 3]: geometric rather than instant convergence.
  const TestFunction tf = [](Real mu) {
    const Real r = 1 / (mu + 0.35L);
    return Jet2{r, -r * r, 2 * r * r * r};
  };
  for (int N : {32, 64, 128}) {
    const ChebBlock blk = chebyshev_block(0.1L, 3, N);
    const BlockOperator op = assemble_block_operator(c, blk.nodes, blk.D1, cfg.run.modes[0]);
    VecC u(N);
    for (int i = 0; i < N; ++i) u(i) = tf(blk.nodes(i)).v;
    const VecC Pu = (op.A2 * (sigma * sigma) + op.A1 * sigma + op.A0) * u;
    Real e = 0;
    for (int i = 0; i < N; ++i)
      e = std::max(e, std::abs(Pu(i) - apply_extended_operator(c, sigma, tf(blk.nodes(i)), blk.nodes(i), cfg.run.modes[0])));
    errs.push_back(d(e));
  }
  out.push_back(item("spectral_convergence", errs[1] < 1e-2 * errs[0] && errs[2] < 1e-8, {{"max_err", errs}}));
  // Subprincipal part at the radial set: h Im<Pu,u>/<u,u> -> -4 Im(sigma) xi.
  std::vector<double> dev;
  for (Real hh : {1e-2L, 5e-3L, 2.5e-3L}) {
    const Real v = subprincipal_rayleigh(c, cfg.run.modes[0], Cplx(1, -0.5L), 1, hh);
    dev.push_back(d(std::fabs(v - (-4 * -0.5L * 1))));
  }
  out.push_back(item("subprincipal_at_radial_set", dev[2] < dev[0] && dev[2] < 0.2, {{"deviation", dev}}));
  return out;
}

json solver_suite(const RunConfig& cfg, int threads) {
  json out = json::array();
  const EvenMetricModel h2 = hyperbolic_plane();
  AbsorptionConfig abs;
  const ModeOperatorPencil P = build_mode_pencil(h2, abs, 120, 0, 0, BoundaryKind::center_regularity);
  ContourOptions o = cfg.run.contour;
  o.threads = threads;
  const ResonanceResult phys = find_resonances_contour(P, Contour{Cplx(0, 3), 0.5L, 32}, o);
  out.push_back(item("no_poles_in_physical_half_plane", phys.entries.empty(), {{"found", phys.entries.size()}}));
  const ResonanceResult one = find_resonances_contour(P, Contour{Cplx(0, -0.6L), 0.3L, 32}, o);
  const bool got = one.entries.size() == 1 && std::abs(one.entries[0].sigma - Cplx(0, -0.5L)) < 1e-9L;
  out.push_back(item("h2_first_resonance", got, {{"found", one.entries.size()}}));
  Rng rng(cfg.seed);
  Real worst = 0;
  for (int k = 0; k < 20; ++k) {
    VecC f = VecC::Zero(P.grid.size());
    for (int i : P.equation_rows()) f(i) = Cplx(rng.normal(), rng.normal());
    worst = std::max(worst, solve_resolvent(P, Cplx(2, -0.3L), f).residual);
  }
  out.push_back(item("resolvent_residual", worst < 1e-10L, {{"max_residual", d(worst)}}));
  const Real dip = singular_value_dip(P, Cplx(0, -1.5L), 0.05L);
  out.push_back(item("singular_value_dip", dip < 1e-4L, {{"ratio", d(dip)}}));
  const Real br = indicial_branch_ratio(P, Cplx(2, -0.5L), bump_rhs(P, 0.5L, 1.5L));
  out.push_back(item("indicial_branch_purity", br < 1e-6L, {{"ratio", d(br)}}));
  // The solution on mu > 0 must not see where the domain is truncated.
  VecC base;
  Real shift = 0;
  for (Real ml : {-0.4L, -0.5L, -0.6L}) {
    const ModeOperatorPencil Pm = build_mode_pencil(hyperbolic_plane(ml), abs, 120, 0, 0, BoundaryKind::center_regularity);
    const VecC u = solve_resolvent(Pm, Cplx(1.3L, -0.7L), bump_rhs(Pm, 0.3L, 1.2L)).u;
    VecC s(40);
    const VecR rn = Pm.grid.nodes.tail(Pm.grid.n_right);
    const VecC ru = u.tail(Pm.grid.n_right);
    for (int i = 0; i < 40; ++i) s(i) = barycentric_eval(rn, ru, 0.05L + 3.9L * i / 39);
    if (base.size() == 0) base = s;
    else shift = std::max(shift, (s - base).norm() / base.norm());
  }
  out.push_back(item("truncation_locality", shift < 1e-8L, {{"max_rel_change", d(shift)}}));
  return out;
}

}  // namespace

const std::vector<std::string>& check_suite_names() {
  static const std::vector<std::string> names{"geometry", "extension", "symbols", "flow",
                                              "absorption", "discretize", "solver"};
  return names;
}

json run_checks(const std::vector<std::string>& suites, const RunConfig& cfg, int threads) {
  json report = json::object();
  bool all = true;
  for (const std::string& s : suites) {
    json checks;
    if (s == "geometry") checks = geometry_suite(cfg);
    else if (s == "extension") checks = extension_suite(cfg);
    else if (s == "symbols") checks = symbols_suite(cfg);
    else if (s == "flow") checks = flow_suite(cfg);
    else if (s == "absorption") checks = absorption_suite(cfg);
    else if (s == "discretize") checks = discretize_suite(cfg);
    else if (s == "solver") checks = solver_suite(cfg, threads);
    else throw Error(ErrorKind::validation, "unknown check suite '" + s + "'");
    bool pass = true;
    for (const auto& c : checks) pass = pass && c["pass"].get<bool>();
    report[s] = {{"pass", pass}, {"checks", checks}};
    all = all && pass;
  }
  return {{"suites", report}, {"pass", all}};
}

}  // namespace ahres
