#include "ahres/flow.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace ahres {

namespace odeint = boost::numeric::odeint;

Rng::Rng(std::uint64_t seed) : eng_(seed) {}

Real Rng::uniform() { return static_cast<Real>(eng_() >> 11) * 0x1.0p-53L; }

Real Rng::normal() {
  Real u1 = uniform();
  while (u1 <= 0) u1 = uniform();
  const Real u2 = uniform();
  return std::sqrt(-2 * std::log(u1)) * std::cos(2 * kPi * u2);
}

const char* to_string(Terminal t) {
  switch (t) {
    case Terminal::ConvergedLPlus: return "ConvergedLPlus";
    case Terminal::ConvergedLMinus: return "ConvergedLMinus";
    case Terminal::ExitMuLeft: return "ExitMuLeft";
    case Terminal::ExitMuRight: return "ExitMuRight";
    case Terminal::ExitChart: return "ExitChart";
    case Terminal::Trapped: return "Trapped";
  }
  return "?";
}

namespace {

using State = std::array<Real, 4>;

Real rho_sum(const ExtendedCoeffs& c, const CompactifiedPhasePoint& p) {
  const RadialQuantities r = radial_quantities(c, p);
  return r.rho_tilde * r.rho_tilde + r.rho0;
}

CompactifiedPhasePoint unpack(const State& x, int sgn) { return {x[0], x[1], x[2], x[3], sgn}; }

}  // namespace

Trajectory integrate_bicharacteristic(const ExtendedCoeffs& c, const CompactifiedPhasePoint& start, int direction,
                                      const FieldSpec& kind, const FlowStops& stops) {
  if (!(stops.eps0 > 0) || !(stops.eps1 > 0)) throw Error(ErrorKind::domain, "eps0 and eps1 must be positive");
  if (start.nu < 0) throw Error(ErrorKind::domain, "nu must be nonnegative");
  const int sgn = start.sgn >= 0 ? 1 : -1;
  const Real dir = direction >= 0 ? 1 : -1;
  const Real right_stop = stops.mu_right_stop.value_or(stops.eps0);

  Trajectory tr;
  State x{start.mu, start.y, start.nu, start.eta_hat};
  Real t = 0;
  tr.samples.push_back({0, unpack(x, sgn)});

  auto classify = [&](const State& s) -> std::optional<Terminal> {
    const CompactifiedPhasePoint p = unpack(s, sgn);
    if (rho_sum(c, p) < stops.eps1) return sgn > 0 ? Terminal::ConvergedLPlus : Terminal::ConvergedLMinus;
    if (s[0] < -stops.eps0) return Terminal::ExitMuLeft;
    if (s[0] > right_stop) return Terminal::ExitMuRight;
    if (s[2] > stops.nu_max) return Terminal::ExitChart;
    return std::nullopt;
  };
  if (auto term = classify(x)) {
    tr.terminal = *term;
    return tr;
  }

  auto rhs = [&](const State& s, State& dx, Real) {
    const CompactTangent v = hamilton_field(c, unpack(s, sgn), kind);
    dx = {dir * v.dmu, dir * v.dy, dir * v.dnu, dir * v.deta_hat};
  };
  auto stepper = odeint::make_controlled(Real(1e-30L), stops.rtol, odeint::runge_kutta_dopri5<State, Real, State, Real>());
  Real dt = 1e-3L;
  Real last_dmu = 0;
  Real last_rho = rho_sum(c, start);
  int failures = 0;
  while (t < stops.max_time) {
    dt = std::min(dt, stops.max_time - t);
    const State prev = x;
    const odeint::controlled_step_result r = stepper.try_step(rhs, x, t, dt);
    if (r == odeint::fail) {
      if (++failures > 200 || dt < 1e-18L) {
        std::ostringstream os;
        os << "integrator step failure at t = " << static_cast<double>(t);
        throw Error(ErrorKind::numerical, os.str());
      }
      continue;
    }
    failures = 0;
    const Real dmu = x[0] - prev[0];
    if (dmu != 0) {
      if (last_dmu != 0 && (dmu > 0) != (last_dmu > 0)) ++tr.mu_reversals;
      last_dmu = dmu;
    }
    const Real rho = rho_sum(c, unpack(x, sgn));
    if (rho > last_rho * (1 + 1e-12L)) ++tr.rho_increases;
    last_rho = rho;
    tr.samples.push_back({dir * t, unpack(x, sgn)});
    if (auto term = classify(x)) {
      tr.terminal = *term;
      return tr;
    }
  }
  tr.terminal = Terminal::Trapped;
  return tr;
}

namespace {

// Least-squares slope of log(values) against times.
Real fit_rate(const std::vector<Real>& times, const std::vector<Real>& values) {
  Real st = 0, sv = 0, stt = 0, stv = 0;
  int n = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(values[k] > 0)) continue;
    const Real lv = std::log(values[k]);
    st += times[k];
    sv += lv;
    stt += times[k] * times[k];
    stv += times[k] * lv;
    ++n;
  }
  if (n < 3) return 0;
  const Real den = n * stt - st * st;
  return den == 0 ? 0 : -(n * stv - st * sv) / den;
}

}  // namespace

SourceSinkReport check_source_sink(const ExtendedCoeffs& c, Real radius, int n_samples, std::uint64_t seed) {
  SourceSinkReport rep;
  rep.n_samples = n_samples;
  rep.min_rho0_rate = 1e300L;
  rep.min_rho_tilde_rate = 1e300L;
  rep.max_rho_tilde_rate = -1e300L;
  Rng rng(seed);
  FlowStops stops;
  stops.eps0 = 0.1L;
  stops.max_time = 50;
  for (int k = 0; k < n_samples; ++k) {
    const int sgn = (k % 2 == 0) ? 1 : -1;
    Real v[3];
    Real nrm = 0;
    for (auto& e : v) {
      e = rng.normal();
      nrm += e * e;
    }
    nrm = std::sqrt(nrm);
    CompactifiedPhasePoint p{radius * v[0] / nrm, rng.uniform(0, 2 * kPi), radius * std::fabs(v[1]) / nrm,
                             radius * v[2] / nrm, sgn};
    // L_+ is a source (converges backward); L_- is a sink (converges forward).
    const int direction = sgn > 0 ? -1 : 1;
    const Trajectory tr = integrate_bicharacteristic(c, p, direction, FieldSpec::classical(), stops);
    const Terminal want = sgn > 0 ? Terminal::ConvergedLPlus : Terminal::ConvergedLMinus;
    if (tr.terminal != want) {
      std::ostringstream os;
      os << "seed " << k << " ended " << to_string(tr.terminal);
      rep.failures.push_back(os.str());
      continue;
    }
    ++rep.converged;
    std::vector<Real> ts, r0, rt;
    for (const auto& s : tr.samples) {
      const RadialQuantities rq = radial_quantities(c, s.pt);
      ts.push_back(std::fabs(s.t));
      r0.push_back(rq.rho0);
      rt.push_back(rq.rho_tilde);
    }
    rep.min_rho0_rate = std::min(rep.min_rho0_rate, fit_rate(ts, r0));
    if (p.nu > 0) {
      const Real rr = fit_rate(ts, rt);
      rep.min_rho_tilde_rate = std::min(rep.min_rho_tilde_rate, rr);
      rep.max_rho_tilde_rate = std::max(rep.max_rho_tilde_rate, rr);
    }
  }
  // Structural rates: rho0 decays at >= 8, rho_tilde at 4 (ratio 4:8), 5% slack.
  const Real lo = 4 * 0.95L, hi = 4 * 1.05L;
  rep.pass = rep.converged == n_samples && rep.min_rho0_rate >= 8 * 0.95L && rep.min_rho_tilde_rate >= lo &&
             rep.max_rho_tilde_rate <= hi;
  return rep;
}

EscapeReport check_escape_function(const ExtendedCoeffs& c, Real eps0, int n_samples, std::uint64_t seed) {
  EscapeReport rep;
  rep.n_samples = n_samples;
  Rng rng(seed);
  for (int k = 0; k < n_samples; ++k) {
    Real mu = -eps0 * rng.uniform();
    if (mu == 0) mu = -eps0 / 2;
    const Real mag = std::exp(rng.uniform(-3, 3));
    const Real xi = (k % 2 == 0 ? 1 : -1) * mag;
    // Characteristic: |eta|^2 = -4(1+a1) mu xi^2.
    const Real eta = std::sqrt(-4 * (1 + c.a1(mu)) * mu * xi * xi * c.w(mu)) * (rng.uniform() < 0.5 ? 1 : -1);
    const PhasePoint pt{mu, 0, xi, eta};
    const Real hmu = hamilton_field(c, pt, FieldSpec::classical()).dmu;
    if ((hmu > 0 ? 1 : (hmu < 0 ? -1 : 0)) == (xi > 0 ? -1 : 1)) ++rep.sign_ok;
    const CharComponent cc = char_component(c, pt);
    if (cc == (xi > 0 ? CharComponent::SigmaPlus : CharComponent::SigmaMinus)) ++rep.class_ok;
  }
  rep.radial_hp_mu = hamilton_field(c, PhasePoint{0, 0, 1, 0}, FieldSpec::classical()).dmu;
  rep.pass = rep.sign_ok == n_samples && rep.class_ok == n_samples && rep.radial_hp_mu == 0;
  return rep;
}

Real glancing_second_derivative(const ExtendedCoeffs& c, Real z, const PhasePoint& pt) {
  // H(H mu) = {p, d_xi p} = d_xi p * d_mu d_xi p - d_mu p * d_xi^2 p, and d_xi p = 0.
  const Tangent t = hamilton_field(c, pt, FieldSpec::semiclassical(Cplx(z, 0)));
  return t.dmu * (8 * c.da1(pt.mu) * pt.mu * pt.xi + 8 * (1 + c.a1(pt.mu)) * pt.xi - 4 * c.da2(pt.mu) * z) +
         t.dxi * 8 * (1 + c.a1(pt.mu)) * pt.mu;
}

namespace {

// Classical RK4 on the uncompactified field; used only as an independent check.
PhasePoint rk4_flow(const ExtendedCoeffs& c, const FieldSpec& k, PhasePoint p, Real T, int steps) {
  const Real h = T / steps;
  auto f = [&](const PhasePoint& q) { return hamilton_field(c, q, k); };
  auto add = [](const PhasePoint& q, const Tangent& d, Real s) {
    return PhasePoint{q.mu + s * d.dmu, q.y + s * d.dy, q.xi + s * d.dxi, q.eta + s * d.deta};
  };
  for (int i = 0; i < steps; ++i) {
    const Tangent k1 = f(p), k2 = f(add(p, k1, h / 2)), k3 = f(add(p, k2, h / 2)), k4 = f(add(p, k3, h));
    p.mu += h / 6 * (k1.dmu + 2 * k2.dmu + 2 * k3.dmu + k4.dmu);
    p.y += h / 6 * (k1.dy + 2 * k2.dy + 2 * k3.dy + k4.dy);
    p.xi += h / 6 * (k1.dxi + 2 * k2.dxi + 2 * k3.dxi + k4.dxi);
    p.eta += h / 6 * (k1.deta + 2 * k2.deta + 2 * k3.deta + k4.deta);
  }
  return p;
}

}  // namespace

ConvexityReport check_glancing_convexity(const ExtendedCoeffs& c, Real z, Real eps0, int n_samples,
                                         std::uint64_t seed, bool constant_mode) {
  ConvexityReport rep;
  rep.n_samples = n_samples;
  Rng rng(seed);
  const FieldSpec kind = FieldSpec::semiclassical(Cplx(z, 0));
  for (int k = 0; k < n_samples; ++k) {
    const Real mu = eps0 * (0.01L + 0.98L * rng.uniform());
    // H mu = 0 fixes xi = z (1+a2) / (2 mu (1+a1)); p = 0 then fixes |eta|.
    const Real xi = z * (1 + c.a2(mu)) / (2 * mu * (1 + c.a1(mu)));
    const Real eta_sq = c.w(mu) * (-4 * (1 + c.a1(mu)) * mu * xi * xi + 4 * (1 + c.a2(mu)) * z * xi +
                                   (1 + c.a3(mu)) * z * z);
    if (constant_mode || !(eta_sq > 0)) {
      ++rep.skipped;
      continue;
    }
    ++rep.constructed;
    const PhasePoint pt{mu, 0, xi, std::sqrt(eta_sq) * (rng.uniform() < 0.5 ? 1 : -1)};
    const Real h2 = glancing_second_derivative(c, z, pt);
    if (h2 < 0) ++rep.negative;
    if (hamilton_field(c, pt, kind).dxi < 0) ++rep.hp_xi_negative;
    const Real d = 1e-3L * mu * mu;
    const PhasePoint fwd = rk4_flow(c, kind, pt, d, 20), bwd = rk4_flow(c, kind, pt, -d, 20);
    const Real fd = (fwd.mu - 2 * mu + bwd.mu) / (d * d);
    if (fd < 0) ++rep.flow_negative;
    rep.max_rel_mismatch = std::max(rep.max_rel_mismatch, std::fabs(fd - h2) / std::fabs(h2));
  }
  rep.pass = rep.constructed > 0 && rep.negative == rep.constructed && rep.flow_negative == rep.constructed &&
             rep.max_rel_mismatch < 1e-3L;
  return rep;
}

CompactifiedPhasePoint neck_orbit_point(const ExtendedCoeffs& c, Real z, Real mu) {
  const Real xi = z * (1 + c.a2(mu)) / (2 * mu * (1 + c.a1(mu)));
  const Real eta_sq =
      c.w(mu) * (-4 * (1 + c.a1(mu)) * mu * xi * xi + 4 * (1 + c.a2(mu)) * z * xi + (1 + c.a3(mu)) * z * z);
  if (!(eta_sq > 0)) throw Error(ErrorKind::domain, "no characteristic lift at the neck");
  return to_compactified(PhasePoint{mu, 0, xi, std::sqrt(eta_sq)});
}

DichotomyReport check_semiclassical_dichotomy(const ExtendedCoeffs& c, Real z, Real eps0, int n_samples,
                                              std::uint64_t seed) {
  DichotomyReport rep;
  rep.n_samples = n_samples;
  Rng rng(seed);
  FlowStops stops;
  stops.eps0 = eps0;
  stops.mu_right_stop = eps0;
  stops.max_time = 200;
  const FieldSpec kind = FieldSpec::semiclassical(Cplx(z, 0));
  int made = 0;
  while (made < n_samples) {
    const Real mu = eps0 * rng.uniform(-0.9L, 0.9L);
    const Real xi = (rng.uniform() < 0.5 ? 1 : -1) * std::exp(rng.uniform(-2, 4));
    const Real eta_sq = c.w(mu) * (-4 * (1 + c.a1(mu)) * mu * xi * xi + 4 * (1 + c.a2(mu)) * z * xi +
                                   (1 + c.a3(mu)) * z * z);
    if (!(eta_sq >= 0)) continue;
    const PhasePoint pt{mu, 0, xi, std::sqrt(eta_sq)};
    const Real split = 2 * (1 + c.a2(mu)) * xi + (1 + c.a3(mu)) * z;
    if (std::fabs(split) < 1e-6L) continue;
    ++made;
    const bool plus = split > 0;
    const CompactifiedPhasePoint cp = to_compactified(pt);
    const Terminal fw = integrate_bicharacteristic(c, cp, 1, kind, stops).terminal;
    const Terminal bw = integrate_bicharacteristic(c, cp, -1, kind, stops).terminal;
    if (fw == Terminal::Trapped || bw == Terminal::Trapped) {
      ++rep.trapped;
      continue;
    }
    // Plus component: emanates from L_+ (or the interior), leaves outward.
    // Minus component mirrors it with L_- in the forward direction.
    bool ok;
    if (plus)
      ok = bw != Terminal::ConvergedLMinus && fw != Terminal::ConvergedLPlus && fw != Terminal::ConvergedLMinus;
    else
      ok = fw != Terminal::ConvergedLPlus && bw != Terminal::ConvergedLPlus && bw != Terminal::ConvergedLMinus;
    if (ok) ++rep.consistent;
  }
  rep.pass = rep.consistent + rep.trapped == n_samples;
  return rep;
}

}  // namespace ahres
