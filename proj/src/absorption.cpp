#include "ahres/absorption.hpp"

#include <cmath>
#include <sstream>

#include "ahres/flow.hpp"

namespace ahres {

const char* to_string(AbsorptionMode m) {
  switch (m) {
    case AbsorptionMode::paper_sigma_dependent: return "paper_sigma_dependent";
    case AbsorptionMode::sigma_independent: return "sigma_independent";
    case AbsorptionMode::off: return "off";
  }
  return "?";
}

AbsorptionMode absorption_mode_from_string(const std::string& s) {
  if (s == "paper_sigma_dependent") return AbsorptionMode::paper_sigma_dependent;
  if (s == "sigma_independent") return AbsorptionMode::sigma_independent;
  if (s == "off") return AbsorptionMode::off;
  throw Error(ErrorKind::validation, "unknown absorption mode '" + s + "'");
}

namespace {

Real window_bump(Real mu, Real center, Real half_width) {
  const Real t = std::fabs(mu - center) / half_width;
  if (t <= 0.5L) return 1;
  if (t >= 1) return 0;
  const Real s = (t - 0.5L) / 0.5L;
  return std::exp(1 - 1 / (1 - s * s));
}

}  // namespace

Real chi_profile(Real mu, const AbsorptionConfig& cfg) {
  const Real hi = cfg.mu0 / 2;
  Real v = window_bump(mu, hi - cfg.chi_width, cfg.chi_width);
  if (cfg.interior_window) {
    const auto [a, b] = *cfg.interior_window;
    v = std::max(v, window_bump(mu, (a + b) / 2, (b - a) / 2));
  }
  return v;
}

MatC principal_sqrt(const MatC& M) {
  const int N = static_cast<int>(M.rows());
  if (N == 0) return M;
  Eigen::ComplexSchur<MatC> schur(M);
  if (schur.info() != Eigen::Success) throw Error(ErrorKind::numerical, "Schur decomposition failed in matrix square root");
  const MatC& T = schur.matrixT();
  const MatC& U = schur.matrixU();
  const Real scale = std::max(Real(1), M.cwiseAbs().maxCoeff());
  MatC R = MatC::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    const Cplx t = T(i, i);
    if (std::fabs(t.imag()) <= 1e-14L * scale && t.real() <= 1e-14L * scale) {
      std::ostringstream os;
      os << "eigenvalue " << static_cast<double>(t.real()) << "+" << static_cast<double>(t.imag())
         << "i on the square-root cut";
      throw Error(ErrorKind::branch, os.str());
    }
    R(i, i) = std::sqrt(t);  // principal branch, Re > 0
  }
  for (int j = 1; j < N; ++j)
    for (int i = j - 1; i >= 0; --i) {
      Cplx s = T(i, j);
      for (int k = i + 1; k < j; ++k) s -= R(i, k) * R(k, j);
      R(i, j) = s / (R(i, i) + R(j, j));
    }
  return U * R * U.adjoint();
}

namespace {

// One absorbing region: indices [lo, hi] of a block with its own D1.
struct QBlock {
  int offset = 0;  // global index of block row 0
  int size = 0;
  MatC Dm;         // D_mu on the block
  MatC K0;         // D_mu^2 + lambda/w on the block interior
  VecC chi_half;   // chi^{1/2} at block nodes; zero at block ends
  VecR one_a2, one_a3;
};

QBlock make_block(const Grid& g, int offset, int size, int mode, const ExtendedCoeffs& c, const AbsorptionConfig& cfg) {
  QBlock b;
  b.offset = offset;
  b.size = size;
  const MatR D1 = g.D1.block(offset, offset, size, size);
  b.Dm = MatC(D1.cast<Cplx>()) * (-kI);
  const MatR D2 = D1 * D1;
  const int ni = size - 2;
  b.K0 = MatC::Zero(ni, ni);
  b.K0 = (-D2.block(1, 1, ni, ni)).cast<Cplx>();
  b.chi_half = VecC::Zero(size);
  b.one_a2.resize(size);
  b.one_a3.resize(size);
  for (int k = 0; k < size; ++k) {
    const Real mu = g.nodes(offset + k);
    b.one_a2(k) = 1 + c.a2(mu);
    b.one_a3(k) = 1 + c.a3(mu);
    if (k > 0 && k < size - 1) {
      b.chi_half(k) = std::sqrt(chi_profile(mu, cfg));
      b.K0(k - 1, k - 1) += c.lambda_over_w(mode, mu);
    }
  }
  return b;
}

bool block_active(const QBlock& b) { return b.chi_half.cwiseAbs().maxCoeff() > 0; }

MatC block_q(const QBlock& b, Cplx sigma, const AbsorptionConfig& cfg) {
  const int n = b.size, ni = n - 2;
  MatC S = MatC::Zero(n, n);
  MatC A;
  if (cfg.mode == AbsorptionMode::paper_sigma_dependent) {
    S.block(1, 1, ni, ni) = principal_sqrt(b.K0 + MatC::Identity(ni, ni) * (sigma * sigma + cfg.C * cfg.C));
    A = b.one_a2.cast<Cplx>().asDiagonal() * b.Dm * Real(4);
    A.diagonal() += b.one_a3.cast<Cplx>() * (Real(2) * sigma);
  } else {
    S.block(1, 1, ni, ni) = principal_sqrt(b.K0 + MatC::Identity(ni, ni));
    A = b.Dm;
  }
  MatC q = b.chi_half.asDiagonal() * ((A * S + S * A) / Real(2)) * b.chi_half.asDiagonal();
  return q * cfg.strength;
}

}  // namespace

std::function<MatC(Cplx)> make_q_rule(const Grid& g, int mode, const ExtendedCoeffs& c, const AbsorptionConfig& cfg) {
  if (cfg.mode == AbsorptionMode::off) return {};
  std::vector<QBlock> blocks;
  QBlock left = make_block(g, 0, g.n_left, mode, c, cfg);
  if (block_active(left)) blocks.push_back(std::move(left));
  if (cfg.interior_window) {
    // Interior absorption acts on the right block only; the boundary window never reaches it.
    AbsorptionConfig inner = cfg;
    QBlock right = make_block(g, g.n_left, g.n_right, mode, c, inner);
    for (int k = 0; k < right.size; ++k) {
      const Real mu = g.nodes(g.n_left + k);
      const auto [a, b] = *cfg.interior_window;
      if (mu < a || mu > b) right.chi_half(k) = 0;
    }
    if (block_active(right)) blocks.push_back(std::move(right));
  }
  const int N = g.size();
  return [blocks, cfg, N](Cplx sigma) {
    MatC Q = MatC::Zero(N, N);
    for (const auto& b : blocks) Q.block(b.offset, b.offset, b.size, b.size) = block_q(b, sigma, cfg);
    return Q;
  };
}

MatC assemble_Q(const Grid& grid, int mode_index, Cplx sigma, const ExtendedCoeffs& c, const AbsorptionConfig& cfg) {
  if (cfg.mode == AbsorptionMode::off) return MatC::Zero(grid.size(), grid.size());
  if (cfg.mode == AbsorptionMode::paper_sigma_dependent && std::fabs(sigma.real()) < 1e-12L &&
      std::fabs(sigma.imag()) >= cfg.C)
    throw Error(ErrorKind::branch, "sigma on the absorption symbol cut +-i[C, inf)");
  return make_q_rule(grid, mode_index, c, cfg)(sigma);
}

void attach_absorption(ModeOperatorPencil& P, const ExtendedCoeffs& c, const AbsorptionConfig& cfg) {
  P.Q_rule = make_q_rule(P.grid, P.mode, c, cfg);
  P.q_is_polynomial = cfg.mode != AbsorptionMode::paper_sigma_dependent;
  P.absorption_mode = to_string(cfg.mode);
}

Real q_symbol_classical(const ExtendedCoeffs& c, const AbsorptionConfig& cfg, const PhasePoint& pt) {
  if (cfg.mode == AbsorptionMode::off) return 0;
  const Real mu = pt.mu;
  const Real zeta = std::sqrt(pt.xi * pt.xi + eta_norm_sq(c, mu, pt.eta));
  const Real chi = chi_profile(mu, cfg) * cfg.strength;
  if (cfg.mode == AbsorptionMode::paper_sigma_dependent) return 4 * (1 + c.a2(mu)) * pt.xi * zeta * chi;
  return pt.xi * zeta * chi;
}

Real q_symbol_semiclassical(const ExtendedCoeffs& c, const AbsorptionConfig& cfg, Real z, Real h, const PhasePoint& pt) {
  if (cfg.mode == AbsorptionMode::off) return 0;
  const Real mu = pt.mu;
  const Real chi = chi_profile(mu, cfg) * cfg.strength;
  const Real en = eta_norm_sq(c, mu, pt.eta);
  if (cfg.mode == AbsorptionMode::paper_sigma_dependent)
    return 2 * (2 * (1 + c.a2(mu)) * pt.xi + (1 + c.a3(mu)) * z) *
           std::sqrt(pt.xi * pt.xi + en + z * z + cfg.C * cfg.C * h * h) * chi;
  return pt.xi * std::sqrt(pt.xi * pt.xi + en + h * h) * chi;
}

SignReport verify_sign_conditions(const AbsorptionConfig& cfg, const ExtendedCoeffs& c, Real z, int n_samples,
                                  std::uint64_t seed) {
  SignReport rep;
  Rng rng(seed);
  const Real hi = cfg.mu0 / 2, lo = hi - 2 * cfg.chi_width;
  auto note = [&](const char* what, Real mu, Real xi, Real q) {
    if (rep.violations.size() < 20) {
      std::ostringstream os;
      os << what << " mu=" << static_cast<double>(mu) << " xi=" << static_cast<double>(xi)
         << " q=" << static_cast<double>(q);
      rep.violations.push_back(os.str());
    }
  };
  for (int k = 0; k < n_samples; ++k) {
    const Real mu = rng.uniform(lo, hi);
    if (chi_profile(mu, cfg) <= 0) continue;
    // Classical characteristic point: |eta|^2 = -4(1+a1) mu xi^2.
    const Real xi = (k % 2 == 0 ? 1 : -1) * std::exp(rng.uniform(-2, 4));
    const PhasePoint pt{mu, 0, xi, std::sqrt(-4 * (1 + c.a1(mu)) * mu * xi * xi * c.w(mu))};
    const CharComponent cc = char_component(c, pt);
    const Real q = q_symbol_classical(c, cfg, pt);
    ++rep.classical_samples;
    const bool ok = (cc == CharComponent::SigmaPlus && q >= 0) || (cc == CharComponent::SigmaMinus && q <= 0);
    if (ok) ++rep.classical_ok;
    else note("classical", mu, xi, q);
    if (cfg.mode != AbsorptionMode::paper_sigma_dependent) continue;
    // Semiclassical characteristic point for real z: solve for |eta|^2.
    const Real xs = rng.uniform(-3, 3);
    const Real eta_sq = c.w(mu) * (-4 * (1 + c.a1(mu)) * mu * xs * xs + 4 * (1 + c.a2(mu)) * z * xs +
                                   (1 + c.a3(mu)) * z * z);
    if (!(eta_sq >= 0)) continue;
    const PhasePoint sp{mu, 0, xs, std::sqrt(eta_sq)};
    const Real split = 2 * (1 + c.a2(mu)) * xs + (1 + c.a3(mu)) * z;
    if (std::fabs(split) < 1e-9L) continue;
    const Real qs = q_symbol_semiclassical(c, cfg, z, 0.01L, sp);
    ++rep.semi_samples;
    const bool sok = (split > 0 && qs >= 0) || (split < 0 && qs <= 0);
    if (sok) ++rep.semi_ok;
    else note("semiclassical", mu, xs, qs);
  }
  // Ellipticity of p - i q on the fiber-infinity ring over mu0.
  Real mn = 1e300L;
  for (int k = 0; k < 720; ++k) {
    const Real th = 2 * kPi * (k + 0.5L) / 720;
    const PhasePoint pt{cfg.mu0, 0, std::cos(th), std::sin(th) * std::sqrt(c.w(cfg.mu0))};
    const Real p = eval_p(c, pt), q = q_symbol_classical(c, cfg, pt);
    const Real nrm = pt.xi * pt.xi + eta_norm_sq(c, cfg.mu0, pt.eta);
    mn = std::min(mn, std::hypot(p, q) / nrm);
  }
  rep.min_elliptic_ratio = mn;
  rep.pass = rep.classical_ok == rep.classical_samples && rep.semi_ok == rep.semi_samples && mn > 0;
  return rep;
}

Real cauchy_holomorphy_defect(const std::function<MatC(Cplx)>& rule, Cplx s0, Real r, int n_nodes) {
  const MatC Q0 = rule(s0);
  MatC acc = MatC::Zero(Q0.rows(), Q0.cols());
  for (int k = 0; k < n_nodes; ++k) {
    const Cplx e = std::polar(Real(1), 2 * kPi * (k + Real(0.5L)) / n_nodes);
    acc += rule(s0 + r * e);
  }
  acc /= Real(n_nodes);
  const Real nrm = Q0.norm();
  return (acc - Q0).norm() / (nrm > 0 ? nrm : 1);
}

}  // namespace ahres
