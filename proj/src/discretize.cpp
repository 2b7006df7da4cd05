#include "ahres/discretize.hpp"

#include <cmath>

namespace ahres {

const char* to_string(BoundaryKind b) {
  switch (b) {
    case BoundaryKind::center_regularity: return "center_regularity";
    case BoundaryKind::neck_even: return "neck_even";
    case BoundaryKind::neck_odd: return "neck_odd";
  }
  return "?";
}

ChebBlock chebyshev_block(Real a, Real b, int N) {
  if (N < 8) throw Error(ErrorKind::validation, "collocation blocks need at least 8 nodes");
  const int n = N - 1;
  ChebBlock blk;
  blk.nodes.resize(N);
  VecR x(N), cw(N);
  // Ascending order: index k maps to x_k = -cos(pi k / n).
  for (int k = 0; k < N; ++k) {
    x(k) = -std::cos(kPi * k / n);
    blk.nodes(k) = a + (b - a) * (x(k) + 1) / 2;
    cw(k) = ((k == 0 || k == n) ? Real(0.5L) : Real(1)) * ((k % 2 == 0) ? 1 : -1);
  }
  blk.nodes(0) = a;
  blk.nodes(n) = b;
  MatR D = MatR::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      // x_i - x_j = 2 sin(pi (i+j)/(2n)) sin(pi (i-j)/(2n)) avoids cancellation.
      const Real dx = 2 * std::sin(kPi * (i + j) / (2 * n)) * std::sin(kPi * (i - j) / (2 * n));
      D(i, j) = (cw(j) / cw(i)) / dx;
    }
    D(i, i) = -D.row(i).sum();
  }
  blk.D1 = D * (2 / (b - a));
  // Clenshaw-Curtis weights on [-1, 1], then scaled.
  VecR w = VecR::Zero(N);
  const Real nn = static_cast<Real>(n);
  for (int k = 0; k < N; ++k) {
    const Real th = kPi * k / n;
    Real v = 1;
    if (n % 2 == 0) {
      if (k == 0 || k == n) {
        w(k) = 1 / (nn * nn - 1);
        continue;
      }
      for (int j = 1; j < n / 2; ++j) v -= 2 * std::cos(2 * j * th) / (4 * Real(j) * j - 1);
      v -= std::cos(n * th) / (nn * nn - 1);
    } else {
      if (k == 0 || k == n) {
        w(k) = 1 / (nn * nn);
        continue;
      }
      for (int j = 1; j <= (n - 1) / 2; ++j) v -= 2 * std::cos(2 * j * th) / (4 * Real(j) * j - 1);
    }
    w(k) = 2 * v / nn;
  }
  blk.weights = w * ((b - a) / 2);
  return blk;
}

Cplx barycentric_eval(const VecR& nodes, const VecC& values, Real x) {
  const int N = static_cast<int>(nodes.size());
  Cplx num = 0;
  Real den = 0;
  for (int k = 0; k < N; ++k) {
    const Real d = x - nodes(k);
    if (d == 0) return values(k);
    const Real wk = ((k == 0 || k == N - 1) ? Real(0.5L) : Real(1)) * ((k % 2 == 0) ? 1 : -1) / d;
    num += wk * values(k);
    den += wk;
  }
  return num / den;
}

int default_left_nodes(int N) { return std::max(16, N / 6); }

Grid build_grid(Real mu_left, Real mu_split, Real mu_right, int n_left, int n_right, BoundaryKind bc, int mode) {
  if (!(mu_left < mu_split && mu_split < 0 && mu_right > 0))
    throw Error(ErrorKind::validation, "grid needs mu_left < mu_split < 0 < mu_right");
  const ChebBlock L = chebyshev_block(mu_left, mu_split, n_left);
  const ChebBlock R = chebyshev_block(mu_split, mu_right, n_right);
  Grid g;
  g.n_left = n_left;
  g.n_right = n_right;
  g.mu_left = mu_left;
  g.mu_split = mu_split;
  g.mu_right = mu_right;
  g.bc = bc;
  g.mode = mode;
  const int N = n_left + n_right;
  g.nodes.resize(N);
  g.nodes << L.nodes, R.nodes;
  g.quad_weights.resize(N);
  g.quad_weights << L.weights, R.weights;
  g.D1 = MatR::Zero(N, N);
  g.D1.topLeftCorner(n_left, n_left) = L.D1;
  g.D1.bottomRightCorner(n_right, n_right) = R.D1;
  g.D2 = MatR::Zero(N, N);
  g.D2.topLeftCorner(n_left, n_left) = L.D1 * L.D1;
  g.D2.bottomRightCorner(n_right, n_right) = R.D1 * R.D1;
  return g;
}

BlockOperator assemble_block_operator(const ExtendedCoeffs& c, const VecR& nodes, const MatR& D1, int mode) {
  const int N = static_cast<int>(nodes.size());
  const MatC Dm = MatC(D1.cast<Cplx>()) * (-kI);  // D_mu
  const MatC Dm2 = Dm * Dm;
  BlockOperator op;
  op.A2 = MatC::Zero(N, N);
  op.A1 = MatC::Zero(N, N);
  op.A0 = MatC::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    const Real mu = nodes(i);
    op.A2(i, i) = -(1 + c.a3(mu));
    op.A1.row(i) = Dm.row(i) * Cplx(-4 * (1 + c.a2(mu)));
    op.A1(i, i) += c.b2(mu);
    op.A0.row(i) = Dm2.row(i) * Cplx(4 * (1 + c.a1(mu)) * mu) + Dm.row(i) * (Cplx(0, -4) + c.b1(mu) * mu);
    op.A0(i, i) += c.lambda_over_w(mode, mu) + c.c1(mu);
  }
  return op;
}

MatC ModeOperatorPencil::Q(Cplx s) const {
  if (!Q_rule) return MatC::Zero(A0.rows(), A0.cols());
  return Q_rule(s);
}

MatC ModeOperatorPencil::T(Cplx s) const {
  MatC t = A2 * (s * s) + A1 * s + A0;
  if (Q_rule) t -= kI * Q_rule(s);
  return t;
}

MatC ModeOperatorPencil::dT(Cplx s) const {
  MatC d = A2 * (Real(2) * s) + A1;
  if (Q_rule && !q_is_polynomial) {
    // Q is holomorphic in s: 8-point Cauchy formula for the derivative.
    const Real r = 1e-2L;
    MatC acc = MatC::Zero(A0.rows(), A0.cols());
    for (int k = 0; k < 8; ++k) {
      const Cplx e = std::polar(Real(1), 2 * kPi * k / 8);
      acc += Q_rule(s + r * e) / e;
    }
    d -= kI * acc / (Real(8) * r);
  }
  return d;
}

std::vector<int> ModeOperatorPencil::equation_rows() const {
  std::vector<int> rows;
  const int nl = grid.n_left, N = grid.size();
  for (int i = 1; i < nl - 1; ++i) rows.push_back(i);
  for (int i = nl; i < N - 1; ++i) rows.push_back(i);
  return rows;
}

ModeOperatorPencil assemble_pencil(const ExtendedCoeffs& c, const Grid& grid, int mode_index,
                                   const EvenMetricModel& model) {
  const int nl = grid.n_left, nr = grid.n_right, N = grid.size();
  ModeOperatorPencil P;
  P.grid = grid;
  P.mode = mode_index;
  P.n = model.n;
  P.A2 = MatC::Zero(N, N);
  P.A1 = MatC::Zero(N, N);
  P.A0 = MatC::Zero(N, N);
  const BlockOperator L = assemble_block_operator(c, grid.nodes.head(nl), grid.D1.topLeftCorner(nl, nl), mode_index);
  // The last right node (center or neck) is replaced below; skip its coefficients,
  // which are singular at a polar center.
  VecR rnodes = grid.nodes.tail(nr);
  rnodes(nr - 1) = rnodes(nr - 2);
  const BlockOperator R = assemble_block_operator(c, rnodes, grid.D1.bottomRightCorner(nr, nr), mode_index);
  P.A2.topLeftCorner(nl, nl) = L.A2;
  P.A1.topLeftCorner(nl, nl) = L.A1;
  P.A0.topLeftCorner(nl, nl) = L.A0;
  P.A2.bottomRightCorner(nr, nr) = R.A2;
  P.A1.bottomRightCorner(nr, nr) = R.A1;
  P.A0.bottomRightCorner(nr, nr) = R.A0;

  auto clear_row = [&](int r) {
    P.A2.row(r).setZero();
    P.A1.row(r).setZero();
    P.A0.row(r).setZero();
  };
  // Matching: derivative at the left end row, value at the interface row.
  clear_row(0);
  clear_row(nl - 1);
  P.A0(nl - 1, nl - 1) = 1;
  P.A0(nl - 1, nl) = -1;
  P.A0.block(0, 0, 1, nl) = grid.D1.block(nl - 1, 0, 1, nl).cast<Cplx>();
  P.A0.block(0, nl, 1, nr) = -grid.D1.block(nl, nl, 1, nr).cast<Cplx>();

  const int last = N - 1;
  clear_row(last);
  const Real muR = grid.mu_right;
  const int n = model.n;
  const MatC Drow = grid.D1.block(last, nl, 1, nr).cast<Cplx>();
  switch (grid.bc) {
    case BoundaryKind::center_regularity:
      if (mode_eigenvalue(model, mode_index) != 0) {
        // Regular solutions vanish like (mu_right - mu)^{|m|}.
        P.A0(last, last) = 1;
      } else {
        // Limit of (mu_right - mu) P_sigma at the center, with
        // rg = lim (mu_right - mu) gamma = -2(n-1) for a quadratic zero of w.
        const Real rg = -2 * Real(n - 1);
        P.A0.block(last, nl, 1, nr) = Drow * Cplx(-2 * rg * muR);
        P.A1(last, last) = Cplx(0, rg * (1 - muR / (2 * (1 + muR))));
        P.A0(last, last) += Cplx(-rg * (n - 1) / 2, 0);
      }
      break;
    case BoundaryKind::neck_odd:
      P.A0(last, last) = 1;
      break;
    case BoundaryKind::neck_even:
      // d_r u = 0 for the unconjugated mode function, rewritten for the conjugated one.
      P.A0.block(last, nl, 1, nr) = Drow;
      P.A0(last, last) += Cplx((Real(n + 1) / 4 - Real(0.5L)) / muR, 0);
      P.A1(last, last) = Cplx(0, -Real(0.5L) / muR + Real(0.25L) / (1 + muR));
      break;
  }
  return P;
}

MatC sobolev_norm_matrix(const Grid& grid, Real s, Real h) {
  if (!std::isfinite(static_cast<double>(h))) throw Error(ErrorKind::domain, "non-finite h in Sobolev norm");
  const int N = grid.size();
  const MatC W = grid.quad_weights.cast<Cplx>().asDiagonal();
  const MatC D = grid.D1.cast<Cplx>();
  const Real as = std::fabs(s);
  MatC M;
  if (std::floor(as) == as) {
    M = W;
    MatC Dj = MatC::Identity(N, N);
    Real hp = 1;
    for (int j = 1; j <= static_cast<int>(as); ++j) {
      Dj = D * Dj;
      hp *= h * h;
      M += hp * (Dj.adjoint() * W * Dj);
    }
  } else {
    const VecR sw = grid.quad_weights.cwiseSqrt();
    const MatC Ws = sw.cast<Cplx>().asDiagonal();
    const MatC Wsi = sw.cwiseInverse().cast<Cplx>().asDiagonal();
    const MatC G = Wsi * (D.adjoint() * W * D) * Wsi;
    Eigen::SelfAdjointEigenSolver<MatC> es(G);
    VecR mult(N);
    for (int k = 0; k < N; ++k) mult(k) = std::pow(1 + h * h * std::max(Real(0), es.eigenvalues()(k)), as);
    M = Ws * es.eigenvectors() * mult.cast<Cplx>().asDiagonal() * es.eigenvectors().adjoint() * Ws;
  }
  if (s < 0) M = W * M.inverse() * W;
  return (M + M.adjoint()) / Real(2);
}

Real sobolev_norm(const MatC& gram, const VecC& u) { return std::sqrt(std::max(Real(0), (u.adjoint() * gram * u)(0, 0).real())); }

namespace {

Real bump(Real x, Real c, Real r) {
  const Real t = (x - c) / r;
  if (std::fabs(t) >= 1) return 0;
  return std::exp(-1 / (1 - t * t));
}

}  // namespace

Real weighted_asymmetry(const ExtendedCoeffs& c, int mode, Real sigma, int N, Real a, Real b) {
  const ChebBlock blk = chebyshev_block(a, b, N);
  const BlockOperator op = assemble_block_operator(c, blk.nodes, blk.D1, mode);
  const MatC P = op.A2 * Cplx(sigma * sigma) + op.A1 * Cplx(sigma) + op.A0;
  VecC rho(N);
  for (int k = 0; k < N; ++k) rho(k) = blk.weights(k) * std::pow(c.w(blk.nodes(k)), Real(c.n - 1) / 2);
  const Real L = b - a;
  const Real centers[3] = {a + 0.35L * L, a + 0.5L * L, a + 0.6L * L};
  std::vector<VecC> fs;
  for (Real cc : centers) {
    VecC f(N);
    for (int k = 0; k < N; ++k) f(k) = bump(blk.nodes(k), cc, 0.25L * L) * std::exp(kI * Real(3) * blk.nodes(k));
    fs.push_back(f);
  }
  Real worst = 0;
  for (const auto& u : fs)
    for (const auto& v : fs) {
      const VecC Pu = P * u, Pv = P * v;
      const Cplx l = (v.conjugate().cwiseProduct(rho).cwiseProduct(Pu)).sum();
      const Cplx r = (Pv.conjugate().cwiseProduct(rho).cwiseProduct(u)).sum();
      const Real nPu = std::sqrt((Pu.cwiseAbs2().cwiseProduct(rho.real())).sum());
      const Real nv = std::sqrt((v.cwiseAbs2().cwiseProduct(rho.real())).sum());
      worst = std::max(worst, std::abs(l - r) / (nPu * nv));
    }
  return worst;
}

Real subprincipal_rayleigh(const ExtendedCoeffs& c, int mode, Cplx sigma, Real xi, Real h) {
  const Real delta = std::sqrt(h);
  const Real half = 1.2L * delta;
  const int N = std::max(96, static_cast<int>(8 * half * std::fabs(xi) / h) + 64);
  const ChebBlock blk = chebyshev_block(-half, half, N);
  const BlockOperator op = assemble_block_operator(c, blk.nodes, blk.D1, mode);
  const MatC P = op.A2 * (sigma * sigma) + op.A1 * sigma + op.A0;
  VecC u(N), rho(N);
  for (int k = 0; k < N; ++k) {
    const Real mu = blk.nodes(k);
    u(k) = bump(mu, 0, delta) * std::exp(kI * (xi * mu / h));
    rho(k) = blk.weights(k) * std::pow(c.w(mu), Real(c.n - 1) / 2);
  }
  const VecC Pu = P * u;
  const Cplx num = (u.conjugate().cwiseProduct(rho).cwiseProduct(Pu)).sum();
  const Real den = (u.cwiseAbs2().cwiseProduct(rho.real())).sum();
  return h * num.imag() / den;
}

}  // namespace ahres
