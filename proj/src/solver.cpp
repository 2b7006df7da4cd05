#include "ahres/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "ahres/flow.hpp"

namespace ahres {

namespace {

// Runs fn(k) for k in [0, n) over a fixed partition; callers combine results by index.
template <class Fn>
void parallel_for(int n, int threads, Fn fn) {
  if (threads == 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int k = t; k < n; k += threads) fn(k);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

std::string fmt_sigma(Cplx s) {
  std::ostringstream os;
  os.precision(10);
  os << static_cast<double>(s.real()) << (s.imag() < 0 ? "" : "+") << static_cast<double>(s.imag()) << "i";
  return os.str();
}

bool in_rect(Cplx s, Real re0, Real re1, Real im0, Real im1) {
  return s.real() >= re0 && s.real() <= re1 && s.imag() > im0 && s.imag() < im1;
}

}  // namespace

SolveResult solve_resolvent(const ModeOperatorPencil& P, Cplx sigma, const VecC& f, Real near_pole_rcond) {
  SolveResult r;
  const MatC T = P.T(sigma);
  if (f.norm() == 0) {
    r.u = VecC::Zero(f.size());
    r.rcond = 1;
    return r;
  }
  Eigen::PartialPivLU<MatC> lu(T);
  r.rcond = lu.rcond();
  if (!(r.rcond > near_pole_rcond)) {
    std::ostringstream os;
    os << "near-pole solve at sigma = " << fmt_sigma(sigma) << " (rcond " << static_cast<double>(r.rcond) << ")";
    throw Error(ErrorKind::near_pole, os.str());
  }
  r.u = lu.solve(f);
  for (int it = 0; it < 2; ++it) r.u += lu.solve(VecC(f - T * r.u));
  r.residual = (f - T * r.u).norm() / f.norm();
  return r;
}

namespace {

// Smooth probes supported in mu > 0: mu^10 (mu_R - mu) times random cosine series.
MatCd smooth_probes(const Grid& g, int p, std::uint64_t seed) {
  Rng rng(seed);
  const int N = g.size();
  MatCd V = MatCd::Zero(N, p);
  const Real muR = g.mu_right;
  for (int j = 0; j < p; ++j) {
    Cplx coef[12];
    for (auto& c : coef) c = Cplx(rng.normal(), rng.normal());
    for (int i = g.n_left; i < N - 1; ++i) {
      const Real mu = g.nodes(i);
      if (!(mu > 0)) continue;
      Cplx s = 0;
      for (int k = 0; k < 12; ++k) s += coef[k] * std::cos(k * kPi * mu / muR);
      const Cplx val = std::pow(mu / muR, Real(10)) * (1 - mu / muR) * s;
      V(i, j) = std::complex<double>(static_cast<double>(val.real()), static_cast<double>(val.imag()));
    }
    V.col(j).normalize();
  }
  return V;
}

std::vector<int> readout_rows(const Grid& g) {
  std::vector<int> rows;
  for (int i = g.n_left; i < g.size(); ++i)
    if (g.nodes(i) > 0.05L) rows.push_back(i);
  return rows;
}

MatCd to_double(const MatC& A) { return A.unaryExpr([](const Cplx& z) { return std::complex<double>(double(z.real()), double(z.imag())); }); }

Cplx to_ld(std::complex<double> z) { return Cplx(z.real(), z.imag()); }

struct Moments {
  MatCd M0, M1;
  Real mean_norm = 0;
  std::vector<std::string> notes;
};

Moments contour_moments(const ModeOperatorPencil& P, const Contour& c, const MatCd& V, const std::vector<int>& rows,
                        int threads) {
  const int n = c.n_nodes;
  std::vector<MatCd> X(n);
  std::vector<Cplx> nodes(n);
  std::vector<double> norms(n);
  auto solve_node = [&](int j, Real th) {
    nodes[j] = c.center + c.radius * std::polar(Real(1), th);
    Eigen::PartialPivLU<MatCd> lu(to_double(P.T(nodes[j])));
    const MatCd full = lu.solve(V);
    MatCd out(rows.size(), V.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(r) = full.row(rows[r]);
    norms[j] = out.allFinite() ? out.norm() : std::numeric_limits<double>::infinity();
    X[j] = std::move(out);
  };
  auto theta = [&](int j) { return 2 * kPi * (j + Real(0.5L)) / n; };
  parallel_for(n, threads, [&](int j) { solve_node(j, theta(j)); });
  // A node sitting on a pole shows up as an outlier in the readout norm; the
  // pencil is too badly scaled deep in the window for an rcond test.
  auto median = [&] {
    std::vector<double> t = norms;
    std::nth_element(t.begin(), t.begin() + n / 2, t.end());
    return t[n / 2];
  };
  const double med = median();
  Moments m;
  for (int j = 0; j < n; ++j) {
    if (!(norms[j] > 1e4 * med)) continue;
    solve_node(j, theta(j) + Real(1) / (4 * n));  // tangential jitter by radius/(4 n)
    if (!(norms[j] <= 1e4 * med))
      throw Error(ErrorKind::near_pole, "contour node on a pole after jitter at sigma = " + fmt_sigma(nodes[j]));
    m.notes.push_back("jittered contour node " + std::to_string(j) + " to " + fmt_sigma(nodes[j]));
  }
  m.M0 = MatCd::Zero(rows.size(), V.cols());
  m.M1 = m.M0;
  for (int j = 0; j < n; ++j) {
    // ds / (2 pi i) with s = c + R e^{i theta}; the trapezoid weight is (s - c)/n.
    const std::complex<double> wj(static_cast<double>((nodes[j] - c.center).real()) / n,
                                  static_cast<double>((nodes[j] - c.center).imag()) / n);
    const std::complex<double> sj(static_cast<double>(nodes[j].real()), static_cast<double>(nodes[j].imag()));
    m.M0 += wj * X[j];
    m.M1 += (wj * sj) * X[j];
    m.mean_norm += norms[j] / n;
  }
  return m;
}

}  // namespace

namespace {

// Greedy single-linkage grouping; a defective eigenvalue splits into a
// cluster of size ~sqrt(eps) whose mean is accurate to ~eps.
std::vector<std::pair<Cplx, int>> cluster_points(const std::vector<Cplx>& pts, Real tol) {
  std::vector<int> label(pts.size(), -1);
  int nlab = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (label[i] >= 0) continue;
    label[i] = nlab;
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (label[j] >= 0) continue;
        for (std::size_t k = 0; k < pts.size(); ++k)
          if (label[k] == nlab && std::abs(pts[j] - pts[k]) <= tol) {
            label[j] = nlab;
            grew = true;
            break;
          }
      }
    }
    ++nlab;
  }
  std::vector<std::pair<Cplx, int>> out(nlab, {Cplx(0), 0});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out[label[i]].first += pts[i];
    ++out[label[i]].second;
  }
  for (auto& c : out) c.first /= Real(c.second);
  return out;
}

constexpr Real kClusterTol = 1e-3L;

// Residual of the inverse-iteration vector at sigma.
Real pair_residual(const ModeOperatorPencil& P, Cplx sigma) {
  const MatC T = P.T(sigma);
  Eigen::PartialPivLU<MatC> lu(T);
  Rng rng(11);
  VecC v(T.rows());
  for (int i = 0; i < v.size(); ++i) v(i) = Cplx(rng.normal(), rng.normal());
  for (int k = 0; k < 3; ++k) {
    v = lu.solve(v);
    v.normalize();
  }
  return (T * v).norm() / T.norm();
}

std::vector<Cplx> moment_eigenvalues(const ModeOperatorPencil& P, const Contour& contour, const ContourOptions& opts,
                                     std::vector<std::string>& notes, int contour_id) {
  const MatCd V = smooth_probes(P.grid, opts.probe_rank, opts.seed);
  const std::vector<int> rows = readout_rows(P.grid);
  Moments m = contour_moments(P, contour, V, rows, opts.threads);
  for (auto& n : m.notes) notes.push_back(n);
  Eigen::JacobiSVD<MatCd> svd(m.M0, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  int k = 0;
  while (k < sv.size() && sv(k) > static_cast<double>(opts.rank_tol * m.mean_norm)) ++k;
  std::vector<Cplx> out;
  if (k == 0) return out;
  if (k == sv.size()) notes.push_back("probe rank saturated on contour " + std::to_string(contour_id));
  const MatCd B = svd.matrixU().leftCols(k).adjoint() * m.M1 * svd.matrixV().leftCols(k) *
                  sv.head(k).cwiseInverse().asDiagonal();
  Eigen::ComplexEigenSolver<MatCd> es(B, false);
  for (int i = 0; i < k; ++i) {
    const Cplx s = to_ld(es.eigenvalues()(i));
    if (std::abs(s - contour.center) <= contour.radius * 1.05L) out.push_back(s);
  }
  return out;
}

}  // namespace

ResonanceResult find_resonances_contour(const ModeOperatorPencil& P, const Contour& contour, const ContourOptions& opts,
                                        int contour_id) {
  ResonanceResult res;
  res.window.push_back(contour);
  const std::vector<Cplx> cand = moment_eigenvalues(P, contour, opts, res.notes, contour_id);
  for (const auto& [s0, mult] : cluster_points(cand, kClusterTol)) {
    Cplx s = s0;
    ResonanceEntry e;
    e.mode = P.mode;
    e.sector = to_string(P.grid.bc);
    e.contour_id = contour_id;
    e.multiplicity = mult;
    if (mult > 1) {
      // Newton converges only linearly on a defective eigenvalue; keep the cluster mean.
      e.residual = pair_residual(P, s);
    } else if (opts.refine) {
      const RefineResult r = refine_eigenvalue(P, s);
      if (!r.converged || std::abs(r.sigma - s) > contour.radius / 2) {
        res.notes.push_back("refinement did not settle near " + fmt_sigma(s));
        continue;
      }
      s = r.sigma;
      e.residual = r.residual;
    }
    if (std::abs(s - contour.center) > contour.radius * 1.02L) continue;
    e.sigma = s;
    res.entries.push_back(e);
  }
  return res;
}

Real physical_pole_weight(const ModeOperatorPencil& P, Cplx sigma, Real radius, const ContourOptions& opts) {
  const MatCd V = smooth_probes(P.grid, opts.probe_rank, opts.seed);
  const Moments m = contour_moments(P, Contour{sigma, radius, 16}, V, readout_rows(P.grid), opts.threads);
  Eigen::JacobiSVD<MatCd> svd(m.M0);
  return static_cast<Real>(svd.singularValues()(0)) / m.mean_norm;
}

RefineResult refine_eigenvalue(const ModeOperatorPencil& P, Cplx sigma0, int max_iter) {
  RefineResult r;
  const int N = P.grid.size();
  Rng rng(7);
  VecC v(N), w(N);
  for (int i = 0; i < N; ++i) {
    v(i) = Cplx(rng.normal(), rng.normal());
    w(i) = Cplx(rng.normal(), rng.normal());
  }
  Cplx s = sigma0;
  Real last = 1e300L;
  for (int it = 0; it < max_iter; ++it) {
    const MatC T = P.T(s);
    Eigen::PartialPivLU<MatC> lu(T);
    for (int k = 0; k < 2; ++k) {
      v = lu.solve(v);
      v.normalize();
      w = lu.adjoint().solve(w);
      w.normalize();
    }
    const Cplx num = w.dot(T * v);
    const Cplx den = w.dot(P.dT(s) * v);
    const Cplx step = num / den;
    s -= step;
    r.iterations = it + 1;
    const Real a = std::abs(step);
    if (a < 1e-16L * (1 + std::abs(s))) {
      r.converged = true;
      break;
    }
    // Stagnation at the rounding floor counts as converged.
    if (it > 4 && a >= last && a < 1e-9L * (1 + std::abs(s))) {
      r.converged = true;
      break;
    }
    last = a;
  }
  const MatC T = P.T(s);
  Eigen::PartialPivLU<MatC> lu(T);
  v = lu.solve(v);
  v.normalize();
  r.sigma = s;
  r.v = v;
  r.residual = (T * v).norm() / T.norm();
  return r;
}

ResonanceResult find_resonances_linearized(const ModeOperatorPencil& P, Cplx shift, Real re0, Real re1, Real im0,
                                           Real im1) {
  if (!P.q_is_polynomial)
    throw Error(ErrorKind::validation, "linearized solver needs a sigma-independent absorption operator");
  const int N = P.grid.size();
  const MatC Q0 = P.Q(Cplx(0));
  const MatC T0 = P.A2 * (shift * shift) + P.A1 * shift + P.A0 - kI * Q0;
  const MatC T1 = P.A2 * (Real(2) * shift) + P.A1;
  Eigen::PartialPivLU<MatC> lu(T0);
  if (!(lu.rcond() > 1e-17L)) throw Error(ErrorKind::numerical, "linearization shift is an eigenvalue");
  MatC C = MatC::Zero(2 * N, 2 * N);
  C.topRightCorner(N, N).setIdentity();
  C.bottomLeftCorner(N, N) = -lu.solve(P.A2);
  C.bottomRightCorner(N, N) = -lu.solve(T1);
  Eigen::ComplexEigenSolver<MatC> es(C, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical, "companion eigensolve failed");
  ResonanceResult res;
  const Real tmax = es.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Cplx> pts;
  for (int i = 0; i < 2 * N; ++i) {
    const Cplx tau = es.eigenvalues()(i);
    if (std::abs(tau) <= 1e-12L * tmax) continue;  // infinite eigenvalues (boundary rows)
    const Cplx s = shift + Real(1) / tau;
    if (in_rect(s, re0, re1, im0, im1)) pts.push_back(s);
  }
  for (const auto& [s, mult] : cluster_points(pts, kClusterTol)) {
    ResonanceEntry e;
    e.sigma = s;
    e.mode = P.mode;
    e.sector = to_string(P.grid.bc);
    e.multiplicity = mult;
    e.residual = pair_residual(P, s);
    res.entries.push_back(e);
  }
  return res;
}

ResonanceResult filter_spurious(const ResonanceResult& res_N, const ResonanceResult& res_refined, Real filter_tol) {
  ResonanceResult out;
  out.window = res_N.window;
  out.notes = res_N.notes;
  out.flagged = res_N.flagged;
  for (const auto& e : res_N.entries) {
    Real best = 1e300L;
    for (const auto& r : res_refined.entries)
      if (r.mode == e.mode && r.sector == e.sector) best = std::min(best, std::abs(r.sigma - e.sigma));
    ResonanceEntry k = e;
    k.refine_err = best;
    if (best <= filter_tol) out.entries.push_back(k);
    else {
      out.flagged.push_back(k);
      out.notes.push_back("dropped refinement-unstable entry " + fmt_sigma(e.sigma));
    }
  }
  return out;
}

ResonanceResult filter_absorption(const ResonanceResult& res, const ResonanceResult& res_alt, Real filter_tol) {
  ResonanceResult out;
  out.window = res.window;
  out.notes = res.notes;
  out.flagged = res.flagged;
  for (const auto& e : res.entries) {
    Real best = 1e300L;
    for (const auto& r : res_alt.entries)
      if (r.mode == e.mode && r.sector == e.sector) best = std::min(best, std::abs(r.sigma - e.sigma));
    ResonanceEntry k = e;
    k.absorption_err = best;
    if (best <= filter_tol) out.entries.push_back(k);
    else {
      out.flagged.push_back(k);
      out.notes.push_back("absorption-window resonance " + fmt_sigma(e.sigma));
    }
  }
  return out;
}

std::vector<Contour> cover_window(Real re0, Real re1, Real im0, Real im1, int n_nodes) {
  // Overlapping circles whose inscribed squares tile the rectangle.
  const Real W = re1 - re0, H = im1 - im0;
  const Real target = 0.5L;
  const int nx = std::max(1, static_cast<int>(std::ceil(W / (target * std::sqrt(Real(2))))));
  const int ny = std::max(1, static_cast<int>(std::ceil(H / (target * std::sqrt(Real(2))))));
  const Real dx = W / nx, dy = H / ny;
  const Real R = 0.55L * std::hypot(dx, dy) + 0.02L;
  std::vector<Contour> out;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out.push_back({Cplx(re0 + (i + Real(0.5L)) * dx, im0 + (j + Real(0.5L)) * dy), R, n_nodes});
  return out;
}

Real singular_value_dip(const ModeOperatorPencil& P, Cplx sigma, Real radius, int n_nodes) {
  auto smin = [&](Cplx s) {
    Eigen::BDCSVD<MatCd> svd(to_double(P.T(s)));
    return static_cast<Real>(svd.singularValues().minCoeff());
  };
  Real mx = 0;
  for (int j = 0; j < n_nodes; ++j) mx = std::max(mx, smin(sigma + radius * std::polar(Real(1), 2 * kPi * j / n_nodes)));
  return smin(sigma) / mx;
}

std::vector<BoundaryKind> boundary_sectors(const EvenMetricModel& model) {
  if (model.has_center()) return {BoundaryKind::center_regularity};
  return {BoundaryKind::neck_even, BoundaryKind::neck_odd};
}

ModeOperatorPencil build_mode_pencil(const EvenMetricModel& model, const AbsorptionConfig& abs, int N, int n_left,
                                     int mode, BoundaryKind bc) {
  if (n_left <= 0) n_left = default_left_nodes(N);
  if (N - n_left < 8) throw Error(ErrorKind::validation, "grid N too small for the split");
  const ExtendedCoeffs c = derive_extended_coeffs(model);
  const Grid g = build_grid(model.mu_left, abs.mu0 / 2, model.mu_right, n_left, N - n_left, bc, mode);
  ModeOperatorPencil P = assemble_pencil(c, g, mode, model);
  attach_absorption(P, c, abs);
  return P;
}

namespace {

ResonanceResult newton_from(const ModeOperatorPencil& P, const std::vector<ResonanceEntry>& seeds,
                            const ContourOptions& opts) {
  ResonanceResult out;
  for (const auto& e : seeds) {
    ResonanceEntry k = e;
    k.sigma = Cplx(1e300L, 1e300L);
    if (e.multiplicity > 1) {
      std::vector<std::string> notes;
      const auto cl = cluster_points(moment_eigenvalues(P, Contour{e.sigma, 0.05L, 32}, opts, notes, -1), kClusterTol);
      for (const auto& [s, m] : cl)
        if (m == e.multiplicity && std::abs(s - e.sigma) < std::abs(k.sigma - e.sigma)) k.sigma = s;
    } else {
      const RefineResult r = refine_eigenvalue(P, e.sigma);
      if (r.converged) k.sigma = r.sigma;
    }
    out.entries.push_back(k);
  }
  return out;
}

}  // namespace

ResonanceResult compute_resonances(const ResonanceRun& run) {
  ResonanceResult all;
  const std::vector<Contour> cover = cover_window(run.re0, run.re1, run.im0, run.im1, run.n_nodes);
  if (run.method == "contour") all.window = cover;
  const int nl = run.n_left > 0 ? run.n_left : default_left_nodes(run.N);
  const int N2 = static_cast<int>(std::ceil(1.25L * run.N));
  const int nl2 = static_cast<int>(std::ceil(1.25L * nl));
  AbsorptionConfig alt = run.absorption;
  alt.strength *= 2;
  alt.chi_width *= 1.5L;
  const Real dedupe = std::max(run.filter_tol, Real(1e-8L));

  for (int mode : run.modes)
    for (BoundaryKind bc : run.sectors.empty() ? boundary_sectors(run.model) : run.sectors) {
      const ModeOperatorPencil P = build_mode_pencil(run.model, run.absorption, run.N, nl, mode, bc);
      ResonanceResult found;
      if (run.method == "contour") {
        for (std::size_t ci = 0; ci < cover.size(); ++ci) {
          ResonanceResult r = find_resonances_contour(P, cover[ci], run.contour, static_cast<int>(ci));
          for (auto& n : r.notes) found.notes.push_back(n);
          for (auto& e : r.entries) {
            if (!in_rect(e.sigma, run.re0, run.re1, run.im0, run.im1)) continue;
            bool dup = false;
            for (const auto& f : found.entries) dup = dup || std::abs(f.sigma - e.sigma) <= dedupe;
            if (!dup) found.entries.push_back(e);
          }
        }
      } else if (run.method == "linearized") {
        const Cplx shift((run.re0 + run.re1) / 2 + Real(0.0123L), (run.im0 + run.im1) / 2 + Real(0.0177L));
        ResonanceResult lin = find_resonances_linearized(P, shift, run.re0, run.re1, run.im0, run.im1);
        for (auto& e : lin.entries) {
          // Radius below half the distance to the nearest other eigenvalue.
          Real gap = 0.05L;
          for (const auto& o : lin.entries)
            if (&o != &e) gap = std::min(gap, std::abs(o.sigma - e.sigma) / 3);
          const Real wgt = physical_pole_weight(P, e.sigma, std::max(gap, Real(1e-6L)), run.contour);
          if (!(wgt > run.contour.rank_tol)) continue;
          if (e.multiplicity == 1) {
            const RefineResult r = refine_eigenvalue(P, e.sigma);
            e.sigma = r.sigma;
            e.residual = r.residual;
          }
          bool dup = false;
          for (const auto& f : found.entries) dup = dup || std::abs(f.sigma - e.sigma) <= dedupe;
          if (!dup && in_rect(e.sigma, run.re0, run.re1, run.im0, run.im1)) found.entries.push_back(e);
        }
      } else {
        throw Error(ErrorKind::validation, "unknown solver method '" + run.method + "'");
      }

      const ModeOperatorPencil P2 = build_mode_pencil(run.model, run.absorption, N2, nl2, mode, bc);
      ResonanceResult kept = filter_spurious(found, newton_from(P2, found.entries, run.contour), run.filter_tol);
      if (run.absorption_check && run.absorption.mode != AbsorptionMode::off) {
        const ModeOperatorPencil P3 = build_mode_pencil(run.model, alt, run.N, nl, mode, bc);
        kept = filter_absorption(kept, newton_from(P3, kept.entries, run.contour), run.filter_tol);
      }
      for (auto& e : kept.entries) {
        if (e.residual > run.residual_tol) {
          all.flagged.push_back(e);
          all.notes.push_back("residual above tolerance at " + fmt_sigma(e.sigma));
          continue;
        }
        all.entries.push_back(e);
      }
      for (auto& e : kept.flagged) all.flagged.push_back(e);
      for (auto& n : kept.notes) all.notes.push_back(n);
    }

  // Merge coincident entries of one mode (parity sectors) into clusters.
  std::vector<ResonanceEntry> merged;
  for (const auto& e : all.entries) {
    bool hit = false;
    for (auto& m : merged)
      if (m.mode == e.mode && std::abs(m.sigma - e.sigma) <= run.filter_tol * 10) {
        m.sigma = (m.sigma * Real(m.multiplicity) + e.sigma * Real(e.multiplicity)) /
                  Real(m.multiplicity + e.multiplicity);
        m.multiplicity += e.multiplicity;
        if (m.sector != e.sector) m.sector += "+" + e.sector;
        m.residual = std::max(m.residual, e.residual);
        m.refine_err = std::max(m.refine_err, e.refine_err);
        m.absorption_err = std::max(m.absorption_err, e.absorption_err);
        hit = true;
        break;
      }
    if (!hit) merged.push_back(e);
  }
  // Real parts are bucketed at filter_tol so rounding noise does not reorder the list.
  auto bucket = [&](Real x) { return std::llround(x / run.filter_tol); };
  std::sort(merged.begin(), merged.end(), [&](const ResonanceEntry& a, const ResonanceEntry& b) {
    if (a.mode != b.mode) return a.mode < b.mode;
    if (bucket(a.sigma.real()) != bucket(b.sigma.real())) return bucket(a.sigma.real()) < bucket(b.sigma.real());
    return a.sigma.imag() < b.sigma.imag();
  });
  all.entries = merged;
  return all;
}

VecC bump_rhs(const ModeOperatorPencil& P, Real lo, Real hi) {
  VecC f = VecC::Zero(P.grid.size());
  for (int i : P.equation_rows()) {
    const Real t = (2 * P.grid.nodes(i) - (lo + hi)) / (hi - lo);
    if (std::fabs(t) < 1) f(i) = std::exp(-1 / (1 - t * t));
  }
  return f;
}

namespace {

Real grid_norm(const Grid& g, const VecC& u, Real s, Real h) {
  if (s >= 0 && std::floor(s) == s) {
    Real tot = 0, hp = 1;
    VecC v = u;
    const MatC D = g.D1.cast<Cplx>();
    for (int j = 0; j <= static_cast<int>(s); ++j) {
      tot += hp * (v.cwiseAbs2().cwiseProduct(g.quad_weights)).sum();
      v = D * v;
      hp *= h * h;
    }
    return std::sqrt(tot);
  }
  return sobolev_norm(sobolev_norm_matrix(g, s, h), u);
}

}  // namespace

SweepResult sweep_norm_estimate(const EvenMetricModel& model, const SweepConfig& sw, const AbsorptionConfig& abs_in) {
  if (model.trapping_flag && !abs_in.interior_window)
    throw Error(ErrorKind::validation,
                "sweep on a trapping model needs interior absorption (absorption.interior_window)");
  if (!(sw.im_sigma > 1 - 2 * sw.s))
    throw Error(ErrorKind::validation, "sweep line violates the Fredholm threshold Im sigma > 1 - 2s");
  if (sw.n_points < 3) throw Error(ErrorKind::validation, "sweep needs at least 3 points");
  AbsorptionConfig abs = abs_in;
  abs.mode = AbsorptionMode::paper_sigma_dependent;  // high-energy sweeps need the sigma-dependent symbol
  const ModeOperatorPencil P =
      build_mode_pencil(model, abs, sw.N, sw.n_left, sw.mode, boundary_sectors(model).front());
  const VecC bump = bump_rhs(P, sw.f_lo, sw.f_hi);
  SweepResult out;
  out.rows.resize(sw.n_points);
  parallel_for(sw.n_points, sw.threads, [&](int k) {
    const Real re = sw.re0 + (sw.re1 - sw.re0) * k / (sw.n_points - 1);
    const Cplx sigma(re, sw.im_sigma);
    VecC f = bump;
    if (sw.f_phase != 0)
      for (int i = 0; i < f.size(); ++i)
        f(i) *= std::exp(kI * sigma * (sw.f_phase * std::log1p(P.grid.nodes(i))));
    const SolveResult sr = solve_resolvent(P, sigma, f);
    const Real h = 1 / std::abs(sigma);
    SweepRow& row = out.rows[k];
    row.sigma = sigma;
    row.s = sw.s;
    row.h = h;
    row.N = sw.N;
    const Real nu = grid_norm(P.grid, sr.u, sw.s, h);
    row.ratio = nu / grid_norm(P.grid, f, sw.s - 1, h);
    row.ratio_sm2 = nu / grid_norm(P.grid, f, sw.s - 2, h);
    if (!std::isfinite(static_cast<double>(row.ratio))) throw Error(ErrorKind::numerical, "non-finite sweep ratio");
  });
  std::vector<Real> xs, ys;
  for (const SweepRow& row : out.rows) {
    xs.push_back(std::log(std::abs(row.sigma)));
    ys.push_back(std::log(row.ratio));
    out.max_ratio_sigma = std::max(out.max_ratio_sigma, row.ratio * std::abs(row.sigma));
    out.max_ratio_sm2_sigma = std::max(out.max_ratio_sm2_sigma, row.ratio_sm2 * std::abs(row.sigma));
  }
  const int n = static_cast<int>(xs.size());
  Real mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  Real sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  out.slope = sxy / sxx;
  Real sse = 0;
  for (int i = 0; i < n; ++i) {
    const Real e = ys[i] - my - out.slope * (xs[i] - mx);
    sse += e * e;
  }
  const Real se = std::sqrt(sse / (n - 2) / sxx);
  const boost::math::students_t dist(n - 2);
  const Real t = static_cast<Real>(boost::math::quantile(dist, 0.975));
  out.slope_lo = out.slope - t * se;
  out.slope_hi = out.slope + t * se;
  return out;
}

Real branch_ratio(const std::function<Cplx(Real)>& u, Cplx sigma, Real mu_max, int n_smooth, int n_sing) {
  const int M = 80;
  MatC A(M, n_smooth + n_sing);
  VecC b(M);
  for (int i = 0; i < M; ++i) {
    const Real x = mu_max * (i + 1) / M;
    b(i) = u(x);
    for (int j = 0; j < n_smooth; ++j) A(i, j) = std::pow(x / mu_max, Real(j));
    const Cplx br = std::exp(kI * sigma * std::log(x / mu_max));
    for (int j = 0; j < n_sing; ++j) A(i, n_smooth + j) = br * std::pow(x / mu_max, Real(j));
  }
  // Unit columns, so coefficients compare contributions on the sample set.
  for (int j = 0; j < A.cols(); ++j) A.col(j).normalize();
  const VecC c = A.colPivHouseholderQr().solve(b);
  return c.tail(n_sing).norm() / c.head(n_smooth).norm();
}

Real indicial_branch_ratio(const ModeOperatorPencil& P, Cplx sigma, const VecC& f, Real mu_max, int n_smooth,
                           int n_sing) {
  const SolveResult sr = solve_resolvent(P, sigma, f);
  const Grid& g = P.grid;
  const VecR rn = g.nodes.tail(g.n_right);
  const VecC ru = sr.u.tail(g.n_right);
  return branch_ratio([&](Real x) { return barycentric_eval(rn, ru, x); }, sigma, mu_max, n_smooth, n_sing);
}

}  // namespace ahres
