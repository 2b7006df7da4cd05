#include "ahres/geometry.hpp"

#include <cmath>
#include <sstream>

namespace ahres {

namespace {

Real poly_eval(const std::vector<Real>& c, Real x, int deriv) {
  Real acc = 0;
  for (int k = static_cast<int>(c.size()) - 1; k >= deriv; --k) {
    Real f = 1;
    for (int j = 0; j < deriv; ++j) f *= static_cast<Real>(k - j);
    acc = acc * x + c[k] * f;
  }
  return acc;
}

void check_interval(const EvenMetricModel& m, Real mu) {
  const Real slack = 1e-12L * (1 + std::fabs(m.mu_right - m.mu_left));
  if (!(mu >= m.mu_left - slack && mu <= m.mu_right + slack)) {
    std::ostringstream os;
    os << "mu = " << static_cast<double>(mu) << " outside [" << static_cast<double>(m.mu_left)
       << ", " << static_cast<double>(m.mu_right) << "]";
    throw Error(ErrorKind::domain, os.str());
  }
}

}  // namespace

Real EvenMetricModel::warp(Real mu) const {
  switch (type) {
    case ModelType::hyperbolic_plane:
    case ModelType::hyperbolic_space_3: {
      const Real t = 1 - mu / 4;
      return t * t;
    }
    case ModelType::cylinder:
    case ModelType::funnel: {
      const Real t = 1 + mu / 4;
      return ell_tilde * ell_tilde * t * t;
    }
    case ModelType::custom: return poly_eval(custom_warp, mu, 0);
  }
  return 0;
}

Real EvenMetricModel::warp_d1(Real mu) const {
  switch (type) {
    case ModelType::hyperbolic_plane:
    case ModelType::hyperbolic_space_3: return -(1 - mu / 4) / 2;
    case ModelType::cylinder:
    case ModelType::funnel: return ell_tilde * ell_tilde * (1 + mu / 4) / 2;
    case ModelType::custom: return poly_eval(custom_warp, mu, 1);
  }
  return 0;
}

Real EvenMetricModel::warp_d2(Real mu) const {
  switch (type) {
    case ModelType::hyperbolic_plane:
    case ModelType::hyperbolic_space_3: return 0.125L;
    case ModelType::cylinder:
    case ModelType::funnel: return ell_tilde * ell_tilde * 0.125L;
    case ModelType::custom: return poly_eval(custom_warp, mu, 2);
  }
  return 0;
}

bool EvenMetricModel::has_center() const {
  return std::fabs(warp(mu_right)) < 1e-12L * (1 + std::fabs(warp(0)));
}

std::string EvenMetricModel::name() const {
  switch (type) {
    case ModelType::hyperbolic_plane: return "hyperbolic-plane";
    case ModelType::hyperbolic_space_3: return "hyperbolic-space-3";
    case ModelType::cylinder: return "cylinder";
    case ModelType::funnel: return "funnel";
    case ModelType::custom: return "custom";
  }
  return "unknown";
}

EvenMetricModel hyperbolic_plane(Real mu_left, Real mu_right) {
  EvenMetricModel m;
  m.type = ModelType::hyperbolic_plane;
  m.n = 2;
  m.mu_left = mu_left;
  m.mu_right = mu_right;
  validate_model(m);
  return m;
}

EvenMetricModel hyperbolic_space_3(Real mu_left, Real mu_right) {
  EvenMetricModel m;
  m.type = ModelType::hyperbolic_space_3;
  m.n = 3;
  m.cross_section = CrossSection::round_sphere;
  m.mu_left = mu_left;
  m.mu_right = mu_right;
  validate_model(m);
  return m;
}

EvenMetricModel cylinder(Real ell, Real mu_left, Real mu_right) {
  EvenMetricModel m;
  m.type = ModelType::cylinder;
  m.n = 2;
  m.ell_tilde = ell / (2 * kPi);
  m.mu_left = mu_left;
  m.mu_right = mu_right;
  m.trapping_flag = true;
  validate_model(m);
  return m;
}

EvenMetricModel funnel(Real ell, Real mu_left, Real mu_right) {
  EvenMetricModel m = cylinder(ell, mu_left, mu_right);
  m.type = ModelType::funnel;
  return m;
}

EvenMetricModel custom_model(int n, std::vector<Real> warp_poly, Real mu_left, Real mu_right) {
  EvenMetricModel m;
  m.type = ModelType::custom;
  m.n = n;
  m.cross_section = n == 2 ? CrossSection::circle : CrossSection::round_sphere;
  m.custom_warp = std::move(warp_poly);
  m.mu_left = mu_left;
  m.mu_right = mu_right;
  validate_model(m);
  return m;
}

void validate_model(const EvenMetricModel& m) {
  if (m.n < 2) throw Error(ErrorKind::validation, "model dimension n must be >= 2");
  if (!(m.mu_left < 0) || !(m.mu_right > 0))
    throw Error(ErrorKind::validation, "model interval must satisfy mu_left < 0 < mu_right");
  if (m.type == ModelType::custom && m.custom_warp.empty())
    throw Error(ErrorKind::validation, "custom model needs custom_warp coefficients");
  if ((m.type == ModelType::cylinder || m.type == ModelType::funnel) && !(m.ell_tilde > 0))
    throw Error(ErrorKind::validation, "cylinder length ell must be positive");
  // The polar center of disk models is allowed to be the single zero of w.
  const int samples = 400;
  for (int k = 0; k < samples; ++k) {
    const Real mu = m.mu_left + (m.mu_right - m.mu_left) * k / samples;
    const Real w = m.warp(mu);
    if (!std::isfinite(static_cast<double>(w)) || !(w > 0)) {
      std::ostringstream os;
      os << "warp not positive at mu = " << static_cast<double>(mu);
      throw Error(ErrorKind::domain, os.str());
    }
  }
}

Real gamma_from_metric(const EvenMetricModel& model, Real mu) {
  check_interval(model, mu);
  return (model.n - 1) * model.warp_d1(mu) / model.warp(mu);
}

Real mode_eigenvalue(const EvenMetricModel& model, int mode_index) {
  const Real l = static_cast<Real>(mode_index);
  if (model.cross_section == CrossSection::circle) return l * l;
  if (mode_index < 0) throw Error(ErrorKind::domain, "sphere mode index must be >= 0");
  return l * (l + model.n - 2);
}

Real mode_laplacian_coeff(const EvenMetricModel& model, int mode_index, Real mu) {
  check_interval(model, mu);
  return mode_eigenvalue(model, mode_index) / model.warp(mu);
}

EvennessReport validate_evenness(const std::function<Real(Real)>& user_h, Real tolerance) {
  // Four symmetric sample pairs resolve the odd part through degree 7 and the
  // even part through degree 6 exactly.
  const Real delta = 0.05L;
  Eigen::Matrix<Real, 4, 4> vo, ve;
  Eigen::Matrix<Real, 4, 1> ro, re;
  const Real h0 = user_h(0);
  if (!std::isfinite(static_cast<double>(h0))) throw Error(ErrorKind::numerical, "non-finite sample at x = 0");
  for (int k = 0; k < 4; ++k) {
    const Real x = delta * (k + 1);
    const Real hp = user_h(x), hm = user_h(-x);
    if (!std::isfinite(static_cast<double>(hp)) || !std::isfinite(static_cast<double>(hm)))
      throw Error(ErrorKind::numerical, "non-finite sample in evenness check");
    ro(k) = (hp - hm) / 2;
    re(k) = (hp + hm) / 2 - h0;
    for (int j = 0; j < 4; ++j) {
      vo(k, j) = std::pow(x, static_cast<Real>(2 * j + 1));
      ve(k, j) = std::pow(x, static_cast<Real>(2 * j + 2));
    }
  }
  const Eigen::Matrix<Real, 4, 1> co = vo.fullPivLu().solve(ro);
  const Eigen::Matrix<Real, 4, 1> ce = ve.fullPivLu().solve(re);
  EvennessReport rep;
  rep.even_coeffs = {h0, ce(0), ce(1), ce(2)};
  rep.odd_coeffs = {co(0), co(1), co(2), co(3)};
  Real scale = std::max(std::fabs(h0), std::fabs(ce(0)));
  if (scale == 0) scale = 1;
  for (int j = 0; j < 2; ++j)
    if (std::fabs(co(j)) > tolerance * scale) rep.offending.push_back(2 * j + 1);
  rep.pass = rep.offending.empty();
  return rep;
}

}  // namespace ahres
