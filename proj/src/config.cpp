#include "ahres/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace ahres {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& ptr, const std::string& msg) {
  throw Error(ErrorKind::validation, (ptr.empty() ? std::string("/") : ptr) + ": " + msg);
}

// Rejects keys of `node` outside `allowed`.
void check_keys(const json& node, const std::string& ptr, const std::set<std::string>& allowed) {
  if (!node.is_object()) fail(ptr, "expected an object");
  for (const auto& [k, v] : node.items())
    if (!allowed.count(k)) fail(ptr + "/" + k, "unknown key '" + k + "'");
}

json& section(json& root, const std::string& key, const std::string& ptr, const std::set<std::string>& allowed) {
  if (!root.contains(key)) root[key] = json::object();
  check_keys(root[key], ptr + "/" + key, allowed);
  return root[key];
}

Real get_real(json& node, const std::string& key, const std::string& ptr, Real def) {
  if (!node.contains(key) || node[key].is_null()) node[key] = static_cast<double>(def);
  if (!node[key].is_number()) fail(ptr + "/" + key, "expected a number");
  const double v = node[key].get<double>();
  if (!std::isfinite(v)) fail(ptr + "/" + key, "expected a finite number");
  return v;
}

long long get_int(json& node, const std::string& key, const std::string& ptr, long long def) {
  if (!node.contains(key) || node[key].is_null()) node[key] = def;
  if (!node[key].is_number_integer()) fail(ptr + "/" + key, "expected an integer");
  return node[key].get<long long>();
}

bool get_bool(json& node, const std::string& key, const std::string& ptr, bool def) {
  if (!node.contains(key)) node[key] = def;
  if (!node[key].is_boolean()) fail(ptr + "/" + key, "expected a boolean");
  return node[key].get<bool>();
}

std::string get_string(json& node, const std::string& key, const std::string& ptr, const std::string& def) {
  if (!node.contains(key)) node[key] = def;
  if (!node[key].is_string()) fail(ptr + "/" + key, "expected a string");
  return node[key].get<std::string>();
}

std::pair<Real, Real> get_interval(json& node, const std::string& key, const std::string& ptr, Real a, Real b) {
  if (!node.contains(key)) node[key] = json::array({static_cast<double>(a), static_cast<double>(b)});
  const json& v = node[key];
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    fail(ptr + "/" + key, "expected [lo, hi]");
  const Real lo = v[0].get<double>(), hi = v[1].get<double>();
  if (!(lo < hi)) fail(ptr + "/" + key, "expected lo < hi");
  return {lo, hi};
}

std::string threshold_message(Real im, Real s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "Im sigma = %g violates Im σ > 1 − 2s (s = %g, threshold %g)", double(im), double(s),
                double(1 - 2 * s));
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::validation, std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "", {"model", "extension", "absorption", "grid", "modes", "solver", "sweep", "seed"});
  RunConfig cfg;

  json& m = section(root, "model", "", {"type", "ell", "mu_left", "mu_right", "custom_warp", "n"});
  const std::string type = get_string(m, "type", "/model", "hyperbolic-plane");
  const Real mu_left = get_real(m, "mu_left", "/model", -0.5L);
  const Real mu_right = get_real(m, "mu_right", "/model", 4);
  if (!(mu_left < 0 && mu_right > 0)) fail("/model", "need mu_left < 0 < mu_right");
  if (type == "hyperbolic-plane") {
    cfg.model = hyperbolic_plane(mu_left, mu_right);
  } else if (type == "hyperbolic-space-3") {
    cfg.model = hyperbolic_space_3(mu_left, mu_right);
  } else if (type == "cylinder" || type == "funnel") {
    const Real ell = get_real(m, "ell", "/model", 2 * kPi);
    if (!(ell > 0)) fail("/model/ell", "expected ell > 0");
    cfg.model = type == "cylinder" ? cylinder(ell, mu_left, mu_right) : funnel(ell, mu_left, mu_right);
  } else if (type == "custom") {
    const long long n = get_int(m, "n", "/model", 2);
    if (n < 2 || n > 3) fail("/model/n", "expected 2 or 3");
    if (!m.contains("custom_warp") || !m["custom_warp"].is_array() || m["custom_warp"].empty())
      fail("/model/custom_warp", "expected a non-empty array of coefficients");
    std::vector<Real> poly;
    for (std::size_t i = 0; i < m["custom_warp"].size(); ++i) {
      const json& c = m["custom_warp"][i];
      if (!c.is_number()) fail("/model/custom_warp/" + std::to_string(i), "expected a number");
      poly.push_back(c.get<double>());
    }
    cfg.model = custom_model(static_cast<int>(n), poly, mu_left, mu_right);
  } else {
    fail("/model/type", "unknown model type '" + type + "'");
  }
  try {
    validate_model(cfg.model);
  } catch (const Error& e) {
    fail("/model", e.what());
  }

  json& ext = section(root, "extension", "", {"mu_match", "plateau"});
  cfg.mu_match = get_real(ext, "mu_match", "/extension", 0.5L);
  std::tie(cfg.plateau_a, cfg.plateau_b) = get_interval(ext, "plateau", "/extension", 1.5L, 3.5L);
  if (!(0 < cfg.mu_match && cfg.mu_match < cfg.plateau_a && cfg.plateau_b <= mu_right))
    fail("/extension", "need 0 < mu_match < plateau[0] < plateau[1] <= mu_right");

  json& a = section(root, "absorption", "", {"mode", "mu0", "strength", "chi_width", "interior_window", "C"});
  try {
    cfg.absorption.mode = absorption_mode_from_string(get_string(a, "mode", "/absorption", "paper_sigma_dependent"));
  } catch (const Error& e) {
    fail("/absorption/mode", e.what());
  }
  cfg.absorption.mu0 = get_real(a, "mu0", "/absorption", -0.3L);
  cfg.absorption.strength = get_real(a, "strength", "/absorption", 1);
  cfg.absorption.chi_width = get_real(a, "chi_width", "/absorption", 0.25L);
  cfg.absorption.C = get_real(a, "C", "/absorption", 5);
  if (!(cfg.absorption.mu0 < 0 && cfg.absorption.mu0 / 2 > mu_left)) fail("/absorption/mu0", "need mu_left < mu0/2 < 0");
  if (!(cfg.absorption.strength > 0)) fail("/absorption/strength", "expected > 0");
  if (!(cfg.absorption.chi_width > 0)) fail("/absorption/chi_width", "expected > 0");
  if (!(cfg.absorption.C > 0)) fail("/absorption/C", "expected > 0");
  if (!a.contains("interior_window")) a["interior_window"] = nullptr;
  if (!a["interior_window"].is_null()) {
    const auto w = get_interval(a, "interior_window", "/absorption", 0, 0);
    if (!(w.first > 0 && w.second < mu_right)) fail("/absorption/interior_window", "must lie in (0, mu_right)");
    cfg.absorption.interior_window = w;
  }

  json& g = section(root, "grid", "", {"N", "N_left", "bc"});
  const long long N = get_int(g, "N", "/grid", 128);
  if (N < 32 || N > 1200) fail("/grid/N", "expected 32 <= N <= 1200");
  const long long nl = get_int(g, "N_left", "/grid", default_left_nodes(static_cast<int>(N)));
  if (nl < 8 || N - nl < 24) fail("/grid/N_left", "expected N_left >= 8 and N - N_left >= 24");
  cfg.run.N = static_cast<int>(N);
  cfg.run.n_left = static_cast<int>(nl);
  const std::string bc = get_string(g, "bc", "/grid", "auto");
  if (bc == "center_regularity") cfg.run.sectors = {BoundaryKind::center_regularity};
  else if (bc == "neck_even") cfg.run.sectors = {BoundaryKind::neck_even};
  else if (bc == "neck_odd") cfg.run.sectors = {BoundaryKind::neck_odd};
  else if (bc != "auto") fail("/grid/bc", "expected auto, center_regularity, neck_even or neck_odd");
  if (!cfg.run.sectors.empty() && (cfg.run.sectors[0] == BoundaryKind::center_regularity) != cfg.model.has_center())
    fail("/grid/bc", "boundary kind does not match the model");

  if (!root.contains("modes")) root["modes"] = json::array({0});
  if (!root["modes"].is_array() || root["modes"].empty()) fail("/modes", "expected a non-empty array of integers");
  cfg.run.modes.clear();
  for (std::size_t i = 0; i < root["modes"].size(); ++i) {
    const json& v = root["modes"][i];
    if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 64)
      fail("/modes/" + std::to_string(i), "expected an integer in [0, 64]");
    cfg.run.modes.push_back(v.get<int>());
  }

  json& so = section(root, "solver", "", {"method", "window", "n_nodes", "probe_rank", "rank_tol", "s", "filter_tol",
                                          "residual_tol", "absorption_check"});
  cfg.run.method = get_string(so, "method", "/solver", "contour");
  if (cfg.run.method != "contour" && cfg.run.method != "linearized")
    fail("/solver/method", "expected contour or linearized");
  if (cfg.run.method == "linearized" && cfg.absorption.mode == AbsorptionMode::paper_sigma_dependent)
    fail("/solver/method", "linearized needs absorption mode sigma_independent or off");
  if (!so.contains("window")) so["window"] = json::object();
  check_keys(so["window"], "/solver/window", {"re", "im"});
  std::tie(cfg.run.re0, cfg.run.re1) = get_interval(so["window"], "re", "/solver/window", -0.5L, 0.5L);
  std::tie(cfg.run.im0, cfg.run.im1) = get_interval(so["window"], "im", "/solver/window", -4, -0.2L);
  cfg.run.n_nodes = static_cast<int>(get_int(so, "n_nodes", "/solver", 32));
  if (cfg.run.n_nodes < 8) fail("/solver/n_nodes", "expected >= 8");
  cfg.run.contour.probe_rank = static_cast<int>(get_int(so, "probe_rank", "/solver", 8));
  if (cfg.run.contour.probe_rank < 1) fail("/solver/probe_rank", "expected >= 1");
  cfg.run.contour.rank_tol = get_real(so, "rank_tol", "/solver", 1e-6L);
  cfg.s = get_real(so, "s", "/solver", 3);
  cfg.run.filter_tol = get_real(so, "filter_tol", "/solver", 1e-6L);
  cfg.run.residual_tol = get_real(so, "residual_tol", "/solver", 1e-10L);
  cfg.run.absorption_check = get_bool(so, "absorption_check", "/solver", true);
  if (!(cfg.run.im0 > 1 - 2 * cfg.s)) fail("/solver/window/im", threshold_message(cfg.run.im0, cfg.s));
  if (cfg.absorption.mode == AbsorptionMode::paper_sigma_dependent &&
      !(std::max(std::fabs(cfg.run.im0), std::fabs(cfg.run.im1)) < cfg.absorption.C))
    fail("/solver/window/im", "window reaches the absorption cut |Im sigma| >= C");

  json& sw = section(root, "sweep", "", {"im_sigma", "re", "n_points", "s", "f_support", "f_phase", "N", "N_left", "mode"});
  cfg.sweep.im_sigma = get_real(sw, "im_sigma", "/sweep", -1);
  std::tie(cfg.sweep.re0, cfg.sweep.re1) = get_interval(sw, "re", "/sweep", 20, 160);
  cfg.sweep.n_points = static_cast<int>(get_int(sw, "n_points", "/sweep", 18));
  if (cfg.sweep.n_points < 3) fail("/sweep/n_points", "expected >= 3");
  cfg.sweep.s = get_real(sw, "s", "/sweep", 2);
  std::tie(cfg.sweep.f_lo, cfg.sweep.f_hi) = get_interval(sw, "f_support", "/sweep", 0.5L, 1.5L);
  if (!(cfg.sweep.f_lo > 0 && cfg.sweep.f_hi < mu_right)) fail("/sweep/f_support", "must lie in (0, mu_right)");
  cfg.sweep.f_phase = get_real(sw, "f_phase", "/sweep", 0);
  cfg.sweep.N = static_cast<int>(get_int(sw, "N", "/sweep", 420));
  cfg.sweep.n_left = static_cast<int>(get_int(sw, "N_left", "/sweep", 60));
  if (cfg.sweep.N < 32 || cfg.sweep.n_left < 8 || cfg.sweep.N - cfg.sweep.n_left < 24)
    fail("/sweep/N", "expected N >= 32, N_left >= 8, N - N_left >= 24");
  cfg.sweep.mode = static_cast<int>(get_int(sw, "mode", "/sweep", 0));
  if (cfg.sweep.mode < 0) fail("/sweep/mode", "expected >= 0");
  if (!(cfg.sweep.im_sigma > 1 - 2 * cfg.sweep.s)) fail("/sweep/im_sigma", threshold_message(cfg.sweep.im_sigma, cfg.sweep.s));

  const long long seed = get_int(root, "seed", "", 1);
  if (seed < 0) fail("/seed", "expected a non-negative integer");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.run.contour.seed = cfg.seed;
  cfg.run.model = cfg.model;
  cfg.run.absorption = cfg.absorption;
  cfg.resolved = root;
  return cfg;
}

std::string config_hash(const json& resolved) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : resolved.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ahres
