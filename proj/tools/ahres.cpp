// ahres: resonances, high-energy sweeps, bicharacteristics and invariant checks
// for even asymptotically hyperbolic model metrics.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ahres/checks.hpp"
#include "ahres/config.hpp"
#include "ahres/flow.hpp"
#include "ahres/io.hpp"

using namespace ahres;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  int threads = -1;
};

int resolve_threads(int flag) {
  if (flag >= 0) return flag;
  if (const char* env = std::getenv("AHRES_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 0) return static_cast<int>(v);
    throw Error(ErrorKind::validation, "AHRES_THREADS must be a non-negative integer");
  }
  return 1;
}

RunConfig load(const Common& c, std::optional<long long> seed) {
  std::string text = "{}";
  if (!c.config_path.empty()) {
    std::ifstream f(c.config_path);
    if (!f) throw Error(ErrorKind::validation, "cannot read config " + c.config_path);
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  if (seed) {
    json j = json::parse(text, nullptr, false);
    if (j.is_object()) {
      j["seed"] = *seed;
      text = j.dump();
    }
  }
  return parse_config(text);
}

std::filesystem::path out_path(const Common& c, const std::string& name) {
  std::filesystem::create_directories(c.out_dir);
  return std::filesystem::path(c.out_dir) / name;
}

json provenance(const RunConfig& cfg) {
  return {{"config_hash", config_hash(cfg.resolved)},
          {"version", kVersion},
          {"seed", cfg.seed},
          {"N", cfg.run.N},
          {"absorption_mode", to_string(cfg.absorption.mode)},
          {"config", cfg.resolved}};
}

json entry_json(const ResonanceEntry& e) {
  return {{"re", static_cast<double>(e.sigma.real())},
          {"im", static_cast<double>(e.sigma.imag())},
          {"mode", e.mode},
          {"sector", e.sector},
          {"residual", static_cast<double>(e.residual)},
          {"refine_err", static_cast<double>(e.refine_err)},
          {"absorption_err", static_cast<double>(e.absorption_err)},
          {"multiplicity", e.multiplicity}};
}

int cmd_resonances(const Common& c, std::optional<long long> seed) {
  RunConfig cfg = load(c, seed);
  cfg.run.contour.threads = resolve_threads(c.threads);
  const ResonanceResult r = compute_resonances(cfg.run);
  json entries = json::array(), flagged = json::array(), contours = json::array();
  for (const auto& e : r.entries) entries.push_back(entry_json(e));
  for (const auto& e : r.flagged) flagged.push_back(entry_json(e));
  for (const auto& k : r.window)
    contours.push_back({{"center", {static_cast<double>(k.center.real()), static_cast<double>(k.center.imag())}},
                        {"radius", static_cast<double>(k.radius)},
                        {"n_nodes", k.n_nodes}});
  json prov = provenance(cfg);
  prov["notes"] = r.notes;
  const json doc = {{"model", cfg.resolved["model"]},
                    {"entries", entries},
                    {"flagged", flagged},
                    {"window", {{"re", cfg.resolved["solver"]["window"]["re"]},
                                {"im", cfg.resolved["solver"]["window"]["im"]},
                                {"contours", contours}}},
                    {"provenance", prov}};
  write_atomic(out_path(c, "resonances.json").string(), dump_json(doc));
  return 0;
}

int cmd_sweep(const Common& c, std::optional<long long> seed) {
  RunConfig cfg = load(c, seed);
  cfg.sweep.threads = resolve_threads(c.threads);
  const SweepResult r = sweep_norm_estimate(cfg.model, cfg.sweep, cfg.absorption);
  json prov = provenance(cfg);
  prov["N"] = cfg.sweep.N;
  std::string csv = "# ahres " + std::string(kVersion) + " config_hash=" + prov["config_hash"].get<std::string>() + "\n";
  csv += "re_sigma,im_sigma,ratio,s,N\n";
  for (const auto& row : r.rows)
    csv += fmt17(static_cast<double>(row.sigma.real())) + "," + fmt17(static_cast<double>(row.sigma.imag())) + "," +
           fmt17(static_cast<double>(row.ratio)) + "," + fmt17(static_cast<double>(row.s)) + "," +
           std::to_string(row.N) + "\n";
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"re_sigma", static_cast<double>(row.sigma.real())},
                    {"ratio_sm2", static_cast<double>(row.ratio_sm2)},
                    {"h", static_cast<double>(row.h)}});
  const json fit = {{"slope", static_cast<double>(r.slope)},
                    {"slope_ci95", {static_cast<double>(r.slope_lo), static_cast<double>(r.slope_hi)}},
                    {"max_ratio_times_abs_sigma", static_cast<double>(r.max_ratio_sigma)},
                    {"max_ratio_sm2_times_abs_sigma", static_cast<double>(r.max_ratio_sm2_sigma)},
                    {"rows_sm2", rows},
                    {"provenance", prov}};
  write_atomic(out_path(c, "sweep.csv").string(), csv);
  write_atomic(out_path(c, "fit.json").string(), dump_json(fit));
  return 0;
}

CompactifiedPhasePoint parse_phase_seed(const std::string& s) {
  std::vector<Real> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    const long double x = std::strtold(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw Error(ErrorKind::validation, "--seed: bad number '" + tok + "'");
    v.push_back(x);
  }
  if (v.size() != 5) throw Error(ErrorKind::validation, "--seed expects mu,y,nu,eta_hat,sgn");
  if (v[2] < 0) throw Error(ErrorKind::validation, "--seed: nu must be >= 0");
  if (v[4] != 1 && v[4] != -1) throw Error(ErrorKind::validation, "--seed: sgn must be 1 or -1");
  return {v[0], v[1], v[2], v[3], static_cast<int>(v[4])};
}

Cplx parse_complex(const std::string& s) {
  // a, a+bi, a-bi, bi
  std::string t = s;
  if (t.empty()) throw Error(ErrorKind::validation, "--z: empty");
  if (t.back() != 'i') {
    char* end = nullptr;
    const long double a = std::strtold(t.c_str(), &end);
    if (*end != '\0') throw Error(ErrorKind::validation, "--z: cannot parse '" + s + "'");
    return {a, 0};
  }
  t.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t k = t.size(); k-- > 1;)
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
      split = k;
      break;
    }
  auto num = [&](const std::string& u, long double dflt) -> long double {
    if (u.empty() || u == "+") return dflt;
    if (u == "-") return -dflt;
    char* end = nullptr;
    const long double x = std::strtold(u.c_str(), &end);
    if (*end != '\0') throw Error(ErrorKind::validation, "--z: cannot parse '" + s + "'");
    return x;
  };
  if (split == std::string::npos) return {0, num(t, 1)};
  return {num(t.substr(0, split), 0), num(t.substr(split), 1)};
}

int cmd_flow(const Common& c, const std::string& seed, const std::string& kind, const std::string& z, int direction,
             double max_time) {
  RunConfig cfg = load(c, std::nullopt);
  const ExtendedCoeffs coeffs = derive_extended_coeffs(cfg.model);
  FieldSpec spec;
  if (kind == "classical") spec = FieldSpec::classical();
  else if (kind == "semi") spec = FieldSpec::semiclassical(parse_complex(z));
  else throw Error(ErrorKind::validation, "--kind must be classical or semi");
  if (direction != 1 && direction != -1) throw Error(ErrorKind::validation, "--direction must be 1 or -1");
  FlowStops stops;
  stops.max_time = max_time;
  const Trajectory tr = integrate_bicharacteristic(coeffs, parse_phase_seed(seed), direction, spec, stops);
  std::string csv = "# ahres " + std::string(kVersion) + " config_hash=" + config_hash(cfg.resolved) +
                    " terminal=" + to_string(tr.terminal) + "\n";
  csv += "time,mu,y,nu,eta_hat\n";
  for (const auto& s : tr.samples)
    csv += fmt17(double(s.t)) + "," + fmt17(double(s.pt.mu)) + "," + fmt17(double(s.pt.y)) + "," +
           fmt17(double(s.pt.nu)) + "," + fmt17(double(s.pt.eta_hat)) + "\n";
  write_atomic(out_path(c, "trajectory.csv").string(), csv);
  std::cout << to_string(tr.terminal) << "\n";
  return 0;
}

int cmd_check(const Common& c, std::optional<long long> seed, const std::vector<std::string>& suites) {
  RunConfig cfg = load(c, seed);
  json report = run_checks(suites, cfg, resolve_threads(c.threads));
  report["provenance"] = {{"config_hash", config_hash(cfg.resolved)}, {"version", kVersion}, {"seed", cfg.seed}};
  const std::string text = dump_json(report);
  if (c.out_dir.empty()) std::cout << text;
  else write_atomic(out_path(c, "check.json").string(), text);
  return report["pass"].get<bool>() ? 0 : 1;
}

void emit_error(const std::string& kind, const std::string& msg) {
  std::cerr << json{{"error", kind}, {"message", msg}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonances of even asymptotically hyperbolic model spaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  std::optional<long long> seed;
  auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_dir, "output directory");
    sub->add_option("--threads", common.threads, "worker threads (0 = auto; default AHRES_THREADS or 1)")
        ->check(CLI::NonNegativeNumber);
    if (with_seed) sub->add_option("--seed", seed, "random seed (overrides the config)")->check(CLI::NonNegativeNumber);
  };

  CLI::App* res = app.add_subcommand("resonances", "resonances in the configured window");
  add_common(res, true);
  CLI::App* sweep = app.add_subcommand("sweep", "high-energy norm sweep along a horizontal line");
  add_common(sweep, true);

  CLI::App* flow = app.add_subcommand("flow", "integrate one bicharacteristic");
  add_common(flow, false);
  std::string phase_seed, kind = "classical", z = "1";
  int direction = 1;
  double max_time = 1000;
  flow->add_option("--seed", phase_seed, "start point mu,y,nu,eta_hat,sgn")->required();
  flow->add_option("--kind", kind, "classical or semi");
  flow->add_option("--z", z, "semiclassical parameter a+bi");
  flow->add_option("--direction", direction, "1 forward, -1 backward");
  flow->add_option("--max-time", max_time, "trapped cutoff in rescaled time");

  CLI::App* check = app.add_subcommand("check", "run invariant suites and emit a JSON report");
  add_common(check, true);
  bool all = false;
  std::map<std::string, bool> picked;
  check->add_flag("--all", all, "every suite");
  for (const auto& s : check_suite_names()) check->add_flag("--" + s, picked[s], s + " suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    emit_error("validation", e.what());
    return 2;
  }
  if (check->parsed() && check->count("--out") == 0) common.out_dir.clear();

  try {
    if (res->parsed()) return cmd_resonances(common, seed);
    if (sweep->parsed()) return cmd_sweep(common, seed);
    if (flow->parsed()) return cmd_flow(common, phase_seed, kind, z, direction, max_time);
    std::vector<std::string> suites;
    for (const auto& s : check_suite_names())
      if (all || picked[s]) suites.push_back(s);
    if (suites.empty()) suites = check_suite_names();
    return cmd_check(common, seed, suites);
  } catch (const Error& e) {
    emit_error(to_string(e.kind()), e.what());
    return e.kind() == ErrorKind::validation ? 2 : 1;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
}
