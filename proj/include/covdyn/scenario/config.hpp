#pragma once

// JSON scenario configuration. Every accepted key is listed in README.md.
// Errors carry the dotted key path of the offending entry.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "covdyn/ode.hpp"
#include "covdyn/s2_system.hpp"

namespace covdyn::scenario {

using nlohmann::json;

enum class ModelKind { S2TwoLevel, CustomMatrixFields };

/// Single-patch model with affine metric eta(R) = eta0 + sum_a R^a slope_a and
/// constant Hermitian omega_H and h_E. R moves on a straight line.
struct CustomModel {
  Eigen::Index dim = 2;
  Matrix eta0;
  std::vector<Matrix> eta_slopes;
  std::vector<Matrix> omega_h;
  Matrix h_e;
  RealVector start, end;
  double t_start = 0.0, t_end = 1.0;
  s2::Reparam reparam = s2::Reparam::Linear;
};

struct ScenarioConfig {
  std::string name = "scenario";
  ModelKind model = ModelKind::S2TwoLevel;
  s2::Model s2;
  s2::CurveSpec curve;
  CustomModel custom;
  StepperConfig stepper;
  std::optional<Vector> initial_state;
  bool normalize_initial_state = true;
  std::vector<double> taus;          // switch times; empty means overlap midpoints
  std::vector<std::vector<double>> compare_taus;  // one switch-time list per sweep entry; empty means five evenly spaced
  std::set<std::string> outputs{"trajectory-csv", "summary"};
  std::uint64_t seed = 7;
  bool inject_non_pseudo_hermitian_omega = false;
  json resolved;  // the configuration with every default filled in
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ConfigError, path + ": " + what);
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  return number(obj.at(key), join(path, key));
}

inline std::string string_or(const json& obj, const std::string& key, const std::string& path,
                             const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) fail(join(path, key), "expected a string");
  return obj.at(key).get<std::string>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Complex complex_entry(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
  fail(path, "expected a number or a [re, im] pair");
}

/// Rows of entries; each entry is a real number or a [re, im] pair.
inline Matrix matrix(const json& j, const std::string& path, Eigen::Index dim) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim)
    fail(path, "expected " + std::to_string(dim) + " rows");
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim)
      fail(rp, "expected " + std::to_string(dim) + " entries");
    for (Eigen::Index c = 0; c < dim; ++c)
      m(r, c) = complex_entry(row[static_cast<std::size_t>(c)], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline json vector_json(const RealVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline s2::Reparam reparam(const std::string& s, const std::string& path) {
  if (s == "linear") return s2::Reparam::Linear;
  if (s == "quadratic") return s2::Reparam::Quadratic;
  fail(path, "unknown reparametrization '" + s + "' (linear, quadratic)");
}

inline std::string reparam_name(s2::Reparam r) { return r == s2::Reparam::Linear ? "linear" : "quadratic"; }

inline void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(join(path, key), "unknown key");
  }
}

inline void parse_s2(const json& root, ScenarioConfig& cfg, json& resolved) {
  const json params = root.value("params", json::object());
  check_keys(params, "params",
             {"theta_plus", "theta_minus", "scales", "alpha", "epsilon", "y_hat", "pole_convention", "pole_margin"});
  s2::Model& m = cfg.s2;
  m.angles.theta_plus = number_or(params, "theta_plus", "params", m.angles.theta_plus);
  m.angles.theta_minus = number_or(params, "theta_minus", "params", m.angles.theta_minus);
  try {
    m.angles.validate();
  } catch (const Error& e) {
    fail("params.theta_plus", e.what());
  }
  json scales_out;
  const json scales = params.value("scales", json("default"));
  if (scales.is_string() && scales == "default") {
    m.scales = s2::default_scales(m.angles);
    scales_out = "default";
  } else if (scales.is_string() && scales == "modulated") {
    m.scales = s2::modulated_scales(m.angles);
    scales_out = "modulated";
  } else if (scales.is_object() && scales.contains("constant")) {
    const auto v = numbers(scales.at("constant"), "params.scales.constant");
    if (v.size() != 4) fail("params.scales.constant", "expected [xi, zeta, xi_tilde, zeta_tilde]");
    try {
      m.scales = s2::constant_scales(v[0], v[1], v[2], v[3]);
    } catch (const Error& e) {
      fail("params.scales.constant", e.what());
    }
    scales_out = {{"constant", v}};
  } else {
    fail("params.scales", "expected \"default\", \"modulated\" or {\"constant\": [...]}");
  }
  json alpha_out = "zero";
  const json alpha = params.value("alpha", json("zero"));
  if (alpha.is_string() && alpha == "zero") {
    m.alpha = s2::zero_alpha();
  } else if (alpha.is_object() && alpha.contains("tangent")) {
    const double k = number(alpha.at("tangent"), "params.alpha.tangent");
    m.alpha = s2::tangent_alpha(k);
    alpha_out = {{"tangent", k}};
  } else {
    fail("params.alpha", "expected \"zero\" or {\"tangent\": kappa}");
  }
  const double eps = number_or(params, "epsilon", "params", 1.0);
  std::vector<double> y{0.0, 0.0, 1.0};
  if (params.contains("y_hat")) y = numbers(params.at("y_hat"), "params.y_hat");
  if (y.size() != 3) fail("params.y_hat", "expected three components");
  const Vec3 yv(y[0], y[1], y[2]);
  if (!(yv.norm() > 0.0)) fail("params.y_hat", "must be nonzero");
  m.energy = s2::constant_energy(eps, yv);
  const std::string pole = string_or(params, "pole_convention", "params", "phi-zero");
  if (pole == "phi-zero") m.pole = s2::PoleConvention::PhiZero;
  else if (pole == "reject") m.pole = s2::PoleConvention::Reject;
  else fail("params.pole_convention", "expected \"phi-zero\" or \"reject\"");
  m.pole_margin = number_or(params, "pole_margin", "params", 1e-3);
  if (!(m.pole_margin > 0.0)) fail("params.pole_margin", "must be positive");
  resolved["params"] = {{"theta_plus", m.angles.theta_plus}, {"theta_minus", m.angles.theta_minus},
                        {"scales", scales_out},                {"alpha", alpha_out},
                        {"epsilon", eps},                      {"y_hat", y},  // as given: renormalizing is not idempotent in the last ulp
                        {"pole_convention", pole},             {"pole_margin", m.pole_margin}};

  const json curve = root.value("curve", json::object());
  check_keys(curve, "curve",
             {"kind", "theta0", "theta1", "phi0", "phi1", "inclination", "waypoints", "t_start", "t_end", "reparam",
              "start_patch"});
  s2::CurveSpec& c = cfg.curve;
  const std::string kind = string_or(curve, "kind", "curve", "circle");
  if (kind == "circle") c.kind = s2::CurveKind::Circle;
  else if (kind == "meridian") c.kind = s2::CurveKind::Meridian;
  else if (kind == "great-circle") c.kind = s2::CurveKind::GreatCircle;
  else if (kind == "piecewise-waypoints") c.kind = s2::CurveKind::Waypoints;
  else fail("curve.kind", "unknown curve '" + kind + "' (circle, meridian, great-circle, piecewise-waypoints)");
  const bool meridian = c.kind == s2::CurveKind::Meridian, great = c.kind == s2::CurveKind::GreatCircle;
  c.theta0 = number_or(curve, "theta0", "curve", meridian ? s2::kPi / 6 : s2::kPi / 2);
  c.theta1 = number_or(curve, "theta1", "curve", meridian ? 5 * s2::kPi / 6 : c.theta0);
  c.phi0 = number_or(curve, "phi0", "curve", great ? s2::kPi / 2 : 0.0);
  c.phi1 = number_or(curve, "phi1", "curve", great ? 5 * s2::kPi / 2 : 2 * s2::kPi);
  c.inclination = number_or(curve, "inclination", "curve", 1.2);
  c.t_start = number_or(curve, "t_start", "curve", 0.0);
  c.t_end = number_or(curve, "t_end", "curve", 1.0);
  if (!(c.t_end > c.t_start)) fail("curve.t_end", "must exceed curve.t_start");
  c.reparam = reparam(string_or(curve, "reparam", "curve", "linear"), "curve.reparam");
  const std::string sp = string_or(curve, "start_patch", "curve", "plus");
  if (sp != "plus" && sp != "minus") fail("curve.start_patch", "expected \"plus\" or \"minus\"");
  c.start_patch = sp == "plus" ? s2::Patch::Plus : s2::Patch::Minus;
  json wp = json::array();
  if (c.kind == s2::CurveKind::Waypoints) {
    if (!curve.contains("waypoints") || !curve.at("waypoints").is_array())
      fail("curve.waypoints", "piecewise-waypoints needs an array of [theta, phi] pairs");
    const json& w = curve.at("waypoints");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const auto p = numbers(w[i], "curve.waypoints[" + std::to_string(i) + "]");
      if (p.size() != 2) fail("curve.waypoints[" + std::to_string(i) + "]", "expected [theta, phi]");
      c.waypoints.push_back({p[0], p[1]});
      wp.push_back(p);
    }
    if (c.waypoints.size() < 2) fail("curve.waypoints", "needs at least two waypoints");
  }
  if (great && !(c.inclination > 0.0 && c.inclination < s2::kPi / 2))
    fail("curve.inclination", "must lie in (0, pi/2)");
  resolved["curve"] = {{"kind", kind},           {"theta0", c.theta0},   {"theta1", c.theta1},
                       {"phi0", c.phi0},         {"phi1", c.phi1},       {"inclination", c.inclination},
                       {"t_start", c.t_start},   {"t_end", c.t_end},     {"reparam", reparam_name(c.reparam)},
                       {"start_patch", sp}};
  if (c.kind == s2::CurveKind::Waypoints) resolved["curve"]["waypoints"] = wp;
}

inline void parse_custom(const json& root, ScenarioConfig& cfg, json& resolved) {
  const json params = root.value("params", json::object());
  check_keys(params, "params", {"dim", "eta0", "eta_slopes", "omega_h", "h_e"});
  CustomModel& m = cfg.custom;
  const double dim = number_or(params, "dim", "params", 2);
  if (!(dim >= 1 && dim <= 64 && dim == std::floor(dim))) fail("params.dim", "expected an integer in [1, 64]");
  m.dim = static_cast<Eigen::Index>(dim);
  m.eta0 = params.contains("eta0") ? matrix(params.at("eta0"), "params.eta0", m.dim) : identity(m.dim);
  if (!is_positive_definite(m.eta0)) fail("params.eta0", "must be Hermitian positive-definite");
  m.h_e = params.contains("h_e") ? matrix(params.at("h_e"), "params.h_e", m.dim) : zeros(m.dim);
  if (!is_hermitian(m.h_e, 1e-12)) fail("params.h_e", "must be Hermitian");

  const json curve = root.value("curve", json::object());
  check_keys(curve, "curve", {"kind", "start", "end", "t_start", "t_end", "reparam"});
  if (string_or(curve, "kind", "curve", "line") != "line") fail("curve.kind", "custom-matrix-fields supports \"line\"");
  const auto start = curve.contains("start") ? numbers(curve.at("start"), "curve.start") : std::vector<double>{0.0};
  const auto end = curve.contains("end") ? numbers(curve.at("end"), "curve.end") : std::vector<double>{1.0};
  if (start.empty() || start.size() != end.size()) fail("curve.end", "start and end need the same nonzero length");
  const auto d = static_cast<Eigen::Index>(start.size());
  m.start = Eigen::Map<const RealVector>(start.data(), d);
  m.end = Eigen::Map<const RealVector>(end.data(), d);
  m.t_start = number_or(curve, "t_start", "curve", 0.0);
  m.t_end = number_or(curve, "t_end", "curve", 1.0);
  if (!(m.t_end > m.t_start)) fail("curve.t_end", "must exceed curve.t_start");
  m.reparam = reparam(string_or(curve, "reparam", "curve", "linear"), "curve.reparam");

  auto matrix_list = [&](const char* key) {
    std::vector<Matrix> out;
    const std::string path = std::string("params.") + key;
    if (!params.contains(key)) {
      out.assign(static_cast<std::size_t>(d), zeros(m.dim));
      return out;
    }
    const json& arr = params.at(key);
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != d)
      fail(path, "expected one matrix per base coordinate (" + std::to_string(d) + ")");
    for (std::size_t a = 0; a < arr.size(); ++a)
      out.push_back(matrix(arr[a], path + "[" + std::to_string(a) + "]", m.dim));
    return out;
  };
  m.eta_slopes = matrix_list("eta_slopes");
  m.omega_h = matrix_list("omega_h");
  for (std::size_t a = 0; a < m.eta_slopes.size(); ++a) {
    if (!is_hermitian(m.eta_slopes[a], 1e-12)) fail("params.eta_slopes[" + std::to_string(a) + "]", "must be Hermitian");
    if (!is_hermitian(m.omega_h[a], 1e-12)) fail("params.omega_h[" + std::to_string(a) + "]", "must be Hermitian");
  }
  json slopes = json::array(), omegas = json::array();
  for (const auto& s : m.eta_slopes) slopes.push_back(matrix_json(s));
  for (const auto& w : m.omega_h) omegas.push_back(matrix_json(w));
  resolved["params"] = {{"dim", m.dim},         {"eta0", matrix_json(m.eta0)}, {"eta_slopes", slopes},
                        {"omega_h", omegas},    {"h_e", matrix_json(m.h_e)}};
  resolved["curve"] = {{"kind", "line"},        {"start", vector_json(m.start)}, {"end", vector_json(m.end)},
                       {"t_start", m.t_start},  {"t_end", m.t_end},             {"reparam", reparam_name(m.reparam)}};
}

}  // namespace detail

/// Builds a validated configuration from a JSON document. A document that
/// carries "resolved_config" (an emitted summary) is re-run from that entry.
inline ScenarioConfig parse_config(json root) {
  using namespace detail;
  if (root.is_object() && root.contains("resolved_config")) root = root.at("resolved_config");
  check_keys(root, "", {"name", "model", "params", "curve", "stepper", "initial_state", "tau", "compare", "outputs",
                        "seed", "fixtures"});
  ScenarioConfig cfg;
  json resolved = json::object();
  cfg.name = string_or(root, "name", "", "scenario");
  const std::string model = string_or(root, "model", "", "s2-two-level");
  if (model == "s2-two-level") {
    cfg.model = ModelKind::S2TwoLevel;
    parse_s2(root, cfg, resolved);
  } else if (model == "custom-matrix-fields") {
    cfg.model = ModelKind::CustomMatrixFields;
    parse_custom(root, cfg, resolved);
  } else {
    fail("model", "unknown model '" + model + "' (s2-two-level, custom-matrix-fields)");
  }

  const json st = root.value("stepper", json::object());
  check_keys(st, "stepper", {"method", "dt", "target_local_error"});
  const std::string method = string_or(st, "method", "stepper", "rk4-fixed");
  if (method == "rk4-fixed") cfg.stepper.method = StepMethod::Rk4Fixed;
  else if (method == "rk4-adaptive") cfg.stepper.method = StepMethod::Rk4Adaptive;
  else fail("stepper.method", "expected \"rk4-fixed\" or \"rk4-adaptive\"");
  cfg.stepper.dt = number_or(st, "dt", "stepper", 1e-3);
  if (!(cfg.stepper.dt > 0.0)) fail("stepper.dt", "must be positive");
  cfg.stepper.target_local_error = number_or(st, "target_local_error", "stepper", 1e-10);
  if (!(cfg.stepper.target_local_error > 0.0)) fail("stepper.target_local_error", "must be positive");

  const Eigen::Index n = cfg.model == ModelKind::S2TwoLevel ? 2 : cfg.custom.dim;
  json init = {{"normalize", true}};
  if (root.contains("initial_state")) {
    const json& is = root.at("initial_state");
    check_keys(is, "initial_state", {"re", "im", "normalize"});
    const auto re = is.contains("re") ? numbers(is.at("re"), "initial_state.re") : std::vector<double>{};
    const auto im = is.contains("im") ? numbers(is.at("im"), "initial_state.im") : std::vector<double>(re.size(), 0.0);
    if (static_cast<Eigen::Index>(re.size()) != n || im.size() != re.size())
      fail("initial_state.re", "expected " + std::to_string(n) + " real and imaginary parts");
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = {re[static_cast<std::size_t>(i)], im[static_cast<std::size_t>(i)]};
    if (v.isZero(0.0)) fail("initial_state", "must be nonzero");
    cfg.initial_state = v;
    if (is.contains("normalize")) {
      if (!is.at("normalize").is_boolean()) fail("initial_state.normalize", "expected a boolean");
      cfg.normalize_initial_state = is.at("normalize").get<bool>();
    }
    init = {{"re", re}, {"im", im}, {"normalize", cfg.normalize_initial_state}};
  }

  if (root.contains("tau")) {
    const json& t = root.at("tau");
    cfg.taus = t.is_number() ? std::vector<double>{t.get<double>()} : numbers(t, "tau");
  }
  if (root.contains("compare")) {
    const json& c = root.at("compare");
    check_keys(c, "compare", {"taus"});
    if (c.contains("taus")) {
      const json& t = c.at("taus");
      if (!t.is_array()) fail("compare.taus", "expected an array");
      for (std::size_t i = 0; i < t.size(); ++i) {
        const std::string path = "compare.taus[" + std::to_string(i) + "]";
        cfg.compare_taus.push_back(t[i].is_number() ? std::vector<double>{t[i].get<double>()} : numbers(t[i], path));
      }
    }
  }
  if (root.contains("outputs")) {
    const json& o = root.at("outputs");
    if (!o.is_array()) fail("outputs", "expected an array");
    cfg.outputs.clear();
    for (std::size_t i = 0; i < o.size(); ++i) {
      const std::string path = "outputs[" + std::to_string(i) + "]";
      if (!o[i].is_string()) fail(path, "expected a string");
      const auto s = o[i].get<std::string>();
      if (s != "trajectory-csv" && s != "summary" && s != "invariant-report")
        fail(path, "unknown output '" + s + "' (trajectory-csv, summary, invariant-report)");
      cfg.outputs.insert(s);
    }
  }
  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_integer()) fail("seed", "expected an integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (root.contains("fixtures")) {
    const json& f = root.at("fixtures");
    check_keys(f, "fixtures", {"inject_non_pseudo_hermitian_omega"});
    if (f.contains("inject_non_pseudo_hermitian_omega")) {
      if (!f.at("inject_non_pseudo_hermitian_omega").is_boolean())
        fail("fixtures.inject_non_pseudo_hermitian_omega", "expected a boolean");
      cfg.inject_non_pseudo_hermitian_omega = f.at("inject_non_pseudo_hermitian_omega").get<bool>();
    }
  }

  resolved["name"] = cfg.name;
  resolved["model"] = model;
  resolved["stepper"] = {{"method", method}, {"dt", cfg.stepper.dt}, {"target_local_error", cfg.stepper.target_local_error}};
  resolved["initial_state"] = init;
  resolved["tau"] = cfg.taus;
  resolved["compare"] = {{"taus", cfg.compare_taus}};
  resolved["outputs"] = std::vector<std::string>(cfg.outputs.begin(), cfg.outputs.end());
  resolved["seed"] = cfg.seed;
  resolved["fixtures"] = {{"inject_non_pseudo_hermitian_omega", cfg.inject_non_pseudo_hermitian_omega}};
  cfg.resolved = resolved;
  return cfg;
}

inline ScenarioConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("<document>: ") + e.what());
  }
  return parse_config(std::move(root));
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + std::string(e.what()).substr(std::string("ConfigError: ").size()));
  }
}

}  // namespace covdyn::scenario
