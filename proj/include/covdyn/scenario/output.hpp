#pragma once

// CSV and JSON renderings of run, check and compare results.

#include <fmt/format.h>

#include <ostream>
#include <string>
#include <string_view>

#include "covdyn/scenario/checks.hpp"

namespace covdyn::scenario {

/// Shortest text that round-trips through 17 significant digits.
inline std::string format_number(double x) { return fmt::format("{:.17g}", x); }

/// RFC 4180: quote fields holding a comma, quote, CR or LF, doubling inner quotes.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// One row per sample time. At a patch switch only the row in the new patch is kept.
inline void write_trajectory_csv(std::ostream& os, const Scenario& s, const RunResult& run) {
  const auto& ev = run.evolution;
  const Eigen::Index n = s.spec.dim();
  std::string header = "t,patch_id";
  for (const auto& c : s.coordinate_names) header += "," + csv_field(c);
  for (Eigen::Index k = 0; k < n; ++k) header += fmt::format(",psi{}_re,psi{}_im", k, k);
  header += ",eta_norm,energy_expectation,hermiticity_residual_of_h\r\n";
  os << header;
  for (std::size_t i = 0; i < ev.times.size(); ++i) {
    if (i + 1 < ev.times.size() && ev.times[i + 1] == ev.times[i]) continue;
    std::string row = format_number(ev.times[i]) + "," + csv_field(ev.patch_trace[i]);
    const RealVector r = s.spec.curve.position(ev.times[i]);
    for (Eigen::Index a = 0; a < r.size(); ++a) row += "," + format_number(r(a));
    for (Eigen::Index k = 0; k < n; ++k)
      row += "," + format_number(ev.psi[i](k).real()) + "," + format_number(ev.psi[i](k).imag());
    row += "," + format_number(ev.eta_norm[i]) + "," + format_number(ev.energy_expect[i]) + "," +
           format_number(run.hermiticity_residual[i]);
    os << row << "\r\n";
  }
}

inline json state_json(const Vector& v) {
  json re = json::array(), im = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    re.push_back(v(k).real());
    im.push_back(v(k).imag());
  }
  return {{"re", re}, {"im", im}};
}

inline constexpr double kRunNormTolerance = 1e-6;
inline constexpr double kRunHermiticityTolerance = 1e-8;

inline bool run_within_tolerance(const RunResult& run) {
  const double n0 = run.evolution.eta_norm.front();
  return run.evolution.max_norm_drift() / (n0 * n0) <= kRunNormTolerance &&
         run.max_hermiticity_residual() <= kRunHermiticityTolerance;
}

inline json summary_json(const Scenario& s, const RunResult& run) {
  const auto& ev = run.evolution;
  json switches = json::array();
  for (std::size_t k = 0; k < ev.switch_times.size(); ++k)
    switches.push_back({{"tau", ev.switch_times[k]},
                        {"from", run.switch_from[k]},
                        {"to", run.switch_to[k]},
                        {"state_jump", ev.switch_jumps[k]}});
  const double n0 = ev.eta_norm.front();
  return {{"name", s.cfg.name},
          {"samples", ev.times.size()},
          {"endpoint", {{"t", ev.times.back()}, {"patch_id", ev.patch_trace.back()}, {"psi", state_json(ev.final_state())}}},
          {"eta_norm_final", ev.eta_norm.back()},
          {"eta_norm_drift", ev.max_norm_drift() / (n0 * n0)},
          {"max_hermiticity_residual_of_h", run.max_hermiticity_residual()},
          {"energy_expectation_final", ev.energy_expect.back()},
          {"patch_switches", switches},
          {"tolerances", {{"eta_norm_drift", kRunNormTolerance}, {"hermiticity_residual_of_h", kRunHermiticityTolerance}}},
          {"within_tolerance", run_within_tolerance(run)},
          {"resolved_config", s.cfg.resolved}};
}

inline json report_json(const Scenario& s, const InvariantReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"invariant", r.name},
                    {"samples", r.samples},
                    {"max_residual", r.max_residual},
                    {"tolerance", r.tolerance},
                    {"pass", r.pass},
                    {"trivial", r.trivial}});
  return {{"name", s.cfg.name}, {"pass", rep.pass()}, {"invariants", rows}, {"resolved_config", s.cfg.resolved}};
}

inline void print_report(std::ostream& os, const InvariantReport& rep) {
  os << fmt::format("{:<52} {:>7} {:>12} {:>9}  {}\n", "invariant", "samples", "max_residual", "tolerance", "result");
  for (const auto& r : rep.rows)
    os << fmt::format("{:<52} {:>7} {:>12.3e} {:>9.0e}  {}\n", r.name, r.samples, r.max_residual, r.tolerance,
                      r.pass ? (r.trivial ? "pass (trivial)" : "pass") : "FAIL");
}

inline json compare_json(const Scenario& s, const CompareResult& c) {
  json rows = json::array(), table = json::array();
  for (const auto& r : c.rows)
    rows.push_back({{"comparison", r.name}, {"discrepancy", r.discrepancy}, {"tolerance", r.tolerance}, {"pass", r.pass()}});
  for (const auto& t : c.tau_table) table.push_back({{"taus", t.taus}, {"endpoint", state_json(t.endpoint)}});
  return {{"name", s.cfg.name},
          {"pass", c.pass()},
          {"final_patch", c.final_patch},
          {"comparisons", rows},
          {"tau_sweep", table},
          {"resolved_config", s.cfg.resolved}};
}

inline void print_compare(std::ostream& os, const CompareResult& c) {
  os << fmt::format("{:<36} {:>12} {:>9}  {}\n", "comparison", "discrepancy", "tolerance", "result");
  for (const auto& r : c.rows)
    os << fmt::format("{:<36} {:>12.3e} {:>9.0e}  {}\n", r.name, r.discrepancy, r.tolerance, r.pass() ? "pass" : "FAIL");
  if (c.tau_table.empty()) return;
  os << "\ntau sweep (endpoint in patch " << c.final_patch << ")\n";
  for (const auto& t : c.tau_table) {
    std::string taus;
    for (double x : t.taus) taus += (taus.empty() ? "" : " ") + fmt::format("{:.6f}", x);
    std::string psi;
    for (Eigen::Index k = 0; k < t.endpoint.size(); ++k)
      psi += fmt::format(" ({:+.12f}, {:+.12f})", t.endpoint(k).real(), t.endpoint(k).imag());
    os << "  tau = " << taus << " ->" << psi << "\n";
  }
}

}  // namespace covdyn::scenario
