#pragma once

// A configured system ready to evolve, plus the run and compare drivers.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "covdyn/scenario/config.hpp"

namespace covdyn::scenario {

struct Scenario {
  ScenarioConfig cfg;
  SystemSpec spec;
  Vector psi0;                             // eta-representation state on the first patch
  std::vector<std::string> coordinate_names;
};

namespace detail {

inline double time_map(s2::Reparam r, double x) { return r == s2::Reparam::Quadratic ? x * x : x; }

inline double time_map_rate(s2::Reparam r, double x) { return r == s2::Reparam::Quadratic ? 2 * x : 1.0; }

inline SystemSpec build_custom(const CustomModel& m, bool inject) {
  SystemSpec spec;
  const Eigen::Index d = m.start.size();
  CurvePath& c = spec.curve;
  c.t_start = m.t_start;
  c.t_end = m.t_end;
  const double span = m.t_end - m.t_start;
  c.position = [m, span](double t) {
    return RealVector(m.start + time_map(m.reparam, (t - m.t_start) / span) * (m.end - m.start));
  };
  c.velocity = [m, span](double t) {
    return RealVector(time_map_rate(m.reparam, (t - m.t_start) / span) / span * (m.end - m.start));
  };

  MetricField metric;
  metric.patch_id = "main";
  metric.dim = m.dim;
  metric.domain = whole_space();
  metric.eta_fn = [m, d](const RealVector& r) {
    Matrix e = m.eta0;
    for (Eigen::Index a = 0; a < d; ++a) e += r(a) * m.eta_slopes[static_cast<std::size_t>(a)];
    return e;
  };
  metric.partials_fn = MatrixListField([s = m.eta_slopes](const RealVector&) { return s; });

  constexpr int kProbe = 64;
  for (int k = 0; k <= kProbe; ++k) {
    const double t = m.t_start + span * k / kProbe;
    if (!is_positive_definite(metric.eta_matrix(c.position(t))))
      fail("params.eta_slopes", "metric is not positive-definite along the curve at t=" + std::to_string(t));
  }

  const double kick = inject ? 0.1 : 0.0;
  ConnectionForm omega;
  omega.patch_id = "main";
  omega.dim = m.dim;
  omega.domain = whole_space();
  omega.components_fn = [m, metric, kick](const RealVector& r) {
    const MetricOperator e = metric.at(r);
    std::vector<Matrix> out;
    for (const auto& w : m.omega_h) out.push_back(dehermitize(w, e));
    if (kick != 0.0 && !out.empty()) out.back() += kI * kick * identity(m.dim);
    return out;
  };
  std::vector<RealVector> samples;
  if (!inject)
    for (int k = 1; k < 8; ++k) samples.push_back(c.position(m.t_start + span * k / 8.0));
  spec.patches.push_back({"main", metric, assemble_connection(a_zero_form(metric), omega, metric, samples)});
  spec.energy.authoring_patch = "main";
  spec.energy.hermitian_form["main"] = [h = m.h_e](const RealVector&) { return h; };
  return spec;
}

}  // namespace detail

/// First patch of the schedule, or the only patch of a single-patch bundle.
inline std::string first_patch(const SystemSpec& spec) { return plan_segments(spec, {}).front().patch; }

inline Scenario build_scenario(const ScenarioConfig& cfg) {
  Scenario s;
  s.cfg = cfg;
  if (cfg.model == ModelKind::S2TwoLevel) {
    s2::BuildOptions opts;
    opts.inject_non_pseudo_hermitian_omega = cfg.inject_non_pseudo_hermitian_omega;
    s.spec = s2::build_system(cfg.s2, cfg.curve, opts);
    s.coordinate_names = {"theta", "phi"};
  } else {
    s.spec = detail::build_custom(cfg.custom, cfg.inject_non_pseudo_hermitian_omega);
    for (Eigen::Index a = 0; a < cfg.custom.start.size(); ++a) s.coordinate_names.push_back("r" + std::to_string(a));
  }
  const Eigen::Index n = s.spec.dim();
  Vector psi = cfg.initial_state.value_or(Vector::Unit(n, 0));
  if (cfg.normalize_initial_state) {
    const RealVector r0 = s.spec.curve.position(s.spec.curve.t_start);
    psi /= eta_norm(s.spec.patch(first_patch(s.spec)).metric.at(r0), psi);
  }
  s.psi0 = psi;
  return s;
}

struct RunResult {
  EvolutionResult evolution;
  std::vector<double> hermiticity_residual;  // per sample, of the generic h on the sample's patch
  std::vector<std::string> switch_from, switch_to;

  double max_hermiticity_residual() const {
    double worst = 0.0;
    for (double r : hermiticity_residual) worst = std::max(worst, r);
    return worst;
  }
};

inline RunResult run_scenario(const Scenario& s) {
  RunResult out;
  out.evolution = evolve_across_patches(s.spec, s.psi0, s.cfg.taus, s.cfg.stepper);
  const auto segments = plan_segments(s.spec, s.cfg.taus);
  for (std::size_t k = 1; k < segments.size(); ++k) {
    out.switch_from.push_back(segments[k - 1].patch);
    out.switch_to.push_back(segments[k].patch);
  }
  std::map<std::string, TimeMatrix> h;
  for (const auto& seg : segments)
    if (!h.count(seg.patch)) h[seg.patch] = local_hermitian_hamiltonian(s.spec, seg.patch);
  const auto& ev = out.evolution;
  for (std::size_t i = 0; i < ev.times.size(); ++i) {
    const Matrix hm = h.at(ev.patch_trace[i])(ev.times[i]);
    out.hermiticity_residual.push_back(max_abs(hm - hm.adjoint()));
  }
  return out;
}

/// Five switch-time vectors spread evenly through each overlap dwell interval.
inline std::vector<std::vector<double>> default_tau_sweep(const SystemSpec& spec) {
  std::vector<PatchInterval> ivs = spec.curve.schedule;
  std::sort(ivs.begin(), ivs.end(), [](const auto& a, const auto& b) { return a.t_begin < b.t_begin; });
  if (ivs.size() < 2) return {};
  std::vector<std::vector<double>> out(5);
  for (std::size_t k = 0; k + 1 < ivs.size(); ++k) {
    const double lo = ivs[k + 1].t_begin, hi = ivs[k].t_end;
    for (int j = 0; j < 5; ++j) out[static_cast<std::size_t>(j)].push_back(lo + (hi - lo) * (j + 1) / 6.0);
  }
  return out;
}

struct CompareRow {
  std::string name;
  double discrepancy;
  double tolerance;
  bool pass() const { return discrepancy <= tolerance; }
};

struct TauSample {
  std::vector<double> taus;
  Vector endpoint;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::vector<TauSample> tau_table;
  std::string final_patch;

  bool pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass(); });
  }
};

inline constexpr double kCompareTolerance = 1e-6;

/// Same scenario in the eta-representation (switching psi) and the Hermitian
/// representation (switching Phi), plus a sweep of switch times.
inline CompareResult compare_scenario(const Scenario& s) {
  CompareResult out;
  const auto segments = plan_segments(s.spec, s.cfg.taus);
  out.final_patch = segments.back().patch;
  const double t1 = s.spec.curve.t_end;
  const MetricTrack last = patch_track(s.spec, out.final_patch);

  const auto eta_run = evolve_across_patches(s.spec, s.psi0, s.cfg.taus, s.cfg.stepper);
  const auto herm_run = evolve_across_patches_hermitian(s.spec, s.psi0, s.cfg.taus, s.cfg.stepper);
  const Vector mapped = map_state(last, t1, eta_run.final_state());
  out.rows.push_back({"eta_vs_hermitian_endpoint", (mapped - herm_run.final_state()).norm(), kCompareTolerance});

  if (segments.size() == 1) {
    const auto plain = evolve(local_hamiltonian(s.spec, out.final_patch).total_fn(), s.psi0, s.spec.curve.t_start, t1,
                              s.cfg.stepper);
    out.rows.push_back({"protocol_vs_plain_evolve", (plain.final_state() - eta_run.final_state()).norm(), 1e-9});
  }

  if (s.cfg.model == ModelKind::S2TwoLevel) {
    const auto closed = evolve_across_patches_hermitian(s.spec, s.psi0, s.cfg.taus, s.cfg.stepper,
                                                        s2::closed_form_provider(s.cfg.s2, s.spec.curve));
    out.rows.push_back(
        {"closed_form_vs_generic_h_endpoint", (closed.final_state() - herm_run.final_state()).norm(), kCompareTolerance});
  }

  const auto sweep = s.cfg.compare_taus.empty() ? default_tau_sweep(s.spec) : s.cfg.compare_taus;
  double spread = 0.0;
  for (const auto& taus : sweep) {
    const auto r = evolve_across_patches(s.spec, s.psi0, taus, s.cfg.stepper);
    for (const auto& prev : out.tau_table) spread = std::max(spread, (prev.endpoint - r.final_state()).norm());
    out.tau_table.push_back({taus, r.final_state()});
  }
  if (!sweep.empty()) out.rows.push_back({"tau_sweep_spread", spread, kCompareTolerance});
  return out;
}

}  // namespace covdyn::scenario
