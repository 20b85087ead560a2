#pragma once

// The invariant suite run by `check`: every structural property of the
// configured bundle, sampled at seeded random points and along the curve.

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "covdyn/scenario/scenario.hpp"

namespace covdyn::scenario {

struct InvariantRow {
  std::string name;
  int samples = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  bool trivial = false;  // the residual vanished identically, e.g. a constant metric
};

struct InvariantReport {
  std::vector<InvariantRow> rows;

  bool pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
  }
};

/// Uniform doubles in [0, 1) from the top 53 bits; portable across standard libraries.
class UnitSampler {
 public:
  explicit UnitSampler(std::uint64_t seed) : rng_(seed) {}
  double operator()() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double in(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

 private:
  std::mt19937_64 rng_;
};

namespace detail {

/// Accumulates a residual over samples; a thrown residual functor fails the row.
class RowBuilder {
 public:
  RowBuilder(std::string name, double tol) { row_.name = std::move(name), row_.tolerance = tol; }

  void add(double residual) {
    ++row_.samples;
    if (std::isnan(residual)) residual = std::numeric_limits<double>::infinity();
    row_.max_residual = std::max(row_.max_residual, residual);
  }

  InvariantRow finish() {
    row_.pass = row_.samples > 0 && row_.max_residual <= row_.tolerance;
    row_.trivial = row_.pass && row_.max_residual == 0.0;
    return row_;
  }

 private:
  InvariantRow row_;
};

inline void run_row(InvariantReport& report, const std::string& name, double tol, int n,
                    const std::function<double(int)>& residual) {
  RowBuilder b(name, tol);
  try {
    for (int i = 0; i < n; ++i) b.add(residual(i));
  } catch (const Error&) {
    b.add(std::numeric_limits<double>::infinity());
  }
  report.rows.push_back(b.finish());
}

inline double max_abs_list(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, max_abs(a[i] - b[i]));
  return worst;
}

// Scale fields vanish on the open patch boundaries, where eta degenerates;
// random points keep this distance from them.
inline constexpr double kBoundaryInset = 0.05;

/// Random base points inside one patch.
inline std::function<RealVector()> patch_sampler(const Scenario& s, const std::string& patch, UnitSampler& u) {
  if (s.cfg.model == ModelKind::S2TwoLevel) {
    const auto& a = s.cfg.s2.angles;
    const double margin = std::max(s.cfg.s2.pole_margin, 1e-3);
    const double inset = std::min(kBoundaryInset, 0.25 * (a.theta_plus - a.theta_minus));
    const double lo = patch == "plus" ? margin : a.theta_minus + inset;
    const double hi = patch == "plus" ? a.theta_plus - inset : s2::kPi - margin;
    return [&u, lo, hi] {
      RealVector r(2);
      r << u.in(lo, hi), u.in(0.0, 2 * s2::kPi);
      return r;
    };
  }
  const CurvePath curve = s.spec.curve;
  return [&u, curve] { return RealVector(curve.position(u.in(curve.t_start, curve.t_end))); };
}

inline std::function<RealVector()> overlap_sampler(const Scenario& s, UnitSampler& u) {
  const auto& a = s.cfg.s2.angles;
  const double inset = std::min(kBoundaryInset, 0.25 * (a.theta_plus - a.theta_minus));
  return [&u, lo = a.theta_minus + inset, hi = a.theta_plus - inset] {
    RealVector r(2);
    r << u.in(lo, hi), u.in(0.0, 2 * s2::kPi);
    return r;
  };
}

/// Times inside the scheduled intervals of `patch` (or the whole curve for a single patch).
/// Times on the segments the run actually spends in `patch`, so trajectory rows
/// never probe the degenerate edge of a patch that the switch protocol avoids.
inline std::function<double()> curve_time_sampler(const Scenario& s, const std::string& patch, UnitSampler& u) {
  std::vector<PatchSegment> segs;
  for (const auto& seg : plan_segments(s.spec, s.cfg.taus))
    if (seg.patch == patch) segs.push_back(seg);
  return [&u, segs] {
    const auto& seg = segs[std::min(segs.size() - 1, static_cast<std::size_t>(u() * static_cast<double>(segs.size())))];
    const double w = seg.t_end - seg.t_begin;
    return u.in(seg.t_begin + 1e-3 * w, seg.t_end - 1e-3 * w);
  };
}

inline std::vector<std::string> curve_patches(const Scenario& s) {
  std::vector<std::string> out;
  for (const auto& seg : plan_segments(s.spec, s.cfg.taus))
    if (std::find(out.begin(), out.end(), seg.patch) == out.end()) out.push_back(seg.patch);
  return out;
}

inline void bundle_checks(const Scenario& s, UnitSampler& u, InvariantReport& rep) {
  constexpr int kPoints = 100, kCurvature = 50;
  for (const auto& p : s.spec.patches) {
    auto sample = patch_sampler(s, p.id, u);
    run_row(rep, "metric_hermitian_positive_definite[" + p.id + "]", 1e-12, kPoints, [&](int) {
      const Matrix e = p.metric.eta_matrix(sample());
      return is_positive_definite(e) ? max_abs(e - e.adjoint()) : std::numeric_limits<double>::infinity();
    });
    run_row(rep, "rho_squared_is_eta[" + p.id + "]", 1e-10, kPoints, [&](int) {
      const MetricOperator e = p.metric.at(sample());
      return max_abs(e.rho() * e.rho() - e.eta()) / std::max(1.0, max_abs(e.eta()));
    });
    run_row(rep, "metric_compatibility[" + p.id + "]", 1e-8, kPoints,
            [&](int) { return check_metric_compatibility(p.connection, p.metric, sample()); });
    run_row(rep, "omega_pseudo_hermitian[" + p.id + "]", 1e-8, kPoints, [&](int) {
      const RealVector r = sample();
      const auto a = p.connection.at(r);
      const auto a0 = a_zero(p.metric, r);
      const MetricOperator e = p.metric.at(r);
      double worst = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k)
        worst = std::max(worst, pseudo_hermiticity_residual(a[k] - a0[k], e));
      return worst;
    });
    run_row(rep, "a0_curvature_half_exterior_derivative[" + p.id + "]", 1e-6, kCurvature, [&](int) {
      const RealVector r = sample();
      const ConnectionForm a0 = a_zero_form(p.metric);
      const auto f = curvature(a0, r);
      const auto d = exterior_derivative(a0, r);
      double worst = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < f.size(); ++j) worst = std::max(worst, max_abs(f[i][j] - 0.5 * d[i][j]));
      return worst;
    });
  }

  for (const auto& g : s.spec.transitions) {
    if (s.cfg.model != ModelKind::S2TwoLevel) break;
    auto sample = overlap_sampler(s, u);
    const auto& from = s.spec.patch(g.from_patch);
    const auto& to = s.spec.patch(g.to_patch);
    const std::string tag = "[" + g.from_patch + "->" + g.to_patch + "]";
    run_row(rep, "transition_metric_consistency" + tag, 1e-10, kPoints, [&](int) {
      const RealVector r = sample();
      return max_abs(tilde_eta(g, from.metric, r) - to.metric.eta_matrix(r));
    });
    run_row(rep, "big_g_unitarity" + tag, 1e-10, kPoints, [&](int) {
      const Matrix bg = big_g(from.metric, to.metric, g, sample());
      return max_abs(bg.adjoint() * bg - identity(bg.rows()));
    });
    run_row(rep, "energy_section_compatibility" + tag, 1e-8, kPoints, [&](int) {
      return check_section_compatibility(s.spec.energy, g, from.metric, to.metric, {sample()});
    });
    run_row(rep, "connection_gauge_covariance" + tag, 1e-7, kPoints, [&](int) {
      const RealVector r = sample();
      return max_abs_list(gauge_transform_connection(from.connection, g, r), to.connection.at(r));
    });
  }
}

inline void curve_checks(const Scenario& s, UnitSampler& u, InvariantReport& rep) {
  constexpr int kTimes = 100;
  for (const auto& patch : curve_patches(s)) {
    auto when = curve_time_sampler(s, patch, u);
    const auto ham = local_hamiltonian(s.spec, patch);
    const MetricTrack track = patch_track(s.spec, patch);
    const std::string tag = "[" + patch + "]";
    run_row(rep, "no_go_relation" + tag, 1e-8, kTimes, [&](int) {
      const double t = when();
      return no_go_residual(ham.total(t), track.at(t), track.eta_dot(t));
    });
    run_row(rep, "energy_pseudo_hermitian" + tag, 1e-10, kTimes, [&](int) {
      const double t = when();
      return pseudo_hermiticity_residual(ham.energy(t), track.at(t));
    });
    run_row(rep, "hermitian_representation_is_hermitian" + tag, 1e-8, kTimes, [&](int) {
      const double t = when();
      const Matrix h = hermitian_representation(ham.total(t), track, t);
      return max_abs(h - h.adjoint());
    });
    run_row(rep, "hermitian_representation_ph_form" + tag, 1e-8, kTimes, [&](int) {
      const double t = when();
      const Matrix H = ham.total(t);
      return max_abs(hermitian_representation(H, track, t) - hermitian_representation_ph(H, track, t));
    });
    if (s.cfg.model == ModelKind::S2TwoLevel) {
      const auto closed = s2::closed_form_provider(s.cfg.s2, s.spec.curve)(patch);
      run_row(rep, "closed_form_h_matches_generic" + tag, 1e-7, kTimes, [&](int) {
        const double t = when();
        return max_abs(closed(t) - hermitian_representation(ham.total(t), track, t));
      });
    }
  }

  const auto run = run_scenario(s);
  RowBuilder drift("eta_norm_conservation", 1e-6);
  for (std::size_t i = 0; i < run.evolution.eta_norm.size(); ++i) {
    const double n0 = run.evolution.eta_norm.front();
    drift.add(std::abs(run.evolution.eta_norm[i] * run.evolution.eta_norm[i] - n0 * n0) / (n0 * n0));
  }
  rep.rows.push_back(drift.finish());
}

inline void s2_checks(const Scenario& s, UnitSampler& u, InvariantReport& rep) {
  const s2::Model& m = s.cfg.s2;
  auto overlap = overlap_sampler(s, u);
  run_row(rep, "gamma_minus_conjugation_identity", 1e-12, 1000, [&](int) {
    const RealVector r = overlap();
    const Matrix bg = s2::big_g_s2(r(0), r(1));
    const auto gm = s2::gamma_forms(r(0), r(1)).minus;
    const auto refl = s2::gamma_plus_reflected(r(0), r(1));
    return std::max(max_abs(bg.adjoint() * gm[0] * bg + refl[0]), max_abs(bg.adjoint() * gm[1] * bg + refl[1]));
  });
  run_row(rep, "energy_matrix_overlap_conjugation", 1e-10, 100, [&](int) {
    const RealVector r = overlap();
    const Matrix bg = s2::big_g_s2(r(0), r(1));
    return max_abs(s2::energy_matrix(m, {r(0), r(1), s2::Patch::Minus}) -
                   bg.adjoint() * s2::energy_matrix(m, {r(0), r(1), s2::Patch::Plus}) * bg);
  });
  for (s2::Patch p : {s2::Patch::Plus, s2::Patch::Minus}) {
    const std::string name = s2::patch_name(p);
    auto sample = patch_sampler(s, name, u);
    const MetricField metric = s2::metric_field(m, p);
    run_row(rep, "closed_form_a0_matches_generic[" + name + "]", 1e-7, 100, [&](int) {
      const RealVector r = sample();
      const auto closed = s2::a_zero_s2(m, s2::to_point(r, p));
      MetricField numeric = metric;
      numeric.partials_fn.reset();
      return max_abs_list({closed[0], closed[1]}, a_zero(numeric, r));
    });
    run_row(rep, "closed_form_h_rho_matches_commutator[" + name + "]", 1e-7, 100, [&](int) {
      const RealVector r = sample();
      const s2::Velocity v{u.in(-1.0, 1.0), u.in(-1.0, 1.0)};
      const MetricOperator e = metric.at(r);
      const auto parts = metric.partials(r);
      const Matrix eta_dot = v.theta_dot * parts[0] + v.phi_dot * parts[1];
      const Matrix rho_dot = solve_anticommutator(e.rho(), eta_dot);
      return max_abs(s2::h_rho_terms(m, s2::to_point(r, p), v) - (0.5 * kI) * commutator(rho_dot, e.rho_inv()));
    });
    s2::Model other = m;
    other.scales = m.scales.name == "modulated" ? s2::default_scales(m.angles) : s2::modulated_scales(m.angles);
    run_row(rep, "generic_h_scale_independent[" + name + "]", 1e-10, 100, [&](int) {
      const s2::S2Point pt = s2::to_point(sample(), p);
      const s2::Velocity v{u.in(-1.0, 1.0), u.in(-1.0, 1.0)};
      return max_abs(s2::generic_hermitian_hamiltonian(m, pt, v) - s2::generic_hermitian_hamiltonian(other, pt, v));
    });
  }
  run_row(rep, "transition_partials_match_differences", 1e-6, 100, [&](int) {
    const RealVector r = overlap();
    TransitionFunctionField g = s2::transition_field(m);
    const auto exact = g.partials(r);
    g.partials_fn.reset();
    return max_abs_list(exact, g.partials(r));
  });
  run_row(rep, "pole_chart_limit", 1e-10, 100, [&](int) {
    const double phi = u.in(0.0, 2 * s2::kPi), theta = u.in(1e-12, 5e-11);
    const auto dx = s2::dx_hat(theta, phi), xdx = s2::x_cross_dx(theta, phi);
    const auto dx_c = s2::to_pole_chart(theta, phi, dx[0], dx[1]);
    const auto xdx_c = s2::to_pole_chart(theta, phi, xdx[0], xdx[1]);
    const double err = std::max({(dx_c[0] - Vec3(1, 0, 0)).norm(), (dx_c[1] - Vec3(0, 1, 0)).norm(),
                                 (xdx_c[0] - Vec3(0, 1, 0)).norm(), (xdx_c[1] - Vec3(-1, 0, 0)).norm()});
    return err;  // O(theta) along the ray
  });
}

}  // namespace detail

inline InvariantReport check_scenario(const Scenario& s) {
  UnitSampler u(s.cfg.seed);
  InvariantReport rep;
  detail::bundle_checks(s, u, rep);
  detail::curve_checks(s, u, rep);
  if (s.cfg.model == ModelKind::S2TwoLevel) detail::s2_checks(s, u, rep);
  return rep;
}

}  // namespace covdyn::scenario
