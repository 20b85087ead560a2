#pragma once

// Curves on the sphere and the wiring of the closed-form model into the
// generic bundle layer.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "covdyn/bundle.hpp"
#include "covdyn/s2_model.hpp"

namespace covdyn::s2 {

enum class CurveKind { Circle, Meridian, GreatCircle, Waypoints };
enum class Reparam { Linear, Quadratic };

/// Circle: theta = theta0, phi from phi0 to phi1.
/// Meridian: phi = phi0, theta from theta0 to theta1.
/// GreatCircle: circle tilted by `inclination` from the equator, arc parameter phi0 to phi1;
///   the arc parameter pi/2 is its northernmost point.
/// Waypoints: Catmull-Rom spline through (theta, phi) pairs.
struct CurveSpec {
  CurveKind kind = CurveKind::Circle;
  double theta0 = kPi / 2, theta1 = kPi / 2;
  double phi0 = 0.0, phi1 = 2 * kPi;
  double inclination = 1.2;
  std::vector<std::array<double, 2>> waypoints;
  double t_start = 0.0, t_end = 1.0;
  Reparam reparam = Reparam::Linear;
  Patch start_patch = Patch::Plus;
};

namespace detail {

struct Sample {
  RealVector r;
  RealVector dr;  // derivative with respect to the unit shape parameter
};

inline double wrap_pi(double a) { return std::remainder(a, 2 * kPi); }

inline Sample shape(const CurveSpec& c, double u) {
  RealVector r(2), dr(2);
  switch (c.kind) {
    case CurveKind::Circle:
      r << c.theta0, c.phi0 + (c.phi1 - c.phi0) * u;
      dr << 0.0, c.phi1 - c.phi0;
      break;
    case CurveKind::Meridian:
      r << c.theta0 + (c.theta1 - c.theta0) * u, c.phi0;
      dr << c.theta1 - c.theta0, 0.0;
      break;
    case CurveKind::GreatCircle: {
      const double s = c.phi0 + (c.phi1 - c.phi0) * u, sd = c.phi1 - c.phi0;
      const double ci = std::cos(c.inclination), si = std::sin(c.inclination);
      const Vec3 p(std::cos(s), std::sin(s) * ci, std::sin(s) * si);
      const Vec3 v = Vec3(-std::sin(s), std::cos(s) * ci, std::cos(s) * si) * sd;
      const double rho2 = p.x() * p.x() + p.y() * p.y();
      r << std::acos(std::clamp(p.z(), -1.0, 1.0)), s + wrap_pi(std::atan2(p.y(), p.x()) - s);
      dr << -v.z() / std::sqrt(rho2), (p.x() * v.y() - p.y() * v.x()) / rho2;
      break;
    }
    case CurveKind::Waypoints: {
      const auto& w = c.waypoints;
      const std::size_t n = w.size();
      const double x = std::clamp(u, 0.0, 1.0) * static_cast<double>(n - 1);
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(x), n - 2);
      const double tau = x - static_cast<double>(k);
      auto pt = [&](std::size_t i) { return Eigen::Vector2d(w[i][0], w[i][1]); };
      auto tangent = [&](std::size_t i) {
        if (i == 0) return Eigen::Vector2d(pt(1) - pt(0));
        if (i == n - 1) return Eigen::Vector2d(pt(n - 1) - pt(n - 2));
        return Eigen::Vector2d(0.5 * (pt(i + 1) - pt(i - 1)));
      };
      const double t2 = tau * tau, t3 = t2 * tau;
      const Eigen::Vector2d p = (2 * t3 - 3 * t2 + 1) * pt(k) + (t3 - 2 * t2 + tau) * tangent(k) +
                                (-2 * t3 + 3 * t2) * pt(k + 1) + (t3 - t2) * tangent(k + 1);
      const Eigen::Vector2d d = (6 * t2 - 6 * tau) * pt(k) + (3 * t2 - 4 * tau + 1) * tangent(k) +
                                (-6 * t2 + 6 * tau) * pt(k + 1) + (3 * t2 - 2 * tau) * tangent(k + 1);
      r = p;
      dr = d * static_cast<double>(n - 1);
      break;
    }
  }
  return {r, dr};
}

inline std::vector<PatchInterval> membership(const CurvePath& path, const std::string& id,
                                             const std::function<bool(double)>& inside) {
  constexpr int kGrid = 4000;
  const double t0 = path.t_start, t1 = path.t_end;
  auto at = [&](int i) { return t0 + (t1 - t0) * static_cast<double>(i) / kGrid; };
  auto member = [&](double t) { return inside(path.position(t)(0)); };
  // Bisect to the last point still inside, between an inside and an outside time.
  auto edge = [&](double in, double out) {
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (in + out);
      (member(mid) ? in : out) = mid;
    }
    return in;
  };
  std::vector<PatchInterval> out;
  bool open = false;
  double begin = t0;
  for (int i = 0; i <= kGrid; ++i) {
    const double t = at(i);
    const bool m = member(t);
    if (m && !open) {
      begin = i == 0 ? t0 : edge(t, at(i - 1));
      open = true;
    } else if (!m && open) {
      out.push_back({begin, edge(at(i - 1), t), id});
      open = false;
    }
  }
  if (open) out.push_back({begin, t1, id});
  return out;
}

}  // namespace detail

/// Curve with velocity, validated against the pole margin, and its patch schedule.
/// Patch intervals contained in another patch's interval are dropped, so a curve that
/// stays in the overlap runs in `start_patch` alone.
inline CurvePath make_curve(const Model& m, const CurveSpec& c) {
  if (!(c.t_end > c.t_start)) throw Error(ErrorKind::ConfigError, "curve needs t_end > t_start");
  if (c.kind == CurveKind::Waypoints && c.waypoints.size() < 2)
    throw Error(ErrorKind::ConfigError, "waypoint curve needs at least two waypoints");
  if (c.kind == CurveKind::GreatCircle && !(c.inclination > 0.0 && c.inclination < kPi / 2))
    throw Error(ErrorKind::ConfigError, "great-circle inclination must lie in (0, pi/2)");
  const double t0 = c.t_start, span = c.t_end - c.t_start;
  const bool quad = c.reparam == Reparam::Quadratic;
  CurvePath path;
  path.t_start = c.t_start;
  path.t_end = c.t_end;
  path.position = [c, t0, span, quad](double t) {
    const double x = (t - t0) / span;
    return detail::shape(c, quad ? x * x : x).r;
  };
  path.velocity = [c, t0, span, quad](double t) {
    const double x = (t - t0) / span;
    const double u = quad ? x * x : x, du = quad ? 2 * x / span : 1.0 / span;
    return RealVector(detail::shape(c, u).dr * du);
  };

  constexpr int kCheck = 4000;
  for (int i = 0; i <= kCheck; ++i) {
    const double t = t0 + span * i / kCheck;
    const double th = path.position(t)(0);
    if (!(th >= m.pole_margin && th <= kPi - m.pole_margin))
      throw Error(ErrorKind::CurveTouchesPoleMargin,
                  "theta=" + std::to_string(th) + " at t=" + std::to_string(t) + " is within the pole margin");
  }

  auto plus = detail::membership(path, "plus", [a = m.angles](double th) { return a.in_plus(th); });
  auto minus = detail::membership(path, "minus", [a = m.angles](double th) { return a.in_minus(th); });
  std::vector<PatchInterval> all = plus;
  all.insert(all.end(), minus.begin(), minus.end());
  const std::string preferred = patch_name(c.start_patch);
  std::vector<PatchInterval> kept;
  for (std::size_t i = 0; i < all.size(); ++i) {
    bool redundant = false;
    for (std::size_t j = 0; j < all.size() && !redundant; ++j) {
      if (i == j || all[i].patch_id == all[j].patch_id) continue;
      const bool inside = all[j].t_begin <= all[i].t_begin && all[i].t_end <= all[j].t_end;
      const bool equal = all[j].t_begin == all[i].t_begin && all[i].t_end == all[j].t_end;
      redundant = inside && (!equal || all[i].patch_id != preferred);
    }
    if (!redundant) kept.push_back(all[i]);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.t_begin < b.t_begin; });
  path.schedule = kept;
  return path;
}

inline S2Point to_point(const RealVector& r, Patch p) { return {r(0), r(1), p}; }

inline MetricField metric_field(const Model& m, Patch p) {
  MetricField f;
  f.patch_id = patch_name(p);
  f.dim = 2;
  f.domain = [a = m.angles, p](const RealVector& r) { return a.contains(p, r(0)); };
  f.eta_fn = [m, p](const RealVector& r) { return eta(m, to_point(r, p)); };
  f.partials_fn = MatrixListField([m, p](const RealVector& r) { return eta_partials(m, to_point(r, p)); });
  return f;
}

inline TransitionFunctionField transition_field(const Model& m) {
  TransitionFunctionField g;
  g.from_patch = "plus";
  g.to_patch = "minus";
  g.dim = 2;
  g.overlap = [a = m.angles](const RealVector& r) { return a.in_overlap(r(0)); };
  g.g_fn = [m](const RealVector& r) { return transition_g(m, r(0), r(1)); };
  g.partials_fn = MatrixListField([m](const RealVector& r) { return transition_g_partials(m, r(0), r(1)); });
  return g;
}

inline ConnectionForm a_zero_closed_form(const Model& m, Patch p) {
  ConnectionForm a;
  a.patch_id = patch_name(p);
  a.dim = 2;
  a.domain = [a = m.angles, p](const RealVector& r) { return a.contains(p, r(0)); };
  a.components_fn = [m, p](const RealVector& r) {
    const auto f = a_zero_s2(m, to_point(r, p));
    return std::vector<Matrix>{f[0], f[1]};
  };
  return a;
}

/// omega = rho^-1 omega_H rho, optionally spoiled by i*kick*I on the phi component.
inline ConnectionForm omega_field(const Model& m, Patch p, double kick = 0.0) {
  ConnectionForm w;
  w.patch_id = patch_name(p);
  w.dim = 2;
  w.domain = [a = m.angles, p](const RealVector& r) { return a.contains(p, r(0)); };
  w.components_fn = [m, p, kick](const RealVector& r) {
    const S2Point pt = to_point(r, p);
    const MetricOperator e(eta(m, pt));
    const auto f = omega_h(m, pt);
    Matrix wphi = dehermitize(f[1], e);
    if (kick != 0.0) wphi += kI * kick * identity(2);
    return std::vector<Matrix>{dehermitize(f[0], e), wphi};
  };
  return w;
}

struct BuildOptions {
  /// Adds a non-pseudo-Hermitian term to omega for negative-control runs.
  bool inject_non_pseudo_hermitian_omega = false;
};

/// The model as generic bundle data along a curve.
inline SystemSpec build_system(const Model& m, const CurveSpec& c, const BuildOptions& opts = {}) {
  m.angles.validate();
  SystemSpec spec;
  spec.curve = make_curve(m, c);
  const double kick = opts.inject_non_pseudo_hermitian_omega ? 0.1 : 0.0;
  for (Patch p : {Patch::Plus, Patch::Minus}) {
    const MetricField metric = metric_field(m, p);
    std::vector<RealVector> samples;
    if (kick == 0.0) {
      for (const auto& iv : spec.curve.schedule) {
        if (iv.patch_id != patch_name(p)) continue;
        for (int k = 1; k < 8; ++k) samples.push_back(spec.curve.position(iv.t_begin + (iv.t_end - iv.t_begin) * k / 8.0));
      }
    }
    spec.patches.push_back({patch_name(p), metric,
                            assemble_connection(a_zero_closed_form(m, p), omega_field(m, p, kick), metric, samples)});
  }
  spec.transitions.push_back(transition_field(m));
  spec.energy.authoring_patch = "plus";
  for (Patch p : {Patch::Plus, Patch::Minus})
    spec.energy.hermitian_form[patch_name(p)] = [m, p](const RealVector& r) { return energy_matrix(m, to_point(r, p)); };
  return spec;
}

/// rho H rho^-1 + i rho-dot rho^-1 at one point and velocity, built from the
/// generic pieces: A0 from the metric partials, omega, and H_E = rho^-1 h_E rho.
inline Matrix generic_hermitian_hamiltonian(const Model& m, const S2Point& pt, const Velocity& v) {
  RealVector r(2), rd(2);
  r << pt.theta, pt.phi;
  rd << v.theta_dot, v.phi_dot;
  const MetricField metric = metric_field(m, pt.patch);
  const MetricOperator e = metric.at(r);
  const auto parts = metric.partials(r);
  const Matrix eta_dot = rd(0) * parts[0] + rd(1) * parts[1];
  const Matrix H = a_zero_form(metric).contract(r, rd) + omega_field(m, pt.patch).contract(r, rd) +
                   dehermitize(energy_matrix(m, pt), e);
  const Matrix rho_dot = solve_anticommutator(e.rho(), eta_dot);
  return e.rho() * H * e.rho_inv() + kI * rho_dot * e.rho_inv();
}

/// Closed-form Hermitian Hamiltonian along the curve, per patch.
inline HermitianProvider closed_form_provider(const Model& m, const CurvePath& curve) {
  return [m, curve](const std::string& patch) -> TimeMatrix {
    const Patch p = patch == "plus" ? Patch::Plus : Patch::Minus;
    return [m, curve, p](double t) {
      const RealVector r = curve.position(t), v = curve.velocity(t);
      return hermitian_hamiltonian(m, to_point(r, p), {v(0), v(1)});
    };
  };
}

}  // namespace covdyn::s2
