#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covdyn/metric.hpp"
#include "covdyn/ode.hpp"
#include "covdyn/transition.hpp"

namespace covdyn {

/// Matrix-valued one-form A = sum_a A_a dR^a over one patch.
struct ConnectionForm {
  std::string patch_id;
  Eigen::Index dim = 0;
  Domain domain = whole_space();
  MatrixListField components_fn;

  std::vector<Matrix> at(const RealVector& r) const {
    if (!domain(r)) throw Error(ErrorKind::OutOfPatch, "point outside patch '" + patch_id + "'");
    auto comps = components_fn(r);
    if (static_cast<Eigen::Index>(comps.size()) != r.size())
      throw Error(ErrorKind::DimMismatch, "connection has " + std::to_string(comps.size()) +
                                              " components for a " + std::to_string(r.size()) +
                                              "-dimensional base");
    for (const auto& c : comps)
      if (c.rows() != dim || c.cols() != dim)
        throw Error(ErrorKind::DimMismatch, "connection component has wrong fiber dimension");
    return comps;
  }

  /// sum_a v^a A_a[R].
  Matrix contract(const RealVector& r, const RealVector& v) const {
    Matrix out = Matrix::Zero(dim, dim);
    if (v.isZero(0.0)) return out;
    const auto comps = at(r);
    for (Eigen::Index a = 0; a < v.size(); ++a)
      if (v(a) != 0.0) out += v(a) * comps[static_cast<std::size_t>(a)];
    return out;
  }
};

struct PatchInterval {
  double t_begin = 0.0;
  double t_end = 0.0;
  std::string patch_id;
};

/// t -> R(t) with velocity and the time intervals spent in each patch.
/// Intervals for different patches may overlap where the patches do.
struct CurvePath {
  double t_start = 0.0;
  double t_end = 1.0;
  std::function<RealVector(double)> position;
  std::function<RealVector(double)> velocity;
  std::vector<PatchInterval> schedule;

  /// True if [t0, t1] lies within one scheduled interval of `patch`.
  /// An empty schedule places no constraint.
  bool segment_in_patch(double t0, double t1, const std::string& patch) const {
    if (schedule.empty()) return true;
    const double lo = std::min(t0, t1), hi = std::max(t0, t1);
    const double slack = 1e-12 * std::max(1.0, std::abs(t_end - t_start));
    for (const auto& iv : schedule)
      if (iv.patch_id == patch && lo >= iv.t_begin - slack && hi <= iv.t_end + slack) return true;
    return false;
  }
};

/// Same traced path, new time parameter: R'(t) = R(s(t)), with s monotone.
inline CurvePath reparametrize(const CurvePath& path, std::function<double(double)> s,
                               std::function<double(double)> s_dot,
                               std::function<double(double)> s_inv) {
  CurvePath out;
  out.t_start = s_inv(path.t_start);
  out.t_end = s_inv(path.t_end);
  out.position = [p = path.position, s](double t) { return p(s(t)); };
  out.velocity = [v = path.velocity, s, s_dot](double t) { return RealVector(v(s(t)) * s_dot(t)); };
  for (const auto& iv : path.schedule) {
    double b = s_inv(iv.t_begin), e = s_inv(iv.t_end);
    if (b > e) std::swap(b, e);
    out.schedule.push_back({b, e, iv.patch_id});
  }
  return out;
}

/// The path traced backwards over the same time window.
inline CurvePath reversed(const CurvePath& path) {
  const double a = path.t_start, b = path.t_end;
  return reparametrize(
      path, [a, b](double t) { return a + b - t; }, [](double) { return -1.0; },
      [a, b](double t) { return a + b - t; });
}

struct TransportResult {
  std::vector<double> times;
  std::vector<Matrix> G;
  std::optional<std::vector<Vector>> psi;

  const Matrix& final_operator() const { return G.back(); }
};

/// Components -(i/2) eta^-1 d_a eta.
inline std::vector<Matrix> a_zero(const MetricField& metric, const RealVector& r) {
  const Matrix eta_inv = metric.at(r).eta_inv();
  auto parts = metric.partials(r);
  for (auto& p : parts) p = (-0.5 * kI) * (eta_inv * p);
  return parts;
}

inline ConnectionForm a_zero_form(const MetricField& metric) {
  ConnectionForm a;
  a.patch_id = metric.patch_id;
  a.dim = metric.dim;
  a.domain = metric.domain;
  a.components_fn = [metric](const RealVector& r) { return a_zero(metric, r); };
  return a;
}

/// A = A0 + omega. omega must be eta-pseudo-Hermitian at every sample.
inline ConnectionForm assemble_connection(const ConnectionForm& a0, const ConnectionForm& omega,
                                          const MetricField& metric,
                                          const std::vector<RealVector>& samples, double tol = 1e-8) {
  if (a0.dim != omega.dim || a0.dim != metric.dim)
    throw Error(ErrorKind::DimMismatch, "assemble_connection: fiber dimensions differ");
  for (const auto& r : samples) {
    const MetricOperator eta = metric.at(r);
    const auto w = omega.at(r);
    for (std::size_t a = 0; a < w.size(); ++a) {
      const double res = pseudo_hermiticity_residual(w[a], eta);
      if (res > tol) {
        std::string where;
        for (Eigen::Index k = 0; k < r.size(); ++k) where += (k ? "," : "") + std::to_string(r(k));
        throw Error(ErrorKind::OmegaNotPseudoHermitian,
                    "component " + std::to_string(a) + " at R=(" + where + ") residual " +
                        std::to_string(res));
      }
    }
  }
  ConnectionForm out;
  out.patch_id = a0.patch_id;
  out.dim = a0.dim;
  out.domain = [d0 = a0.domain, d1 = omega.domain](const RealVector& r) { return d0(r) && d1(r); };
  out.components_fn = [a0, omega](const RealVector& r) {
    auto c = a0.at(r);
    const auto w = omega.at(r);
    for (std::size_t a = 0; a < c.size(); ++a) c[a] += w[a];
    return c;
  };
  return out;
}

/// max_a |A_a^dagger - eta A_a eta^-1 - i (d_a eta) eta^-1|.
inline double check_metric_compatibility(const ConnectionForm& A, const MetricField& metric,
                                         const RealVector& r) {
  const MetricOperator eta = metric.at(r);
  const auto comps = A.at(r);
  const auto d_eta = metric.partials(r);
  double worst = 0.0;
  for (std::size_t a = 0; a < comps.size(); ++a) {
    const Matrix res = comps[a].adjoint() - eta.eta() * comps[a] * eta.eta_inv() -
                       kI * d_eta[a] * eta.eta_inv();
    worst = std::max(worst, max_abs(res));
  }
  return worst;
}

/// G(t) solving i dG/dt = (sum_a Rdot^a A_a) G with G(t0) = I.
inline TransportResult transport_operator(const ConnectionForm& A, const CurvePath& path, double t0,
                                          double t1, const StepperConfig& stepper = {}) {
  if (!path.segment_in_patch(t0, t1, A.patch_id))
    throw Error(ErrorKind::PatchBoundaryCrossed, "segment [" + std::to_string(t0) + ", " +
                                                     std::to_string(t1) + "] leaves patch '" +
                                                     A.patch_id + "'");
  auto generator = [&](double t) {
    try {
      return A.contract(path.position(t), path.velocity(t));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::OutOfPatch)
        throw Error(ErrorKind::PatchBoundaryCrossed, "at t=" + std::to_string(t) + ": " + e.what());
      throw;
    }
  };
  TransportResult out;
  integrate_schrodinger(generator, identity(A.dim), t0, t1, stepper, [&](double t, const Matrix& g) {
    out.times.push_back(t);
    out.G.push_back(g);
  });
  return out;
}

/// psi(t) = G(t) psi0 along the whole path.
inline TransportResult parallel_transport(const ConnectionForm& A, const CurvePath& path,
                                          const Vector& psi0, const StepperConfig& stepper = {}) {
  if (psi0.size() != A.dim) throw Error(ErrorKind::DimMismatch, "parallel_transport: state dimension");
  TransportResult out = transport_operator(A, path, path.t_start, path.t_end, stepper);
  std::vector<Vector> psi;
  psi.reserve(out.G.size());
  for (const auto& g : out.G) psi.emplace_back(g * psi0);
  out.psi = std::move(psi);
  return out;
}

namespace detail {

inline std::vector<std::vector<Matrix>> connection_partials(const ConnectionForm& A, const RealVector& r,
                                                            double h) {
  // d[a][b] = d_a A_b
  std::vector<std::vector<Matrix>> d;
  for (Eigen::Index a = 0; a < r.size(); ++a) {
    RealVector rp = r, rm = r;
    rp(a) += h;
    rm(a) -= h;
    const auto cp = A.at(rp), cm = A.at(rm);
    std::vector<Matrix> row;
    for (std::size_t b = 0; b < cp.size(); ++b) row.push_back((cp[b] - cm[b]) / (2.0 * h));
    d.push_back(std::move(row));
  }
  return d;
}

}  // namespace detail

/// Exterior derivative (dA)_{ab} = d_a A_b - d_b A_a by central differences
/// with one Richardson refinement.
inline std::vector<std::vector<Matrix>> exterior_derivative(const ConnectionForm& A, const RealVector& r,
                                                            double fd_step = 1e-4) {
  const auto coarse = detail::connection_partials(A, r, fd_step);
  const auto fine = detail::connection_partials(A, r, 0.5 * fd_step);
  const auto n = static_cast<std::size_t>(r.size());
  std::vector<std::vector<Matrix>> out(n, std::vector<Matrix>(n, Matrix::Zero(A.dim, A.dim)));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const Matrix dc = coarse[a][b] - coarse[b][a];
      const Matrix df = fine[a][b] - fine[b][a];
      out[a][b] = (4.0 * df - dc) / 3.0;
    }
  return out;
}

/// F_{ab} = d_a A_b - d_b A_a + i [A_a, A_b].
inline std::vector<std::vector<Matrix>> curvature(const ConnectionForm& A, const RealVector& r,
                                                  double fd_step = 1e-4) {
  auto f = exterior_derivative(A, r, fd_step);
  const auto comps = A.at(r);
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t b = 0; b < f.size(); ++b)
      if (a != b) f[a][b] += kI * commutator(comps[a], comps[b]);
  return f;
}

/// A~_a = g^-1 A_a g - i g^-1 d_a g.
inline std::vector<Matrix> gauge_transform_connection(const ConnectionForm& A,
                                                      const TransitionFunctionField& g,
                                                      const RealVector& r) {
  const Matrix gm = g.at(r);
  const Matrix gi = gm.inverse();
  const auto dg = g.partials(r);
  auto comps = A.at(r);
  for (std::size_t a = 0; a < comps.size(); ++a) comps[a] = gi * comps[a] * gm - kI * gi * dg[a];
  return comps;
}

}  // namespace covdyn
