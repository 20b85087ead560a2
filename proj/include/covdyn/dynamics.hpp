#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covdyn/connection.hpp"
#include "covdyn/metric.hpp"
#include "covdyn/ode.hpp"

namespace covdyn {

using TimeMatrix = std::function<Matrix(double)>;

/// eta(t) along a curve together with its time derivative.
struct MetricTrack {
  std::function<MetricOperator(double)> at;
  std::optional<TimeMatrix> eta_dot_fn;
  double fd_step = 1e-6;

  Matrix eta_dot(double t) const {
    if (eta_dot_fn) return (*eta_dot_fn)(t);
    return (at(t + fd_step).eta() - at(t - fd_step).eta()) / (2.0 * fd_step);
  }

  /// rho-dot from rho X + X rho = eta-dot.
  Matrix rho_dot(double t) const { return solve_anticommutator(at(t).rho(), eta_dot(t)); }
};

inline MetricTrack constant_track(const MetricOperator& eta) {
  const Eigen::Index n = eta.dim();
  return {[eta](double) { return eta; }, TimeMatrix([n](double) { return zeros(n); })};
}

/// eta(t) = eta[R(t)], eta-dot by the chain rule sum_a (d_a eta) Rdot^a.
inline MetricTrack track_metric(const MetricField& metric, const CurvePath& path) {
  MetricTrack track;
  track.at = [metric, pos = path.position](double t) { return metric.at(pos(t)); };
  track.eta_dot_fn = TimeMatrix([metric, pos = path.position, vel = path.velocity](double t) {
    const RealVector r = pos(t), v = vel(t);
    Matrix out = zeros(metric.dim);
    if (v.isZero(0.0)) return out;
    const auto parts = metric.partials(r);
    for (Eigen::Index a = 0; a < v.size(); ++a) out += v(a) * parts[static_cast<std::size_t>(a)];
    return out;
  });
  return track;
}

struct HamiltonianDecomposition {
  TimeMatrix geometric;  // H_A
  TimeMatrix energy;     // H_E

  Matrix total(double t) const { return geometric(t) + energy(t); }
  TimeMatrix total_fn() const {
    return [g = geometric, e = energy](double t) { return Matrix(g(t) + e(t)); };
  }
};

/// H_A(t) = sum_a Rdot^a(t) A_a[R(t)]; zero when the path is at rest.
inline Matrix geometric_hamiltonian(const ConnectionForm& A, const CurvePath& path, double t) {
  return A.contract(path.position(t), path.velocity(t));
}

struct GeometricSplit {
  Matrix metric_part;  // H_{A0} = -(i/2) eta^-1 eta-dot
  Matrix omega_part;   // H_omega = H_A - H_{A0}
};

inline GeometricSplit split_geometric(const Matrix& h_a, const MetricOperator& eta, const Matrix& eta_dot) {
  require_same_dim(h_a, eta_dot, "split_geometric");
  Matrix a0 = (-0.5 * kI) * (eta.eta_inv() * eta_dot);
  Matrix w = h_a - a0;
  return {std::move(a0), std::move(w)};
}

/// |H^dagger - eta H eta^-1 - i eta-dot eta^-1|; zero for every compatible generator.
inline double no_go_residual(const Matrix& h, const MetricOperator& eta, const Matrix& eta_dot) {
  return max_abs(h.adjoint() - eta.eta() * h * eta.eta_inv() - kI * eta_dot * eta.eta_inv());
}

struct EvolutionResult {
  std::vector<double> times;
  std::vector<Vector> psi;
  std::vector<double> eta_norm;
  std::vector<double> energy_expect;  // empty when no energy operator is supplied
  std::vector<std::string> patch_trace;
  std::vector<double> switch_times;
  std::vector<double> switch_jumps;  // Euclidean jump of the recorded state at each switch

  const Vector& final_state() const { return psi.back(); }

  /// max_t | <psi,psi>_eta(t) - <psi,psi>_eta(t_0) |.
  double max_norm_drift() const {
    double worst = 0.0;
    if (eta_norm.empty()) return worst;
    const double ref = eta_norm.front() * eta_norm.front();
    for (double n : eta_norm) worst = std::max(worst, std::abs(n * n - ref));
    return worst;
  }

  void append(EvolutionResult&& other, bool skip_first) {
    const std::size_t start = skip_first ? 1 : 0;
    for (std::size_t i = start; i < other.times.size(); ++i) {
      times.push_back(other.times[i]);
      psi.push_back(std::move(other.psi[i]));
      eta_norm.push_back(other.eta_norm[i]);
      if (!other.energy_expect.empty()) energy_expect.push_back(other.energy_expect[i]);
      patch_trace.push_back(other.patch_trace[i]);
    }
  }
};

struct EvolveOptions {
  std::function<MetricOperator(double)> metric;  // defaults to the identity metric
  TimeMatrix energy;                             // optional H_E for expectation values
  std::string patch_id = "single";
};

inline double energy_expectation(const MetricOperator& eta, const Matrix& h_e, const Vector& psi) {
  const Complex num = eta_inner(eta, psi, h_e * psi);
  const double den = eta_inner(eta, psi, psi).real();
  return num.real() / den;
}

/// Integrates i dpsi/dt = H(t) psi and records eta-norm and energy diagnostics.
inline EvolutionResult evolve(const TimeMatrix& H, const Vector& psi0, double t0, double t1,
                              const StepperConfig& stepper, const EvolveOptions& opts = {}) {
  if (psi0.size() == 0 || psi0.isZero(0.0))
    throw Error(ErrorKind::ZeroState, "initial state is the zero vector");
  EvolutionResult out;
  const Eigen::Index n = psi0.size();
  integrate_schrodinger(H, psi0, t0, t1, stepper, [&](double t, const Vector& psi) {
    const MetricOperator eta = opts.metric ? opts.metric(t) : MetricOperator::identity(n);
    out.times.push_back(t);
    out.psi.push_back(psi);
    out.eta_norm.push_back(eta_norm(eta, psi));
    if (opts.energy) out.energy_expect.push_back(energy_expectation(eta, opts.energy(t), psi));
    out.patch_trace.push_back(opts.patch_id);
  });
  return out;
}

/// h = rho H rho^-1 + i rho-dot rho^-1.
inline Matrix hermitian_representation(const Matrix& H, const MetricTrack& track, double t) {
  const MetricOperator eta = track.at(t);
  return eta.rho() * H * eta.rho_inv() + kI * track.rho_dot(t) * eta.rho_inv();
}

/// h = rho H_ph rho^-1 + (i/2)[rho-dot, rho^-1], with H_ph the pseudo-Hermitian part of H.
inline Matrix hermitian_representation_ph(const Matrix& H, const MetricTrack& track, double t) {
  const MetricOperator eta = track.at(t);
  const Matrix ph = split_pseudo(H, eta).hermitian_part;
  return eta.rho() * ph * eta.rho_inv() + (0.5 * kI) * commutator(track.rho_dot(t), eta.rho_inv());
}

inline TimeMatrix hermitian_generator(TimeMatrix H, MetricTrack track) {
  return [H = std::move(H), track = std::move(track)](double t) {
    return hermitian_representation(H(t), track, t);
  };
}

/// Phi = rho psi.
inline Vector map_state(const MetricTrack& track, double t, const Vector& psi) {
  return track.at(t).rho() * psi;
}

}  // namespace covdyn
