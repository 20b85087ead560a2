#pragma once

// RK4 for i dy/dt = K(t) y, where y is a vector or a matrix. No re-projection
// onto any conserved manifold is performed: drift is left visible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "covdyn/linalg.hpp"

namespace covdyn {

enum class StepMethod { Rk4Fixed, Rk4Adaptive };

struct StepperConfig {
  StepMethod method = StepMethod::Rk4Fixed;
  double dt = 1e-3;
  double target_local_error = 1e-10;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt))
      throw Error(ErrorKind::ConfigError, "stepper dt must be positive, got " + std::to_string(dt));
    if (!(target_local_error > 0.0))
      throw Error(ErrorKind::ConfigError, "stepper target_local_error must be positive");
  }
};

namespace detail {

template <typename State>
State rk4_step(const Matrix& k0, const Matrix& kmid, const Matrix& k1, const State& y, double h) {
  const Complex mi = -kI;
  const State s1 = mi * (k0 * y);
  const State s2 = mi * (kmid * (y + (0.5 * h) * s1));
  const State s3 = mi * (kmid * (y + (0.5 * h) * s2));
  const State s4 = mi * (k1 * (y + h * s3));
  return y + (h / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
}

template <typename State>
void require_finite(const State& y, double t) {
  if (!y.allFinite())
    throw Error(ErrorKind::StepperDiverged, "non-finite state at t=" + std::to_string(t));
}

}  // namespace detail

/// Integrates i dy/dt = K(t) y from t0 to t1 (either direction).
/// `observer(t, y)` is called at t0 and after every accepted step.
template <typename State, typename Generator, typename Observer>
State integrate_schrodinger(Generator&& generator, State y, double t0, double t1,
                            const StepperConfig& cfg, Observer&& observer) {
  cfg.validate();
  observer(t0, y);
  const double span = t1 - t0;
  if (span == 0.0) return y;

  if (cfg.method == StepMethod::Rk4Fixed) {
    const auto n = static_cast<std::int64_t>(std::ceil(std::abs(span) / cfg.dt - 1e-9));
    const std::int64_t steps = std::max<std::int64_t>(n, 1);
    const double h = span / static_cast<double>(steps);
    Matrix k0 = generator(t0);
    for (std::int64_t i = 0; i < steps; ++i) {
      const double t = t0 + h * static_cast<double>(i);
      const double tn = (i + 1 == steps) ? t1 : t0 + h * static_cast<double>(i + 1);
      const Matrix kmid = generator(t + 0.5 * h);
      Matrix k1 = generator(tn);
      y = detail::rk4_step(k0, kmid, k1, y, tn - t);
      detail::require_finite(y, tn);
      observer(tn, y);
      k0 = std::move(k1);
    }
    return y;
  }

  // Step doubling: compare one step of size h against two of size h/2.
  const double dir = span > 0 ? 1.0 : -1.0;
  const double min_step = 1e-12 * std::max(1.0, std::abs(span));
  double h = dir * std::min(cfg.dt, std::abs(span));
  double t = t0;
  Matrix k0 = generator(t0);
  while (dir * (t1 - t) > 0.0) {
    if (dir * (t + h - t1) > 0.0) h = t1 - t;
    const Matrix kq1 = generator(t + 0.25 * h);
    const Matrix kh = generator(t + 0.5 * h);
    const Matrix kq3 = generator(t + 0.75 * h);
    const Matrix k1 = generator(t + h);
    const State coarse = detail::rk4_step(k0, kh, k1, y, h);
    const State half = detail::rk4_step(k0, kq1, kh, y, 0.5 * h);
    const State fine = detail::rk4_step(kh, kq3, k1, half, 0.5 * h);
    const double scale = std::max(1.0, max_abs(fine));
    const double err = max_abs(fine - coarse) / 15.0 / scale;
    if (!std::isfinite(err))
      throw Error(ErrorKind::StepperDiverged, "non-finite error estimate at t=" + std::to_string(t));
    if (err <= cfg.target_local_error) {
      t = (dir * (t1 - (t + h)) <= 0.0) ? t1 : t + h;
      y = fine + (fine - coarse) / 15.0;
      detail::require_finite(y, t);
      observer(t, y);
      k0 = k1;
      const double grow = err > 0 ? std::min(2.0, 0.9 * std::pow(cfg.target_local_error / err, 0.2)) : 2.0;
      h *= std::max(1.0, grow);
      if (std::abs(h) > std::abs(cfg.dt) * 16.0) h = dir * cfg.dt * 16.0;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(cfg.target_local_error / err, 0.2));
      if (std::abs(h) < min_step)
        throw Error(ErrorKind::StepperDiverged, "step size underflow at t=" + std::to_string(t));
    }
  }
  return y;
}

template <typename State, typename Generator>
State integrate_schrodinger(Generator&& generator, State y, double t0, double t1,
                            const StepperConfig& cfg) {
  return integrate_schrodinger(std::forward<Generator>(generator), std::move(y), t0, t1, cfg,
                               [](double, const State&) {});
}

}  // namespace covdyn
