#pragma once

// Small bundles shared by the unit tests.

#include <random>
#include <vector>

#include "covdyn/bundle.hpp"
#include "support/oracles.hpp"

namespace fixtures {

using namespace covdyn;

/// Affine metric eta0 + x eta_x + y eta_y on the plane with constant Hermitian omega_H.
struct AffineBundle {
  MetricField metric;
  ConnectionForm A;
};

inline AffineBundle affine_bundle(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  const Matrix eta0 = oracle::random_positive(rng, n, 2.0, 4.0);
  const Matrix ex = 0.3 * oracle::random_hermitian(rng, n), ey = 0.3 * oracle::random_hermitian(rng, n);
  const Matrix wx = oracle::random_hermitian(rng, n), wy = oracle::random_hermitian(rng, n);
  AffineBundle b;
  b.metric.patch_id = "p";
  b.metric.dim = n;
  b.metric.eta_fn = [=](const RealVector& r) { return Matrix(eta0 + r(0) * ex + r(1) * ey); };
  b.metric.partials_fn = MatrixListField([=](const RealVector&) { return std::vector<Matrix>{ex, ey}; });
  ConnectionForm omega;
  omega.patch_id = "p";
  omega.dim = n;
  omega.components_fn = [m = b.metric, wx, wy](const RealVector& r) {
    const MetricOperator e = m.at(r);
    return std::vector<Matrix>{dehermitize(wx, e), dehermitize(wy, e)};
  };
  b.A = assemble_connection(a_zero_form(b.metric), omega, b.metric, {RealVector::Zero(2)});
  return b;
}

inline CurvePath arc(double t0 = 0.0, double t1 = 1.0) {
  CurvePath c;
  c.t_start = t0;
  c.t_end = t1;
  c.position = [](double t) {
    RealVector r(2);
    r << 0.8 * std::cos(3 * t) - 0.5, 0.6 * std::sin(2 * t);
    return r;
  };
  c.velocity = [](double t) {
    RealVector v(2);
    v << -2.4 * std::sin(3 * t), 1.2 * std::cos(2 * t);
    return v;
  };
  return c;
}

/// Single-patch system over `b` along `c` with constant Hermitian-form energy.
inline SystemSpec single_patch_system(const AffineBundle& b, const CurvePath& c, const Matrix& h_e) {
  SystemSpec spec;
  spec.patches.push_back({"p", b.metric, b.A});
  spec.curve = c;
  spec.energy.authoring_patch = "p";
  spec.energy.hermitian_form["p"] = [h_e](const RealVector&) { return h_e; };
  return spec;
}

}  // namespace fixtures
