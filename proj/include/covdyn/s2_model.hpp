#pragma once

// Closed-form two-level model over the sphere, coordinates R = (theta, phi).
// The north patch "plus" is theta < theta_plus, the south patch "minus" is
// theta > theta_minus. Every one-form is an (theta, phi) component pair.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "covdyn/linalg.hpp"

namespace covdyn::s2 {

using OneForm = std::array<Matrix, 2>;
using Gradient = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

enum class Patch { Plus, Minus };

inline std::string patch_name(Patch p) { return p == Patch::Plus ? "plus" : "minus"; }

struct PatchAngles {
  double theta_plus = 2.0 * kPi / 3.0;
  double theta_minus = kPi / 3.0;

  void validate() const {
    if (!(0.0 < theta_minus && theta_minus < theta_plus && theta_plus < kPi))
      throw Error(ErrorKind::ConfigError, "patch angles must satisfy 0 < theta_minus < theta_plus < pi");
  }

  bool in_plus(double theta) const { return theta >= 0.0 && theta < theta_plus; }
  bool in_minus(double theta) const { return theta > theta_minus && theta <= kPi; }
  bool in_overlap(double theta) const { return theta > theta_minus && theta < theta_plus; }
  bool contains(Patch p, double theta) const { return p == Patch::Plus ? in_plus(theta) : in_minus(theta); }
};

struct S2Point {
  double theta = kPi / 2.0;
  double phi = 0.0;
  Patch patch = Patch::Plus;
};

struct Velocity {
  double theta_dot = 0.0;
  double phi_dot = 0.0;
};

/// Smooth real function on a patch with an optional analytic gradient.
struct ScalarField {
  std::function<double(double, double)> value;
  std::optional<std::function<Gradient(double, double)>> gradient;

  double operator()(double theta, double phi) const { return value(theta, phi); }

  Gradient grad(double theta, double phi) const {
    if (gradient) return (*gradient)(theta, phi);
    constexpr double h = 1e-6;
    return {(value(theta + h, phi) - value(theta - h, phi)) / (2 * h),
            (value(theta, phi + h) - value(theta, phi - h)) / (2 * h)};
  }
};

inline ScalarField constant_field(double c) {
  return {[c](double, double) { return c; }, [](double, double) { return Gradient(0.0, 0.0); }};
}

/// Eigenvalue square roots of the two local metrics.
struct ScaleFields {
  std::string name;
  ScalarField xi, zeta;              // plus patch
  ScalarField xi_tilde, zeta_tilde;  // minus patch
};

/// xi = 1, zeta = 1 - cos(theta)/cos(theta_plus); mirrored on the minus patch.
inline ScaleFields default_scales(const PatchAngles& a) {
  const double cp = std::cos(a.theta_plus), cm = std::cos(a.theta_minus);
  if (!(cp < 0.0 && cm > 0.0))
    throw Error(ErrorKind::ConfigError, "default scale fields need theta_minus < pi/2 < theta_plus");
  ScaleFields s;
  s.name = "default";
  s.xi = constant_field(1.0);
  s.zeta = {[cp](double t, double) { return 1.0 - std::cos(t) / cp; },
            [cp](double t, double) { return Gradient(std::sin(t) / cp, 0.0); }};
  s.xi_tilde = constant_field(1.0);
  s.zeta_tilde = {[cm](double t, double) { return 1.0 - std::cos(t) / cm; },
                  [cm](double t, double) { return Gradient(std::sin(t) / cm, 0.0); }};
  return s;
}

inline ScaleFields constant_scales(double xi, double zeta, double xi_tilde, double zeta_tilde) {
  if (!(xi > 0 && zeta > 0 && xi_tilde > 0 && zeta_tilde > 0))
    throw Error(ErrorKind::ConfigError, "scale constants must be positive");
  return {"constant", constant_field(xi), constant_field(zeta), constant_field(xi_tilde),
          constant_field(zeta_tilde)};
}

/// Default fields multiplied by smooth, phi-dependent factors built from x1 and x2.
inline ScaleFields modulated_scales(const PatchAngles& a) {
  const ScaleFields base = default_scales(a);
  auto x1 = [](double t, double p) { return std::sin(t) * std::cos(p); };
  auto x2 = [](double t, double p) { return std::sin(t) * std::sin(p); };
  auto dx1 = [](double t, double p) { return Gradient(std::cos(t) * std::cos(p), -std::sin(t) * std::sin(p)); };
  auto dx2 = [](double t, double p) { return Gradient(std::cos(t) * std::sin(p), std::sin(t) * std::cos(p)); };
  auto affine = [](auto f, auto df, double c0, double c1) {
    return ScalarField{[=](double t, double p) { return c0 + c1 * f(t, p); },
                       [=](double t, double p) { return Gradient(c1 * df(t, p)); }};
  };
  auto product = [](ScalarField f, ScalarField g) {
    return ScalarField{[=](double t, double p) { return f(t, p) * g(t, p); },
                       [=](double t, double p) { return Gradient(f.grad(t, p) * g(t, p) + f(t, p) * g.grad(t, p)); }};
  };
  ScaleFields s;
  s.name = "modulated";
  s.xi = affine(x1, dx1, 1.0, 0.25);
  s.zeta = product(base.zeta, affine(x2, dx2, 1.0, 0.3));
  s.xi_tilde = affine(x2, dx2, 1.0, 0.25);
  s.zeta_tilde = product(base.zeta_tilde, affine(x1, dx1, 1.0, 0.3));
  return s;
}

/// Traceless Hermitian gauge one-form alpha = (alpha_theta dtheta + alpha_phi dphi) . sigma.
struct AlphaField {
  std::function<Vec3(double, double)> theta_part;
  std::function<Vec3(double, double)> phi_part;
};

inline AlphaField zero_alpha() {
  return {[](double, double) { return Vec3::Zero().eval(); }, [](double, double) { return Vec3::Zero().eval(); }};
}

/// kappa * d(x-hat): smooth on the whole sphere.
inline AlphaField tangent_alpha(double kappa) {
  return {[kappa](double t, double p) {
            return Vec3(kappa * std::cos(t) * std::cos(p), kappa * std::cos(t) * std::sin(p), -kappa * std::sin(t));
          },
          [kappa](double t, double p) {
            return Vec3(-kappa * std::sin(t) * std::sin(p), kappa * std::sin(t) * std::cos(p), 0.0);
          }};
}

/// Energy (epsilon/2) y-hat . sigma on the plus patch.
struct EnergyField {
  std::function<double(double, double)> epsilon;
  std::function<Vec3(double, double)> y_hat;
};

inline EnergyField constant_energy(double epsilon, Vec3 y_hat) {
  const double n = y_hat.norm();
  if (!(n > 0.0)) throw Error(ErrorKind::ConfigError, "energy axis must be nonzero");
  y_hat /= n;
  return {[epsilon](double, double) { return epsilon; }, [y_hat](double, double) { return y_hat; }};
}

/// How a minus-patch evaluation at the south pole fixes the undefined azimuth.
enum class PoleConvention { Reject, PhiZero };

struct Model {
  PatchAngles angles;
  ScaleFields scales = default_scales(PatchAngles{});
  AlphaField alpha = zero_alpha();
  EnergyField energy = constant_energy(1.0, Vec3(0, 0, 1));
  PoleConvention pole = PoleConvention::PhiZero;
  double pole_margin = 1e-3;
};

inline void require_in_patch(const Model& m, const S2Point& pt) {
  if (!m.angles.contains(pt.patch, pt.theta))
    throw Error(ErrorKind::OutOfPatch, "theta=" + std::to_string(pt.theta) + " outside patch " + patch_name(pt.patch));
}

inline void require_in_overlap(const Model& m, const S2Point& pt) {
  if (!m.angles.in_overlap(pt.theta))
    throw Error(ErrorKind::OutOfOverlap, "theta=" + std::to_string(pt.theta) + " outside the overlap");
}

// ---------------------------------------------------------------- frames

inline Matrix frame_s1(double phi) { return std::cos(phi) * pauli(1) + std::sin(phi) * pauli(2); }
inline Matrix frame_s2(double phi) { return -std::sin(phi) * pauli(1) + std::cos(phi) * pauli(2); }

inline Vec3 x_hat(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

/// Reflection of x-hat through the equatorial plane.
inline Vec3 x_tilde(double theta, double phi) {
  Vec3 x = x_hat(theta, phi);
  x.z() = -x.z();
  return x;
}

/// (theta, phi) components of d(x-hat).
inline std::array<Vec3, 2> dx_hat(double theta, double phi) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {Vec3(c * std::cos(phi), c * std::sin(phi), -s), Vec3(-s * std::sin(phi), s * std::cos(phi), 0.0)};
}

/// (theta, phi) components of x-hat cross d(x-hat).
inline std::array<Vec3, 2> x_cross_dx(double theta, double phi) {
  const double s2t = std::sin(2 * theta), c2t = std::cos(2 * theta);
  return {Vec3(-std::sin(phi), std::cos(phi), 0.0),
          Vec3(-0.5 * s2t * std::cos(phi), -0.5 * s2t * std::sin(phi), -0.5 * (-1.0 + c2t))};
}

/// Rewrites (dtheta, dphi) components in the pole chart x = theta cos(phi), y = theta sin(phi).
template <typename T>
std::array<T, 2> to_pole_chart(double theta, double phi, const T& comp_theta, const T& comp_phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {T(comp_theta * c - comp_phi * (s / theta)), T(comp_theta * s + comp_phi * (c / theta))};
}

inline Matrix contract(const OneForm& f, const Velocity& v) { return v.theta_dot * f[0] + v.phi_dot * f[1]; }

// ---------------------------------------------------------------- U, eta, g, big G

inline Matrix u_matrix(double theta, double phi) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const Complex em = std::polar(1.0, -phi), ep = std::polar(1.0, phi);
  Matrix u(2, 2);
  u << c, -s * em, s * ep, c;
  return u;
}

namespace detail {

struct LocalScales {
  double xi, zeta;
  Gradient dxi, dzeta;
};

inline LocalScales local_scales(const Model& m, const S2Point& pt) {
  const auto& f = pt.patch == Patch::Plus ? m.scales.xi : m.scales.xi_tilde;
  const auto& g = pt.patch == Patch::Plus ? m.scales.zeta : m.scales.zeta_tilde;
  LocalScales s{f(pt.theta, pt.phi), g(pt.theta, pt.phi), f.grad(pt.theta, pt.phi), g.grad(pt.theta, pt.phi)};
  if (!(s.xi > 0.0 && s.zeta > 0.0))
    throw Error(ErrorKind::NotPositiveDefinite, "scale field is not positive at theta=" + std::to_string(pt.theta));
  return s;
}

/// Unit axis of the patch metric and its (theta, phi) derivatives.
inline std::pair<Vec3, std::array<Vec3, 2>> metric_axis(const S2Point& pt) {
  if (pt.patch == Patch::Plus) return {x_hat(pt.theta, pt.phi), dx_hat(pt.theta, pt.phi)};
  auto d = dx_hat(pt.theta, pt.phi);
  d[0].z() = -d[0].z();
  d[1].z() = -d[1].z();
  return {x_tilde(pt.theta, pt.phi), d};
}

}  // namespace detail

/// chi_+ I + chi_- axis . sigma with eigenvalues xi^2 and zeta^2.
inline Matrix eta(const Model& m, const S2Point& pt) {
  require_in_patch(m, pt);
  const auto s = detail::local_scales(m, pt);
  const double chi_p = 0.5 * (s.xi * s.xi + s.zeta * s.zeta);
  const double chi_m = 0.5 * (s.xi * s.xi - s.zeta * s.zeta);
  return chi_p * identity(2) + chi_m * pauli_dot(detail::metric_axis(pt).first);
}

inline Matrix eta_plus(const Model& m, double theta, double phi) { return eta(m, {theta, phi, Patch::Plus}); }
inline Matrix eta_minus(const Model& m, double theta, double phi) { return eta(m, {theta, phi, Patch::Minus}); }

inline std::vector<Matrix> eta_partials(const Model& m, const S2Point& pt) {
  require_in_patch(m, pt);
  const auto s = detail::local_scales(m, pt);
  const auto [axis, daxis] = detail::metric_axis(pt);
  const double chi_m = 0.5 * (s.xi * s.xi - s.zeta * s.zeta);
  std::vector<Matrix> out;
  for (int a = 0; a < 2; ++a) {
    const double dchi_p = s.xi * s.dxi(a) + s.zeta * s.dzeta(a);
    const double dchi_m = s.xi * s.dxi(a) - s.zeta * s.dzeta(a);
    out.push_back(dchi_p * identity(2) + dchi_m * pauli_dot(axis) + chi_m * pauli_dot(daxis[static_cast<std::size_t>(a)]));
  }
  return out;
}

/// exp(i (pi/2 - theta) s2(phi)): the unitary transition between Hermitian representations.
inline Matrix big_g_s2(double theta, double phi) {
  const double s = std::sin(theta), c = std::cos(theta);
  Matrix g(2, 2);
  g << s, std::polar(c, -phi), -std::polar(c, phi), s;
  return g;
}

namespace detail {

struct Gammas {
  double plus, minus;
  Gradient dplus, dminus;
};

inline Gammas gamma_coefficients(const Model& m, double theta, double phi) {
  const auto p = local_scales(m, {theta, phi, Patch::Plus});
  const auto q = local_scales(m, {theta, phi, Patch::Minus});
  const double rx = q.xi / p.xi, rz = q.zeta / p.zeta;
  const Gradient drx = (q.dxi * p.xi - q.xi * p.dxi) / (p.xi * p.xi);
  const Gradient drz = (q.dzeta * p.zeta - q.zeta * p.dzeta) / (p.zeta * p.zeta);
  return {0.5 * (rx + rz), 0.5 * (rx - rz), 0.5 * (drx + drz), 0.5 * (drx - drz)};
}

}  // namespace detail

/// g = gamma_+ G + gamma_- s1(phi) on the overlap; states map as psi_minus = g^-1 psi_plus.
inline Matrix transition_g(const Model& m, double theta, double phi) {
  require_in_overlap(m, {theta, phi, Patch::Plus});
  const auto gm = detail::gamma_coefficients(m, theta, phi);
  return gm.plus * big_g_s2(theta, phi) + gm.minus * frame_s1(phi);
}

inline std::vector<Matrix> transition_g_partials(const Model& m, double theta, double phi) {
  require_in_overlap(m, {theta, phi, Patch::Plus});
  const auto gm = detail::gamma_coefficients(m, theta, phi);
  const Matrix bg = big_g_s2(theta, phi), s1 = frame_s1(phi);
  const double s = std::sin(theta), c = std::cos(theta);
  Matrix dbg_theta(2, 2), dbg_phi(2, 2);
  dbg_theta << c, -std::polar(s, -phi), std::polar(s, phi), c;
  dbg_phi << 0.0, -kI * std::polar(c, -phi), -kI * std::polar(c, phi), 0.0;
  return {gm.dplus(0) * bg + gm.dminus(0) * s1 + gm.plus * dbg_theta,
          gm.dplus(1) * bg + gm.dminus(1) * s1 + gm.plus * dbg_phi + gm.minus * frame_s2(phi)};
}

// ---------------------------------------------------------------- one-forms

/// -(i/2) eta^-1 d eta in closed form, decomposed on s1, s2, sigma_3.
inline OneForm a_zero_s2(const Model& m, const S2Point& pt) {
  require_in_patch(m, pt);
  const auto sc = detail::local_scales(m, pt);
  const double s = std::sin(pt.theta), c = std::cos(pt.theta);
  const Matrix f1 = frame_s1(pt.phi), f2 = frame_s2(pt.phi), s3 = pauli(3);
  const double sign = pt.patch == Patch::Plus ? 1.0 : -1.0;  // reflects the sigma_3 axis component
  const Matrix axis = s * f1 + sign * c * s3;
  const std::array<Matrix, 2> d_axis{c * f1 - sign * s * s3, s * f2};
  const std::array<Matrix, 2> axis_cross{sign * f2, -sign * (c * f1 - sign * s * s3) * s};
  const double x2 = sc.xi * sc.xi, z2 = sc.zeta * sc.zeta;
  const double p = (x2 * x2 - z2 * z2) / (4 * x2 * z2);
  const double q = (x2 - z2) * (x2 - z2) / (4 * x2 * z2);
  OneForm out;
  for (std::size_t a = 0; a < 2; ++a) {
    const double lsum = sc.dxi(static_cast<int>(a)) / sc.xi + sc.dzeta(static_cast<int>(a)) / sc.zeta;
    const double ldiff = sc.dxi(static_cast<int>(a)) / sc.xi - sc.dzeta(static_cast<int>(a)) / sc.zeta;
    out[a] = (-0.5 * kI) * (lsum * identity(2) + ldiff * axis + p * d_axis[a] - kI * q * axis_cross[a]);
  }
  return out;
}

struct GammaForms {
  OneForm plus, minus, zero;
};

/// The three single-valued Hermitian one-forms whose combination gives the
/// inhomogeneous term of the omega transition rule.
inline GammaForms gamma_forms(double theta, double phi) {
  const double s = std::sin(theta), c = std::cos(theta);
  const Matrix f1 = frame_s1(phi), f2 = frame_s2(phi), s3 = pauli(3);
  const Matrix bracket = (c * f1 - s * s3) * s;
  GammaForms g;
  g.plus = {-f2, bracket};
  g.minus = {-f2, -bracket};
  g.zero = {zeros(2), -(s * f1 + c * s3) * c};
  return g;
}

/// Gamma_+ evaluated at (pi - theta, phi) and pulled back along theta -> pi - theta.
inline OneForm gamma_plus_reflected(double theta, double phi) {
  const double s = std::sin(theta), c = std::cos(theta);
  return {frame_s2(phi), -(c * frame_s1(phi) + s * pauli(3)) * s};
}

/// (xi^2 + zeta^2) / (4 xi zeta).
inline double mixing_factor(double xi, double zeta) { return (xi * xi + zeta * zeta) / (4 * xi * zeta); }

/// (xi - zeta)^2 / (4 xi zeta).
inline double drift_factor(double xi, double zeta) { return (xi - zeta) * (xi - zeta) / (4 * xi * zeta); }

/// G^-1 sigma_j G in closed form. At the south pole the pole convention fixes phi.
inline Matrix sigma_tilde(int j, double theta, double phi) {
  const double s = std::sin(theta), c = std::cos(theta);
  const double s2t = std::sin(2 * theta), c2t = std::cos(2 * theta);
  const Matrix s1 = pauli(1), s2 = pauli(2), s3 = pauli(3);
  switch (j) {
    case 1:
      return (s * s - c * c * std::cos(2 * phi)) * s1 - c * c * std::sin(2 * phi) * s2 - s2t * std::cos(phi) * s3;
    case 2:
      return -c * c * std::sin(2 * phi) * s1 + (s * s + c * c * std::cos(2 * phi)) * s2 - s2t * std::sin(phi) * s3;
    case 3:
      return s2t * frame_s1(phi) - c2t * s3;
    default:
      throw Error(ErrorKind::DimMismatch, "sigma_tilde index must be 1, 2 or 3");
  }
}

inline Matrix sigma_tilde_dot(const Vec3& v, double theta, double phi) {
  return v.x() * sigma_tilde(1, theta, phi) + v.y() * sigma_tilde(2, theta, phi) + v.z() * sigma_tilde(3, theta, phi);
}

inline Matrix frame_s1_tilde(double theta, double phi) {
  return -(std::cos(2 * theta) * frame_s1(phi) + std::sin(2 * theta) * pauli(3));
}

inline Matrix frame_s2_tilde(double, double phi) { return frame_s2(phi); }

namespace detail {

/// Azimuth used for sigma-tilde evaluations; only the minus patch reaches the south pole.
inline double minus_azimuth(const Model& m, const S2Point& pt) {
  if (pt.theta >= kPi) {
    if (m.pole == PoleConvention::Reject)
      throw Error(ErrorKind::PoleAmbiguity, "sigma-tilde is not single-valued at the south pole");
    return 0.0;
  }
  return pt.phi;
}

}  // namespace detail

/// alpha on the plus patch, G^-1 alpha G on the minus patch.
inline OneForm alpha_form(const Model& m, const S2Point& pt) {
  require_in_patch(m, pt);
  const Vec3 at = m.alpha.theta_part(pt.theta, pt.phi), ap = m.alpha.phi_part(pt.theta, pt.phi);
  if (pt.patch == Patch::Plus) return {pauli_dot(at), pauli_dot(ap)};
  const double az = detail::minus_azimuth(m, pt);
  return {sigma_tilde_dot(at, pt.theta, az), sigma_tilde_dot(ap, pt.theta, az)};
}

/// Hermitian part of the connection: alpha - X Gamma_+ - Gamma_0 on plus,
/// alpha~ - X~ Gamma_+(pi - theta) on minus.
inline OneForm omega_h(const Model& m, const S2Point& pt) {
  require_in_patch(m, pt);
  const auto sc = detail::local_scales(m, pt);
  const double x = mixing_factor(sc.xi, sc.zeta);
  OneForm out = alpha_form(m, pt);
  if (pt.patch == Patch::Plus) {
    const auto g = gamma_forms(pt.theta, pt.phi);
    for (std::size_t a = 0; a < 2; ++a) out[a] -= x * g.plus[a] + g.zero[a];
  } else {
    const auto r = gamma_plus_reflected(pt.theta, pt.phi);
    for (std::size_t a = 0; a < 2; ++a) out[a] -= x * r[a];
  }
  return out;
}

/// (i/2)[rho-dot, rho^-1] in closed form.
inline Matrix h_rho_terms(const Model& m, const S2Point& pt, const Velocity& v) {
  require_in_patch(m, pt);
  const auto sc = detail::local_scales(m, pt);
  const double k = drift_factor(sc.xi, sc.zeta);
  const OneForm f = pt.patch == Patch::Plus ? gamma_forms(pt.theta, pt.phi).plus : gamma_plus_reflected(pt.theta, pt.phi);
  return k * contract(f, v);
}

/// Coefficients beta_j of U^dagger dU = sum_j beta_j sigma_j, as (theta, phi) pairs.
inline std::array<std::array<Complex, 2>, 3> beta_forms(double theta, double phi) {
  const Complex h = 0.5 * kI;
  const double s = std::sin(theta), c = std::cos(theta);
  return {{{h * std::sin(phi), h * s * std::cos(phi)},
           {-h * std::cos(phi), h * s * std::sin(phi)},
           {Complex(0.0), h * (1.0 - c)}}};
}

/// 2 sigma_j - rho_d sigma_j rho_d^-1 - rho_d^-1 sigma_j rho_d with rho_d = diag(xi, zeta).
inline Matrix sigma_check(int j, double xi, double zeta) {
  Matrix rd = Matrix::Zero(2, 2), rdi = Matrix::Zero(2, 2);
  rd(0, 0) = xi;
  rd(1, 1) = zeta;
  rdi(0, 0) = 1.0 / xi;
  rdi(1, 1) = 1.0 / zeta;
  const Matrix s = pauli(j);
  return 2.0 * s - rd * s * rdi - rdi * s * rd;
}

/// (i/2)[rho-dot, rho^-1] assembled from the beta coefficients (plus patch only).
inline Matrix h_rho_from_betas(const Model& m, const S2Point& pt, const Velocity& v) {
  if (pt.patch != Patch::Plus) throw Error(ErrorKind::OutOfPatch, "beta route is written for the plus patch");
  require_in_patch(m, pt);
  const auto sc = detail::local_scales(m, pt);
  const auto b = beta_forms(pt.theta, pt.phi);
  const Vec3 x = x_hat(pt.theta, pt.phi);
  Complex beta[3];
  for (int j = 0; j < 3; ++j) beta[j] = b[j][0] * v.theta_dot + b[j][1] * v.phi_dot;
  const Matrix bracket = -((sc.xi - sc.zeta) * (sc.xi - sc.zeta) / (sc.xi * sc.zeta)) *
                         ((beta[0] - x.x() * beta[2]) * pauli(1) + (beta[1] - x.y() * beta[2]) * pauli(2) -
                          (1.0 + x.z()) * beta[2] * pauli(3));
  return (0.5 * kI) * bracket;
}

/// Hermitian-form energy: (eps/2) y . sigma on plus, (eps/2) y . sigma-tilde on minus.
inline Matrix energy_matrix(const Model& m, const S2Point& pt) {
  require_in_patch(m, pt);
  const double eps = m.energy.epsilon(pt.theta, pt.phi);
  const Vec3 y = m.energy.y_hat(pt.theta, pt.phi);
  if (pt.patch == Patch::Plus) return 0.5 * eps * pauli_dot(y);
  return 0.5 * eps * sigma_tilde_dot(y, pt.theta, detail::minus_azimuth(m, pt));
}

/// Closed-form Hermitian Hamiltonian; independent of every scale field.
inline Matrix hermitian_hamiltonian(const Model& m, const S2Point& pt, const Velocity& v) {
  require_in_patch(m, pt);
  const double s = std::sin(pt.theta), c = std::cos(pt.theta);
  const Matrix f1 = frame_s1(pt.phi), f2 = frame_s2(pt.phi), s3 = pauli(3);
  Matrix h = energy_matrix(m, pt) + contract(alpha_form(m, pt), v);
  if (pt.patch == Patch::Plus) {
    h += 0.5 * (f2 * v.theta_dot + (-c * f1 + s * s3) * s * v.phi_dot);
    h += (s * f1 + c * s3) * c * v.phi_dot;
  } else {
    h += 0.5 * (-f2 * v.theta_dot + (c * f1 + s * s3) * s * v.phi_dot);
  }
  return h;
}

}  // namespace covdyn::s2
