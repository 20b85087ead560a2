#pragma once

// Dense complex kernel shared by every other module. Matrices carry their
// dimension at runtime so the generic layers work for any fiber size.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "covdyn/errors.hpp"

namespace covdyn {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;  // base-manifold coordinates R
using Vec3 = Eigen::Vector3d;

inline constexpr Complex kI{0.0, 1.0};

inline Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }
inline Matrix zeros(Eigen::Index n) { return Matrix::Zero(n, n); }

/// Largest absolute entry. Used as the residual norm throughout the library.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline void require_square(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols())
    throw Error(ErrorKind::DimMismatch, std::string(what) + " is not square");
}

inline void require_same_dim(const Matrix& a, const Matrix& b, std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::DimMismatch, std::string(what) + ": " + std::to_string(a.rows()) +
                                            "x" + std::to_string(a.cols()) + " vs " +
                                            std::to_string(b.rows()) + "x" +
                                            std::to_string(b.cols()));
}

inline Matrix adjoint(const Matrix& m) { return m.adjoint(); }

inline bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tol;
}

struct Spectrum {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // orthonormal columns
};

/// Spectral decomposition of the Hermitian part of `m`.
inline Spectrum hermitian_spectrum(const Matrix& m) {
  require_square(m, "hermitian_spectrum input");
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Scale-aware tolerance: 1e-12 times the largest |eigenvalue| (floored at 1).
inline double default_pd_tolerance(const Eigen::VectorXd& eigenvalues) {
  double scale = 1.0;
  if (eigenvalues.size() > 0) scale = std::max(scale, eigenvalues.cwiseAbs().maxCoeff());
  return 1e-12 * scale;
}

inline bool is_positive_definite(const Matrix& m, std::optional<double> tol = std::nullopt) {
  if (m.rows() != m.cols() || m.size() == 0) return false;
  if (!m.allFinite()) return false;
  const Spectrum s = hermitian_spectrum(m);
  const double t = tol.value_or(default_pd_tolerance(s.values));
  if (!is_hermitian(m, std::max(t, 1e-14 * std::max(1.0, max_abs(m))))) return false;
  return s.values.minCoeff() > t;
}

/// Positive square root via the spectral decomposition.
inline Matrix hermitian_sqrt(const Matrix& m) {
  require_square(m, "hermitian_sqrt input");
  const Spectrum s = hermitian_spectrum(m);
  const double tol = default_pd_tolerance(s.values);
  if (s.values.size() == 0 || s.values.minCoeff() <= tol || !is_hermitian(m, 1e-10 * std::max(1.0, max_abs(m))))
    throw Error(ErrorKind::NotPositiveDefinite,
                "hermitian_sqrt: smallest eigenvalue " +
                    std::to_string(s.values.size() ? s.values.minCoeff() : 0.0));
  const Eigen::VectorXd roots = s.values.cwiseSqrt();
  Matrix p = s.vectors * roots.cast<Complex>().asDiagonal() * s.vectors.adjoint();
  return 0.5 * (p + p.adjoint());
}

/// exp(M) by Pade scaling and squaring.
inline Matrix matrix_exp(const Matrix& m) {
  require_square(m, "matrix_exp input");
  return m.exp();
}

inline Matrix commutator(const Matrix& a, const Matrix& b) {
  require_same_dim(a, b, "commutator");
  return a * b - b * a;
}

/// Pauli matrix sigma_j, j in {1,2,3}.
inline Matrix pauli(int j) {
  Matrix s(2, 2);
  switch (j) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -kI, kI, 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: throw Error(ErrorKind::DimMismatch, "pauli index must be 1, 2 or 3");
  }
  return s;
}

inline Matrix pauli_dot(const Vec3& v) {
  Matrix s(2, 2);
  s << Complex(v.z(), 0.0), Complex(v.x(), -v.y()), Complex(v.x(), v.y()), Complex(-v.z(), 0.0);
  return s;
}

/// Solves P X + X P = C for Hermitian positive-definite P.
inline Matrix solve_anticommutator(const Matrix& p, const Matrix& c) {
  require_same_dim(p, c, "solve_anticommutator");
  const Spectrum s = hermitian_spectrum(p);
  Matrix ct = s.vectors.adjoint() * c * s.vectors;
  for (Eigen::Index i = 0; i < ct.rows(); ++i)
    for (Eigen::Index j = 0; j < ct.cols(); ++j) ct(i, j) /= (s.values(i) + s.values(j));
  return s.vectors * ct * s.vectors.adjoint();
}

inline bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  return max_abs(u.adjoint() * u - identity(u.rows())) <= tol;
}

}  // namespace covdyn
