#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covdyn/linalg.hpp"

namespace covdyn {

/// Positive-definite metric with its square root and inverses cached.
class MetricOperator {
 public:
  explicit MetricOperator(Matrix eta) : eta_(std::move(eta)) {
    require_square(eta_, "metric");
    if (!is_positive_definite(eta_))
      throw Error(ErrorKind::NotPositiveDefinite, "metric operator is not positive-definite");
    rho_ = hermitian_sqrt(eta_);
    rho_inv_ = rho_.inverse();
    eta_inv_ = eta_.inverse();
  }

  static MetricOperator identity(Eigen::Index n) { return MetricOperator(covdyn::identity(n)); }

  Eigen::Index dim() const { return eta_.rows(); }
  const Matrix& eta() const { return eta_; }
  const Matrix& eta_inv() const { return eta_inv_; }
  const Matrix& rho() const { return rho_; }
  const Matrix& rho_inv() const { return rho_inv_; }

 private:
  Matrix eta_;
  Matrix rho_;
  Matrix rho_inv_;
  Matrix eta_inv_;
};

using Domain = std::function<bool(const RealVector&)>;
using MatrixField = std::function<Matrix(const RealVector&)>;
using MatrixListField = std::function<std::vector<Matrix>(const RealVector&)>;

inline Domain whole_space() {
  return [](const RealVector&) { return true; };
}

/// Central-difference step for coordinate R^a: fd_step scaled by |R^a|, floored at 1e-7.
inline double scaled_step(double fd_step, double coordinate) {
  return std::max(fd_step * std::max(1.0, std::abs(coordinate)), 1e-7);
}

/// Central-difference partial derivatives of a matrix field.
inline std::vector<Matrix> central_partials(const MatrixField& f, const RealVector& r, double fd_step) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(r.size()));
  for (Eigen::Index a = 0; a < r.size(); ++a) {
    const double h = scaled_step(fd_step, r(a));
    RealVector rp = r, rm = r;
    rp(a) += h;
    rm(a) -= h;
    out.push_back((f(rp) - f(rm)) / (2.0 * h));
  }
  return out;
}

/// R -> eta[R] over one patch. `eta_fn` must be a pure function of R.
struct MetricField {
  std::string patch_id;
  Eigen::Index dim = 0;
  Domain domain = whole_space();
  MatrixField eta_fn;
  std::optional<MatrixListField> partials_fn;
  double fd_step = 1e-5;

  void require_in_domain(const RealVector& r) const {
    if (!domain(r)) throw Error(ErrorKind::OutOfPatch, "point outside patch '" + patch_id + "'");
  }

  Matrix eta_matrix(const RealVector& r) const {
    require_in_domain(r);
    return eta_fn(r);
  }

  MetricOperator at(const RealVector& r) const { return MetricOperator(eta_matrix(r)); }

  std::vector<Matrix> partials(const RealVector& r) const {
    require_in_domain(r);
    if (partials_fn) return (*partials_fn)(r);
    return central_partials(eta_fn, r, fd_step);
  }
};

inline MetricField constant_metric(std::string patch_id, Matrix eta) {
  MetricField m;
  m.patch_id = std::move(patch_id);
  m.dim = eta.rows();
  m.eta_fn = [eta](const RealVector&) { return eta; };
  m.partials_fn = [eta](const RealVector& r) {
    return std::vector<Matrix>(static_cast<std::size_t>(r.size()), Matrix::Zero(eta.rows(), eta.cols()));
  };
  return m;
}

/// <phi | eta psi> with the Euclidean pairing.
inline Complex eta_inner(const MetricOperator& eta, const Vector& phi, const Vector& psi) {
  if (phi.size() != eta.dim() || psi.size() != eta.dim())
    throw Error(ErrorKind::DimMismatch, "eta_inner: vector and metric dimensions differ");
  return phi.dot(eta.eta() * psi);
}

inline double eta_norm(const MetricOperator& eta, const Vector& psi) {
  return std::sqrt(std::max(0.0, eta_inner(eta, psi, psi).real()));
}

/// Residual of H^dagger - eta H eta^-1.
inline double pseudo_hermiticity_residual(const Matrix& h, const MetricOperator& eta) {
  require_same_dim(h, eta.eta(), "pseudo-Hermiticity");
  return max_abs(h.adjoint() - eta.eta() * h * eta.eta_inv());
}

/// Residual of M^dagger + eta M eta^-1.
inline double pseudo_anti_hermiticity_residual(const Matrix& m, const MetricOperator& eta) {
  require_same_dim(m, eta.eta(), "pseudo-anti-Hermiticity");
  return max_abs(m.adjoint() + eta.eta() * m * eta.eta_inv());
}

inline bool is_pseudo_hermitian(const Matrix& h, const MetricOperator& eta, double tol) {
  return pseudo_hermiticity_residual(h, eta) <= tol;
}

inline bool is_pseudo_anti_hermitian(const Matrix& m, const MetricOperator& eta, double tol) {
  return pseudo_anti_hermiticity_residual(m, eta) <= tol;
}

/// rho H rho^-1.
inline Matrix hermitize(const Matrix& h, const MetricOperator& eta) {
  require_same_dim(h, eta.eta(), "hermitize");
  return eta.rho() * h * eta.rho_inv();
}

/// rho^-1 h rho, the inverse of hermitize.
inline Matrix dehermitize(const Matrix& h, const MetricOperator& eta) {
  require_same_dim(h, eta.eta(), "dehermitize");
  return eta.rho_inv() * h * eta.rho();
}

struct PseudoSplit {
  Matrix hermitian_part;       // eta-pseudo-Hermitian
  Matrix anti_hermitian_part;  // eta-pseudo-anti-Hermitian
};

/// Unique split M = M_ph + M_aph with M_ph = (M + eta^-1 M^dagger eta) / 2.
inline PseudoSplit split_pseudo(const Matrix& m, const MetricOperator& eta) {
  require_same_dim(m, eta.eta(), "split_pseudo");
  Matrix ph = 0.5 * (m + eta.eta_inv() * m.adjoint() * eta.eta());
  Matrix aph = m - ph;
  return {std::move(ph), std::move(aph)};
}

}  // namespace covdyn
