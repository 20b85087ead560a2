#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covdyn/metric.hpp"

namespace covdyn {

/// Fiber map between two local trivializations on their overlap.
/// States convert as psi_to = g^-1 psi_from.
struct TransitionFunctionField {
  std::string from_patch;
  std::string to_patch;
  Eigen::Index dim = 0;
  Domain overlap = whole_space();
  MatrixField g_fn;
  std::optional<MatrixListField> partials_fn;
  double fd_step = 1e-6;

  void require_in_overlap(const RealVector& r) const {
    if (!overlap(r))
      throw Error(ErrorKind::OutOfOverlap,
                  "point outside overlap of '" + from_patch + "' and '" + to_patch + "'");
  }

  Matrix at(const RealVector& r) const {
    require_in_overlap(r);
    return g_fn(r);
  }

  std::vector<Matrix> partials(const RealVector& r) const {
    require_in_overlap(r);
    if (partials_fn) return (*partials_fn)(r);
    return central_partials(g_fn, r, fd_step);
  }
};

inline TransitionFunctionField constant_transition(std::string from, std::string to, Matrix g) {
  TransitionFunctionField t;
  t.from_patch = std::move(from);
  t.to_patch = std::move(to);
  t.dim = g.rows();
  t.g_fn = [g](const RealVector&) { return g; };
  t.partials_fn = [g](const RealVector& r) {
    return std::vector<Matrix>(static_cast<std::size_t>(r.size()), Matrix::Zero(g.rows(), g.cols()));
  };
  return t;
}

}  // namespace covdyn
