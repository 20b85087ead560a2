#include <gtest/gtest.h>

#include <random>

#include "covdyn/metric.hpp"
#include "support/oracles.hpp"

namespace {

using namespace covdyn;

TEST(Metric, CachesSquareRootAndInverses) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const MetricOperator eta(oracle::random_positive(rng, n));
    EXPECT_LE(max_abs(eta.rho() * eta.rho() - eta.eta()), 1e-12);
    EXPECT_LE(max_abs(eta.rho() * eta.rho_inv() - identity(n)), 1e-12);
    EXPECT_LE(max_abs(eta.eta() * eta.eta_inv() - identity(n)), 1e-12);
  }
}

TEST(Metric, RejectsNonPositive) {
  try {
    MetricOperator bad(pauli(1));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPositiveDefinite);
  }
}

TEST(Metric, InnerProductIsConjugateSymmetricAndPositive) {
  std::mt19937_64 rng(11);
  const MetricOperator eta(oracle::random_positive(rng, 3));
  for (int trial = 0; trial < 20; ++trial) {
    const Vector a = oracle::random_state(rng, 3), b = oracle::random_state(rng, 3);
    EXPECT_LE(std::abs(eta_inner(eta, a, b) - std::conj(eta_inner(eta, b, a))), 1e-12);
    EXPECT_GT(eta_inner(eta, a, a).real(), 0.0);
    EXPECT_LE(std::abs(eta_inner(eta, a, a).imag()), 1e-12);
    // The Euclidean norm of rho psi is the eta-norm of psi.
    EXPECT_NEAR((eta.rho() * a).norm(), eta_norm(eta, a), 1e-12);
  }
}

TEST(Metric, IdentityMetricIsEuclidean) {
  const Vector a = Vector::Unit(2, 0) * Complex(0.0, 2.0);
  EXPECT_DOUBLE_EQ(eta_norm(MetricOperator::identity(2), a), 2.0);
}

TEST(Metric, InnerProductDimensionMismatch) {
  try {
    eta_inner(MetricOperator::identity(2), Vector::Zero(3), Vector::Zero(2));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimMismatch);
  }
}

TEST(Metric, HermitizationOfPseudoHermitianOperators) {
  // H = eta^-1 K with K Hermitian is eta-pseudo-Hermitian; rho H rho^-1 is Hermitian.
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const MetricOperator eta(oracle::random_positive(rng, n));
    const Matrix h = eta.eta_inv() * oracle::random_hermitian(rng, n);
    EXPECT_TRUE(is_pseudo_hermitian(h, eta, 1e-11));
    const Matrix herm = hermitize(h, eta);
    EXPECT_TRUE(is_hermitian(herm, 1e-11));
    EXPECT_LE(max_abs(dehermitize(herm, eta) - h), 1e-11);
    // i H is pseudo-anti-Hermitian.
    EXPECT_TRUE(is_pseudo_anti_hermitian(kI * h, eta, 1e-11));
  }
}

TEST(Metric, PseudoSplitIsUniqueDecomposition) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const MetricOperator eta(oracle::random_positive(rng, n));
    const Matrix m = oracle::random_hermitian(rng, n) + kI * oracle::random_hermitian(rng, n);
    const PseudoSplit s = split_pseudo(m, eta);
    EXPECT_LE(max_abs(s.hermitian_part + s.anti_hermitian_part - m), 1e-12);
    EXPECT_LE(pseudo_hermiticity_residual(s.hermitian_part, eta), 1e-10);
    EXPECT_LE(pseudo_anti_hermiticity_residual(s.anti_hermitian_part, eta), 1e-10);
  }
}

TEST(Metric, FieldDomainAndPartials) {
  MetricField f;
  f.patch_id = "half";
  f.dim = 2;
  f.domain = [](const RealVector& r) { return r(0) > 0.0; };
  const Matrix a = 2.0 * identity(2), b = 0.3 * pauli(1);
  f.eta_fn = [a, b](const RealVector& r) { return Matrix(a + r(0) * b); };
  RealVector inside(1), outside(1);
  inside << 0.5;
  outside << -0.5;
  EXPECT_LE(max_abs(f.partials(inside)[0] - b), 1e-9);
  try {
    f.at(outside);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfPatch);
  }
  const MetricField c = constant_metric("c", a);
  EXPECT_EQ(max_abs(c.partials(inside)[0]), 0.0);
}

}  // namespace
