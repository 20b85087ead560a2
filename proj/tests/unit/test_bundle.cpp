#include <gtest/gtest.h>

#include <cmath>

#include "covdyn/bundle.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace {

using namespace covdyn;

const StepperConfig kFine{StepMethod::Rk4Fixed, 1e-3};

// Patch p is {x > -0.6}, patch q is {x < 0}. The q data is generated from p by an
// affine, non-unitary transition g, so the pair is consistent by construction.
struct TwoPatch {
  SystemSpec spec;
  TransitionFunctionField g;
  double overlap_begin, overlap_end;  // curve times spent in both patches
};

TwoPatch two_patch(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n = 2;
  const Matrix m0 = 1.5 * identity(n) + 0.3 * oracle::random_hermitian(rng, n) +
                    Complex(0.0, 0.2) * oracle::random_hermitian(rng, n);
  const Matrix m1 = 0.2 * oracle::random_hermitian(rng, n) + Complex(0.0, 0.2) * identity(n);
  const Matrix m2 = Complex(0.1, 0.1) * oracle::random_hermitian(rng, n);
  const auto base = fixtures::affine_bundle(seed + 1, n);

  TwoPatch out;
  out.g.from_patch = "p";
  out.g.to_patch = "q";
  out.g.dim = n;
  out.g.overlap = [](const RealVector& r) { return r(0) > -0.6 && r(0) < 0.0; };
  out.g.g_fn = [=](const RealVector& r) { return Matrix(m0 + r(0) * m1 + r(1) * m2); };
  out.g.partials_fn = MatrixListField([=](const RealVector&) { return std::vector<Matrix>{m1, m2}; });

  MetricField ep = base.metric;
  ep.patch_id = "p";
  ep.domain = [](const RealVector& r) { return r(0) > -0.6; };
  ConnectionForm ap = base.A;
  ap.domain = ep.domain;

  // g is evaluated here away from its overlap, so the unchecked g_fn is used.
  MetricField eq;
  eq.patch_id = "q";
  eq.dim = n;
  eq.domain = [](const RealVector& r) { return r(0) < 0.0; };
  eq.eta_fn = [gf = out.g.g_fn, e = base.metric](const RealVector& r) {
    const Matrix gm = gf(r);
    return Matrix(gm.adjoint() * e.eta_matrix(r) * gm);
  };
  eq.partials_fn = MatrixListField([gf = out.g.g_fn, dg = std::vector<Matrix>{m1, m2}, e = base.metric](const RealVector& r) {
    const Matrix gm = gf(r), em = e.eta_matrix(r);
    const auto de = e.partials(r);
    std::vector<Matrix> parts;
    for (std::size_t a = 0; a < 2; ++a)
      parts.push_back(dg[a].adjoint() * em * gm + gm.adjoint() * de[a] * gm + gm.adjoint() * em * dg[a]);
    return parts;
  });
  ConnectionForm aq;
  aq.patch_id = "q";
  aq.dim = n;
  aq.domain = eq.domain;
  aq.components_fn = [gf = out.g.g_fn, dg = std::vector<Matrix>{m1, m2}, A = base.A](const RealVector& r) {
    const Matrix gm = gf(r), gi = gm.inverse();
    auto comps = A.at(r);
    for (std::size_t a = 0; a < comps.size(); ++a) comps[a] = gi * comps[a] * gm - kI * gi * dg[a];
    return comps;
  };

  SystemSpec& s = out.spec;
  s.patches = {{"p", ep, ap}, {"q", eq, aq}};
  s.transitions = {out.g};
  s.curve = fixtures::arc();
  out.overlap_begin = std::acos(0.625) / 3.0;   // x = 0
  out.overlap_end = std::acos(-0.125) / 3.0;    // x = -0.6
  s.curve.schedule = {{0.0, out.overlap_end, "p"}, {out.overlap_begin, 1.0, "q"}};
  Matrix h_e(2, 2);
  h_e << 0.7, Complex(0.2, -0.4), Complex(0.2, 0.4), -0.3;
  s.energy.authoring_patch = "p";
  s.energy.hermitian_form["p"] = [h_e](const RealVector&) { return h_e; };
  // Written out with the unchecked g_fn so the field exists on all of q, not only the overlap.
  s.energy.hermitian_form["q"] = [h_e, gf = out.g.g_fn, e = base.metric, eq](const RealVector& r) {
    const Matrix G = e.at(r).rho() * gf(r) * eq.at(r).rho_inv();
    return Matrix(G.adjoint() * h_e * G);
  };
  return out;
}

RealVector overlap_point(const TwoPatch& b, double frac) {
  return b.spec.curve.position(b.overlap_begin + frac * (b.overlap_end - b.overlap_begin));
}

TEST(Bundle, StoredTransitionIsInvertedOnRequest) {
  const auto b = two_patch(1);
  const RealVector r = overlap_point(b, 0.4);
  const auto fwd = b.spec.transition("p", "q"), back = b.spec.transition("q", "p");
  EXPECT_EQ(back.from_patch, "q");
  EXPECT_LE(max_abs(back.at(r) * fwd.at(r) - identity(2)), 1e-14);
  const auto parts = back.partials(r);
  for (Eigen::Index a = 0; a < 2; ++a) {
    const Matrix fd = oracle::derivative(
        [&](double x) {
          RealVector s = r;
          s(a) = x;
          return back.g_fn(s);
        },
        r(a), 1e-4);
    EXPECT_LE(max_abs(parts[static_cast<std::size_t>(a)] - fd), 1e-10);
  }
  try {
    b.spec.transition("p", "elsewhere");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfOverlap);
  }
}

TEST(Bundle, TransitionOutsideOverlapIsRejected) {
  const auto b = two_patch(2);
  RealVector r(2);
  r << 0.1, 0.0;
  try {
    b.g.at(r);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfOverlap);
  }
}

TEST(Bundle, MetricsAndBigGAreConsistent) {
  const auto b = two_patch(3);
  const auto& ep = b.spec.patch("p").metric;
  const auto& eq = b.spec.patch("q").metric;
  for (double f : {0.1, 0.5, 0.9}) {
    const RealVector r = overlap_point(b, f);
    EXPECT_LE(max_abs(tilde_eta(b.g, ep, r) - eq.eta_matrix(r)), 1e-12);
    const Matrix bg = big_g(ep, eq, b.g, r);
    EXPECT_TRUE(is_unitary(bg, 1e-12));
    EXPECT_FALSE(is_unitary(b.g.at(r), 1e-3));
  }
}

TEST(Bundle, InconsistentMetricGivesNonUnitaryBigG) {
  const auto b = two_patch(4);
  const RealVector r = overlap_point(b, 0.5);
  const MetricField wrong = constant_metric("q", identity(2));
  const Matrix bg = big_g(b.spec.patch("p").metric, wrong, b.g, r);
  EXPECT_FALSE(is_unitary(bg, 1e-6));
  try {
    transform_observable(pauli(3), bg);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotUnitary);
  }
}

TEST(Bundle, GaugedConnectionStaysCompatible) {
  const auto b = two_patch(5);
  const auto& q = b.spec.patch("q");
  for (double t : {0.35, 0.6, 0.9}) {
    const RealVector r = b.spec.curve.position(t);
    EXPECT_LE(check_metric_compatibility(q.connection, q.metric, r), 1e-10);
  }
  const RealVector r = overlap_point(b, 0.3);
  const auto library = gauge_transform_connection(b.spec.patch("p").connection, b.g, r);
  const auto direct = q.connection.at(r);
  for (std::size_t a = 0; a < 2; ++a) EXPECT_LE(max_abs(library[a] - direct[a]), 1e-13);
}

TEST(Bundle, SectionCompatibility) {
  const auto b = two_patch(6);
  std::vector<RealVector> samples;
  for (int k = 1; k < 10; ++k) samples.push_back(overlap_point(b, k / 10.0));
  const auto& ep = b.spec.patch("p").metric;
  const auto& eq = b.spec.patch("q").metric;
  EXPECT_LE(check_section_compatibility(b.spec.energy, b.g, ep, eq, samples), 1e-12);
  const ObservableSection pushed = push_forward(b.spec.energy, b.g, ep, eq);
  for (const auto& r : samples) EXPECT_LE(max_abs(pushed.at("q", r) - b.spec.energy.at("q", r)), 1e-12);
  ObservableSection bad = b.spec.energy;
  bad.hermitian_form["q"] = [](const RealVector&) { return pauli(1); };
  EXPECT_GT(check_section_compatibility(bad, b.g, ep, eq, samples), 0.1);
}

TEST(Bundle, PlanSegments) {
  const auto b = two_patch(7);
  const auto def = plan_segments(b.spec, {});
  ASSERT_EQ(def.size(), 2u);
  EXPECT_EQ(def[0].patch, "p");
  EXPECT_EQ(def[1].patch, "q");
  EXPECT_NEAR(def[0].t_end, 0.5 * (b.overlap_begin + b.overlap_end), 1e-15);
  EXPECT_DOUBLE_EQ(def[1].t_begin, def[0].t_end);
  EXPECT_DOUBLE_EQ(def[1].t_end, 1.0);

  const auto chosen = plan_segments(b.spec, {0.4});
  EXPECT_DOUBLE_EQ(chosen[0].t_end, 0.4);

  for (const std::vector<double>& taus : {std::vector<double>{0.1}, std::vector<double>{0.9},
                                          std::vector<double>{0.4, 0.5}}) {
    try {
      plan_segments(b.spec, taus);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::TauNotInOverlap);
    }
  }
}

TEST(Bundle, SinglePatchPlan) {
  const auto a = fixtures::affine_bundle(8, 2);
  const auto spec = fixtures::single_patch_system(a, fixtures::arc(), pauli(3));
  const auto seg = plan_segments(spec, {});
  ASSERT_EQ(seg.size(), 1u);
  EXPECT_EQ(seg[0].patch, "p");
  EXPECT_DOUBLE_EQ(seg[0].t_begin, 0.0);
  EXPECT_DOUBLE_EQ(seg[0].t_end, 1.0);
}

TEST(Bundle, TransformedHamiltonianMatchesTargetPatch) {
  const auto b = two_patch(9);
  const TimeMatrix Hp = local_hamiltonian(b.spec, "p").total_fn();
  const TimeMatrix Hq = local_hamiltonian(b.spec, "q").total_fn();
  const TimeMatrix g_t = [&](double t) { return b.g.g_fn(b.spec.curve.position(t)); };
  for (double f : {0.2, 0.5, 0.8}) {
    const double t = b.overlap_begin + f * (b.overlap_end - b.overlap_begin);
    EXPECT_LE(max_abs(transform_hamiltonian(Hp, g_t, t) - Hq(t)), 1e-8);
  }
}

TEST(Bundle, EvolutionCommutesWithTransition) {
  const auto b = two_patch(10);
  const double t0 = b.overlap_begin + 0.01, t1 = b.overlap_end - 0.01;
  Vector psi(2);
  psi << 1.0, Complex(0.3, 0.2);
  const auto in_p = evolve(local_hamiltonian(b.spec, "p").total_fn(), psi, t0, t1, kFine);
  const Vector psi_q = transform_state(b.g, b.spec.curve.position(t0), psi);
  const auto in_q = evolve(local_hamiltonian(b.spec, "q").total_fn(), psi_q, t0, t1, kFine);
  const Vector mapped = transform_state(b.g, b.spec.curve.position(t1), in_p.final_state());
  EXPECT_LE((mapped - in_q.final_state()).norm(), 1e-10);
}

TEST(Bundle, SwitchTimeDoesNotMatter) {
  const auto b = two_patch(11);
  Vector psi(2);
  psi << 0.6, Complex(0.0, 0.5);
  const auto r1 = evolve_across_patches(b.spec, psi, {b.overlap_begin + 0.02}, kFine);
  const auto r2 = evolve_across_patches(b.spec, psi, {b.overlap_end - 0.02}, kFine);
  EXPECT_LE((r1.final_state() - r2.final_state()).norm(), 1e-10);
  ASSERT_EQ(r1.switch_times.size(), 1u);
  EXPECT_GT(r1.switch_jumps[0], 1e-3);
  EXPECT_EQ(r1.patch_trace.front(), "p");
  EXPECT_EQ(r1.patch_trace.back(), "q");
  EXPECT_LE(r1.max_norm_drift(), 1e-9);
}

TEST(Bundle, RepresentationsAgreeAcrossSwitch) {
  const auto b = two_patch(12);
  Vector psi(2);
  psi << 0.6, Complex(0.0, 0.5);
  const auto eta_run = evolve_across_patches(b.spec, psi, {0.42}, kFine);
  const auto herm_run = evolve_across_patches_hermitian(b.spec, psi, {0.42}, kFine);
  const Vector mapped = map_state(patch_track(b.spec, "q"), 1.0, eta_run.final_state());
  EXPECT_LE((mapped - herm_run.final_state()).norm(), 1e-9);
  for (std::size_t i = 0; i < eta_run.energy_expect.size(); i += 50)
    EXPECT_NEAR(eta_run.energy_expect[i], herm_run.energy_expect[i], 1e-9);
}

}  // namespace
