// Runs every acceptance criterion, prints one line each and exits nonzero on any failure.

#include <fmt/format.h>

#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "covdyn/scenario/commands.hpp"
#include "support/oracles.hpp"

namespace {

using namespace covdyn;
using namespace covdyn::scenario;

struct Outcome {
  double value;
  double tolerance;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string what;
  std::function<Outcome()> run;
};

struct Points {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> u{0.0, 1.0};

  explicit Points(std::uint64_t seed) : rng(seed) {}

  // Stays 0.05 away from the open patch edges, where the metric degenerates.
  s2::S2Point in_patch(const s2::Model& m, s2::Patch p) {
    const double lo = p == s2::Patch::Plus ? 0.05 : m.angles.theta_minus + 0.05;
    const double hi = p == s2::Patch::Plus ? m.angles.theta_plus - 0.05 : s2::kPi - 0.05;
    return {lo + (hi - lo) * u(rng), 2 * s2::kPi * u(rng), p};
  }
  s2::S2Point in_overlap(const s2::Model& m) {
    const double lo = m.angles.theta_minus + 0.05, hi = m.angles.theta_plus - 0.05;
    return {lo + (hi - lo) * u(rng), 2 * s2::kPi * u(rng), s2::Patch::Plus};
  }
  s2::Velocity velocity() { return {4 * u(rng) - 2, 4 * u(rng) - 2}; }
};

RealVector coords(const s2::S2Point& p) {
  RealVector r(2);
  r << p.theta, p.phi;
  return r;
}

s2::Model modulated_model() {
  s2::Model m;
  m.scales = s2::modulated_scales(m.angles);
  m.alpha = s2::tangent_alpha(0.3);
  m.energy = s2::constant_energy(2.0, Vec3(1.0, 0.0, 1.0));
  return m;
}

const char* kMeridian = R"({
  "name": "acceptance-meridian",
  "params": {"scales": "modulated", "alpha": {"tangent": 0.3}, "epsilon": 2.0, "y_hat": [1, 0, 1]},
  "curve": {"kind": "meridian", "phi0": 0.4},
  "stepper": {"method": "rk4-fixed", "dt": 0.001},
  "initial_state": {"re": [1, 0.5], "im": [0, 0.25]}
})";

std::vector<Criterion> criteria() {
  std::vector<Criterion> c;

  c.push_back({"AC-01", "metric compatibility of the default model, 100 points per patch", [] {
                 const s2::Model m;
                 const SystemSpec spec = s2::build_system(m, {});
                 Points pts(101);
                 double worst = 0.0;
                 for (s2::Patch p : {s2::Patch::Plus, s2::Patch::Minus}) {
                   const auto& patch = spec.patch(s2::patch_name(p));
                   for (int k = 0; k < 100; ++k)
                     worst = std::max(worst, check_metric_compatibility(patch.connection, patch.metric,
                                                                        coords(pts.in_patch(m, p))));
                 }
                 return Outcome{worst, 1e-8, "max |A^dagger - eta A eta^-1 - i d(eta) eta^-1|"};
               }});

  c.push_back({"AC-02", "eta-norm conservation on the equatorial circle, dt = 1e-3", [] {
                 const Scenario s = build_scenario(parse_config_text(R"({"stepper": {"dt": 0.001}})"));
                 const auto run = run_scenario(s);
                 double worst = 0.0;
                 for (double n : run.evolution.eta_norm) worst = std::max(worst, std::abs(n * n - 1.0));
                 return Outcome{worst, 1e-6, "max |<psi, psi>_eta - 1|"};
               }});

  c.push_back({"AC-03", "h is Hermitian along the equatorial run and matches the closed form", [] {
                 const Scenario s = build_scenario(parse_config_text(R"({"stepper": {"dt": 0.001}})"));
                 const auto run = run_scenario(s);
                 const double herm = run.max_hermiticity_residual();
                 const std::string patch = run.evolution.patch_trace.front();
                 const TimeMatrix generic = local_hermitian_hamiltonian(s.spec, patch);
                 const TimeMatrix closed = s2::closed_form_provider(s.cfg.s2, s.spec.curve)(patch);
                 double diff = 0.0;
                 for (std::size_t i = 0; i < run.evolution.times.size(); i += 10) {
                   const double t = run.evolution.times[i];
                   diff = std::max(diff, max_abs(generic(t) - closed(t)));
                 }
                 const bool ok = herm <= 1e-8;
                 return Outcome{ok ? diff : herm, ok ? 1e-7 : 1e-8,
                                fmt::format("|h - h^dagger| {:.3e} (tol 1e-8), |h - h_closed|", herm)};
               }});

  c.push_back({"AC-04", "Gamma conjugation identity, 1000 points", [] {
                 std::mt19937_64 rng(104);
                 std::uniform_real_distribution<double> th(1e-3, s2::kPi - 1e-3), ph(0.0, 2 * s2::kPi);
                 double worst = 0.0;
                 for (int k = 0; k < 1000; ++k) {
                   const double t = th(rng), p = ph(rng);
                   const Matrix G = s2::big_g_s2(t, p);
                   const auto minus = s2::gamma_forms(t, p).minus;
                   const auto refl = s2::gamma_plus_reflected(t, p);
                   for (std::size_t a = 0; a < 2; ++a)
                     worst = std::max(worst, max_abs(G.adjoint() * minus[a] * G + refl[a]));
                 }
                 return Outcome{worst, 1e-12, "max |G^dagger Gamma_- G + Gamma_+(pi - theta)|"};
               }});

  c.push_back({"AC-05", "h does not depend on the scale fields, 100 points", [] {
                 s2::Model a = modulated_model(), b = a, d = a;
                 b.scales = s2::default_scales(a.angles);
                 d.scales = s2::constant_scales(0.7, 1.9, 1.4, 0.6);
                 Points pts(105);
                 double worst = 0.0;
                 for (int k = 0; k < 100; ++k) {
                   const s2::Patch p = k % 2 ? s2::Patch::Minus : s2::Patch::Plus;
                   const auto pt = pts.in_patch(a, p);
                   const auto v = pts.velocity();
                   const Matrix ha = s2::generic_hermitian_hamiltonian(a, pt, v);
                   worst = std::max(worst, max_abs(ha - s2::generic_hermitian_hamiltonian(b, pt, v)));
                   worst = std::max(worst, max_abs(ha - s2::generic_hermitian_hamiltonian(d, pt, v)));
                 }
                 return Outcome{worst, 1e-10, "max |h(modulated) - h(other scales)|"};
               }});

  c.push_back({"AC-06", "rho psi agrees with Hermitian-representation evolution on the meridian", [] {
                 const Scenario s = build_scenario(parse_config_text(kMeridian));
                 const auto segs = plan_segments(s.spec, s.cfg.taus);
                 const auto eta_run = evolve_across_patches(s.spec, s.psi0, s.cfg.taus, s.cfg.stepper);
                 const auto herm_run = evolve_across_patches_hermitian(s.spec, s.psi0, s.cfg.taus, s.cfg.stepper);
                 double worst = 0.0;
                 std::map<std::string, MetricTrack> tracks;
                 for (const auto& seg : segs) tracks.emplace(seg.patch, patch_track(s.spec, seg.patch));
                 for (std::size_t i = 0; i < eta_run.times.size(); ++i) {
                   const Vector mapped = map_state(tracks.at(eta_run.patch_trace[i]), eta_run.times[i], eta_run.psi[i]);
                   worst = std::max(worst, (mapped - herm_run.psi[i]).norm());
                 }
                 return Outcome{worst, 1e-6, fmt::format("max |rho psi - Phi| over {} samples", eta_run.times.size())};
               }});

  c.push_back({"AC-07", "endpoint does not depend on the switch time, 5 values", [] {
                 const Scenario s = build_scenario(parse_config_text(kMeridian));
                 const auto sweep = default_tau_sweep(s.spec);
                 std::vector<Vector> ends;
                 double worst = 0.0;
                 for (const auto& taus : sweep) {
                   const Vector e = evolve_across_patches(s.spec, s.psi0, taus, s.cfg.stepper).final_state();
                   for (const auto& prev : ends) worst = std::max(worst, (prev - e).norm());
                   ends.push_back(e);
                 }
                 return Outcome{worst, 1e-6,
                                fmt::format("max pairwise endpoint distance, tau in [{:.4f}, {:.4f}]",
                                            sweep.front().front(), sweep.back().front())};
               }});

  c.push_back({"AC-08", "pure-geometric endpoint is reparametrization invariant", [] {
                 auto endpoint = [](const char* reparam) {
                   const std::string text = fmt::format(R"({{
                     "params": {{"scales": "modulated", "alpha": {{"tangent": 0.3}}, "epsilon": 0.0}},
                     "curve": {{"kind": "meridian", "phi0": 0.4, "reparam": "{}"}},
                     "stepper": {{"method": "rk4-fixed", "dt": 0.001}},
                     "initial_state": {{"re": [1, 0.5], "im": [0, 0.25]}}
                   }})", reparam);
                   const Scenario s = build_scenario(parse_config_text(text));
                   return evolve_across_patches(s.spec, s.psi0, s.cfg.taus, s.cfg.stepper).final_state();
                 };
                 return Outcome{(endpoint("linear") - endpoint("quadratic")).norm(), 1e-6,
                                "|psi_linear(1) - psi_quadratic(1)|"};
               }});

  c.push_back({"AC-09", "curvature of A0 equals half its exterior derivative, 50 points", [] {
                 const s2::Model m = modulated_model();
                 Points pts(109);
                 double worst = 0.0;
                 for (int k = 0; k < 50; ++k) {
                   const s2::Patch p = k % 2 ? s2::Patch::Minus : s2::Patch::Plus;
                   const MetricField metric = s2::metric_field(m, p);
                   const ConnectionForm a0 = a_zero_form(metric);
                   const RealVector r = coords(pts.in_patch(m, p));
                   const auto f = curvature(a0, r);
                   const auto d = exterior_derivative(a0, r);
                   worst = std::max(worst, max_abs(f[0][1] - 0.5 * d[0][1]));
                 }
                 return Outcome{worst, 1e-6, "max |F_A0 - (1/2) dA0|"};
               }});

  c.push_back({"AC-10", "transport under a constant connection is a matrix exponential", [] {
                 Matrix a1(2, 2), a2(2, 2);
                 a1 << 0.3, Complex(0.1, -0.2), Complex(0.1, 0.2), -0.4;
                 a2 << 0.5, Complex(0.0, 0.25), Complex(0.0, -0.25), 0.1;
                 ConnectionForm A;
                 A.patch_id = "flat";
                 A.dim = 2;
                 A.components_fn = [=](const RealVector&) { return std::vector<Matrix>{a1, a2}; };
                 RealVector v(2);
                 v << 0.7, -1.3;
                 CurvePath path;
                 path.position = [v](double t) { return RealVector(t * v); };
                 path.velocity = [v](double) { return v; };
                 path.schedule = {{0.0, 1.0, "flat"}};
                 const Matrix G = transport_operator(A, path, 0.0, 1.0, {StepMethod::Rk4Fixed, 1e-3}).G.back();
                 const Matrix expected = oracle::taylor_exp(-oracle::I * (v(0) * a1 + v(1) * a2));
                 return Outcome{max_abs(G - expected), 1e-8, "|G(1) - exp(-i v.A)|"};
               }});

  c.push_back({"AC-11", "G is unitary and the energy section is compatible", [] {
                 const s2::Model m = modulated_model();
                 const SystemSpec spec = s2::build_system(m, {});
                 const auto& ep = spec.patch("plus").metric;
                 const auto& em = spec.patch("minus").metric;
                 const auto g = spec.transition("plus", "minus");
                 Points pts(111);
                 double unit = 0.0;
                 std::vector<RealVector> samples;
                 for (int k = 0; k < 100; ++k) {
                   const RealVector r = coords(pts.in_overlap(m));
                   const Matrix bg = big_g(ep, em, g, r);
                   unit = std::max(unit, max_abs(bg.adjoint() * bg - identity(2)));
                   samples.push_back(r);
                 }
                 const double section = check_section_compatibility(spec.energy, g, ep, em, samples);
                 const bool ok = unit <= 1e-10;
                 return Outcome{ok ? section : unit, ok ? 1e-8 : 1e-10,
                                fmt::format("|G^dagger G - I| {:.3e} (tol 1e-10), |h~ - G^dagger h G|", unit)};
               }});

  c.push_back({"AC-12", "no-go relation holds with a moving metric", [] {
                 const Scenario s = build_scenario(parse_config_text(kMeridian));
                 double worst = 0.0, motion = 0.0;
                 for (const auto& seg : plan_segments(s.spec, {})) {
                   const auto ham = local_hamiltonian(s.spec, seg.patch);
                   const MetricTrack track = patch_track(s.spec, seg.patch);
                   for (int k = 0; k <= 20; ++k) {
                     const double t = seg.t_begin + (seg.t_end - seg.t_begin) * k / 20.0;
                     const Matrix ed = track.eta_dot(t);
                     motion = std::max(motion, max_abs(ed));
                     worst = std::max(worst, no_go_residual(ham.total(t), track.at(t), ed));
                   }
                 }
                 if (!(motion > 1e-3)) return Outcome{1.0, 0.0, "metric is not moving along the curve"};
                 return Outcome{worst, 1e-8, fmt::format("max |H^dagger - eta H eta^-1 - i eta-dot eta^-1|, max |eta-dot| {:.3f}", motion)};
               }});

  return c;
}

}  // namespace

int main() {
  int failures = 0;
  for (const auto& c : criteria()) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {std::numeric_limits<double>::infinity(), 0.0, std::string("error: ") + e.what()};
    }
    const bool pass = o.value <= o.tolerance;
    if (!pass) ++failures;
    fmt::print("{} {}  {}: {:.3e} <= {:.0e}  ({})\n", pass ? "PASS" : "FAIL", c.id, c.what, o.value, o.tolerance,
               o.detail);
  }
  fmt::print("{} of 12 criteria passed\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}
