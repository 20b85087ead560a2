#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covdyn/connection.hpp"
#include "covdyn/dynamics.hpp"
#include "covdyn/metric.hpp"
#include "covdyn/transition.hpp"

namespace covdyn {

/// g^dagger eta g: the metric seen from the target trivialization.
inline Matrix tilde_eta(const TransitionFunctionField& g, const MetricField& eta, const RealVector& r) {
  const Matrix gm = g.at(r);
  return gm.adjoint() * eta.eta_matrix(r) * gm;
}

/// rho g rho~^-1, unitary whenever eta~ = g^dagger eta g.
inline Matrix big_g(const MetricField& eta, const MetricField& eta_tilde, const TransitionFunctionField& g,
                    const RealVector& r) {
  const Matrix gm = g.at(r);
  return eta.at(r).rho() * gm * eta_tilde.at(r).rho_inv();
}

inline Vector transform_state(const TransitionFunctionField& g, const RealVector& r, const Vector& psi) {
  const Matrix gm = g.at(r);
  if (psi.size() != gm.rows()) throw Error(ErrorKind::DimMismatch, "transform_state: state dimension");
  return gm.partialPivLu().solve(psi);
}

/// g^-1 H g - i g^-1 g-dot. Without `g_dot`, g-dot is a central difference in t.
inline Matrix transform_hamiltonian(const TimeMatrix& H, const TimeMatrix& g_along_curve, double t,
                                    const std::optional<TimeMatrix>& g_dot = std::nullopt,
                                    double fd_step = 1e-6) {
  const Matrix g = g_along_curve(t);
  const Matrix gi = g.inverse();
  const Matrix gd = g_dot ? (*g_dot)(t)
                          : Matrix((g_along_curve(t + fd_step) - g_along_curve(t - fd_step)) / (2.0 * fd_step));
  return gi * H(t) * g - kI * gi * gd;
}

inline Matrix transform_observable(const Matrix& o, const Matrix& big_g_value, double tol = 1e-8) {
  require_same_dim(o, big_g_value, "transform_observable");
  if (!is_unitary(big_g_value, tol))
    throw Error(ErrorKind::NotUnitary, "transform_observable: transition operator is not unitary");
  return big_g_value.adjoint() * o * big_g_value;
}

/// An observable given patchwise in Hermitian-representation form.
struct ObservableSection {
  std::string authoring_patch;
  std::map<std::string, MatrixField> hermitian_form;

  Matrix at(const std::string& patch, const RealVector& r) const {
    const auto it = hermitian_form.find(patch);
    if (it == hermitian_form.end()) throw Error(ErrorKind::OutOfPatch, "section has no field on '" + patch + "'");
    return it->second(r);
  }
};

/// Adds the target-patch field o~ = G^-1 o G generated from the authoring patch.
inline ObservableSection push_forward(ObservableSection section, const TransitionFunctionField& g,
                                      const MetricField& eta_from, const MetricField& eta_to) {
  const MatrixField source = section.hermitian_form.at(g.from_patch);
  section.hermitian_form[g.to_patch] = [source, g, eta_from, eta_to](const RealVector& r) {
    return transform_observable(source(r), big_g(eta_from, eta_to, g, r));
  };
  return section;
}

/// max over samples of |o~ - G^-1 o G|.
inline double check_section_compatibility(const ObservableSection& section, const TransitionFunctionField& g,
                                          const MetricField& eta_from, const MetricField& eta_to,
                                          const std::vector<RealVector>& samples) {
  double worst = 0.0;
  for (const auto& r : samples) {
    const Matrix bg = big_g(eta_from, eta_to, g, r);
    const Matrix expected = bg.adjoint() * section.at(g.from_patch, r) * bg;
    worst = std::max(worst, max_abs(section.at(g.to_patch, r) - expected));
  }
  return worst;
}

struct PatchModel {
  std::string id;
  MetricField metric;
  ConnectionForm connection;
};

/// Bundle data, curve and energy section.
struct SystemSpec {
  std::vector<PatchModel> patches;
  std::vector<TransitionFunctionField> transitions;
  CurvePath curve;
  ObservableSection energy;

  const PatchModel& patch(const std::string& id) const {
    for (const auto& p : patches)
      if (p.id == id) return p;
    throw Error(ErrorKind::OutOfPatch, "unknown patch '" + id + "'");
  }

  /// g_{from,to}; a stored reverse transition is inverted.
  TransitionFunctionField transition(const std::string& from, const std::string& to) const {
    for (const auto& t : transitions)
      if (t.from_patch == from && t.to_patch == to) return t;
    for (const auto& t : transitions)
      if (t.from_patch == to && t.to_patch == from) {
        TransitionFunctionField inv = t;
        inv.from_patch = from;
        inv.to_patch = to;
        inv.g_fn = [f = t.g_fn](const RealVector& r) { return Matrix(f(r).inverse()); };
        if (t.partials_fn)
          inv.partials_fn = [f = t.g_fn, d = *t.partials_fn](const RealVector& r) {
            const Matrix gi = f(r).inverse();
            auto parts = d(r);
            for (auto& p : parts) p = -gi * p * gi;
            return parts;
          };
        return inv;
      }
    throw Error(ErrorKind::OutOfOverlap, "no transition between '" + from + "' and '" + to + "'");
  }

  Eigen::Index dim() const { return patches.empty() ? 0 : patches.front().metric.dim; }
};

inline MetricTrack patch_track(const SystemSpec& spec, const std::string& patch) {
  return track_metric(spec.patch(patch).metric, spec.curve);
}

/// H = H_A + H_E on one patch, with H_E = rho^-1 h_E rho.
inline HamiltonianDecomposition local_hamiltonian(const SystemSpec& spec, const std::string& patch) {
  const PatchModel& p = spec.patch(patch);
  HamiltonianDecomposition d;
  d.geometric = [A = p.connection, curve = spec.curve](double t) { return geometric_hamiltonian(A, curve, t); };
  d.energy = [metric = p.metric, energy = spec.energy, patch, pos = spec.curve.position](double t) {
    const RealVector r = pos(t);
    return dehermitize(energy.at(patch, r), metric.at(r));
  };
  return d;
}

/// Hermitian-representation energy h_E(t) on one patch.
inline TimeMatrix local_energy_hermitian(const SystemSpec& spec, const std::string& patch) {
  return [energy = spec.energy, patch, pos = spec.curve.position](double t) { return energy.at(patch, pos(t)); };
}

/// Generic h(t) = rho H rho^-1 + i rho-dot rho^-1 on one patch.
inline TimeMatrix local_hermitian_hamiltonian(const SystemSpec& spec, const std::string& patch) {
  return hermitian_generator(local_hamiltonian(spec, patch).total_fn(), patch_track(spec, patch));
}

struct PatchSegment {
  std::string patch;
  double t_begin;
  double t_end;
};

/// Splits the curve into single-patch segments joined at switch times.
/// Missing switch times default to the midpoint of each overlap dwell interval.
inline std::vector<PatchSegment> plan_segments(const SystemSpec& spec, const std::vector<double>& taus) {
  const CurvePath& c = spec.curve;
  std::vector<PatchInterval> ivs = c.schedule;
  if (ivs.empty()) {
    if (spec.patches.size() != 1)
      throw Error(ErrorKind::OutOfPatch, "curve has no patch schedule and the bundle has several patches");
    return {{spec.patches.front().id, c.t_start, c.t_end}};
  }
  std::sort(ivs.begin(), ivs.end(), [](const auto& a, const auto& b) { return a.t_begin < b.t_begin; });
  if (ivs.size() == 1) return {{ivs.front().patch_id, c.t_start, c.t_end}};
  if (!taus.empty() && taus.size() != ivs.size() - 1)
    throw Error(ErrorKind::TauNotInOverlap, "expected " + std::to_string(ivs.size() - 1) + " switch times, got " +
                                                std::to_string(taus.size()));
  std::vector<PatchSegment> out;
  double begin = c.t_start;
  for (std::size_t k = 0; k + 1 < ivs.size(); ++k) {
    const double lo = ivs[k + 1].t_begin, hi = ivs[k].t_end;
    if (!(lo < hi))
      throw Error(ErrorKind::TauNotInOverlap, "consecutive patches '" + ivs[k].patch_id + "' and '" +
                                                  ivs[k + 1].patch_id + "' share no dwell time");
    const double tau = taus.empty() ? 0.5 * (lo + hi) : taus[k];
    const RealVector r = c.position(tau);
    const bool inside = tau > lo && tau < hi && tau > begin && spec.patch(ivs[k].patch_id).metric.domain(r) &&
                        spec.patch(ivs[k + 1].patch_id).metric.domain(r);
    if (!inside)
      throw Error(ErrorKind::TauNotInOverlap, "tau=" + std::to_string(tau) + " is not in the overlap (" +
                                                  std::to_string(lo) + ", " + std::to_string(hi) + ")");
    out.push_back({ivs[k].patch_id, begin, tau});
    begin = tau;
  }
  out.push_back({ivs.back().patch_id, begin, c.t_end});
  return out;
}

/// Evolves in the eta-representation, switching psi~ = g^-1 psi at each tau.
inline EvolutionResult evolve_across_patches(const SystemSpec& spec, const Vector& psi1,
                                             const std::vector<double>& taus, const StepperConfig& stepper) {
  const auto segments = plan_segments(spec, taus);
  EvolutionResult out;
  Vector psi = psi1;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& seg = segments[k];
    if (k > 0) {
      const double tau = seg.t_begin;
      const auto g = spec.transition(segments[k - 1].patch, seg.patch);
      const Vector switched = transform_state(g, spec.curve.position(tau), psi);
      out.switch_times.push_back(tau);
      out.switch_jumps.push_back((switched - psi).norm());
      psi = switched;
    }
    const auto ham = local_hamiltonian(spec, seg.patch);
    EvolveOptions opts;
    opts.metric = patch_track(spec, seg.patch).at;
    opts.energy = ham.energy;
    opts.patch_id = seg.patch;
    auto part = evolve(ham.total_fn(), psi, seg.t_begin, seg.t_end, stepper, opts);
    psi = part.final_state();
    out.append(std::move(part), false);
  }
  return out;
}

/// Supplies h(t) for a patch; the default is the generic construction.
using HermitianProvider = std::function<TimeMatrix(const std::string& patch)>;

/// Evolves Phi in the Hermitian representation, switching Phi~ = G^-1 Phi at each tau.
/// `psi1` is given in the eta-representation of the first patch.
inline EvolutionResult evolve_across_patches_hermitian(const SystemSpec& spec, const Vector& psi1,
                                                       const std::vector<double>& taus,
                                                       const StepperConfig& stepper,
                                                       const HermitianProvider& provider = {}) {
  const auto segments = plan_segments(spec, taus);
  EvolutionResult out;
  const auto& first = segments.front();
  Vector phi = map_state(patch_track(spec, first.patch), first.t_begin, psi1);
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& seg = segments[k];
    if (k > 0) {
      const double tau = seg.t_begin;
      const std::string& prev = segments[k - 1].patch;
      const RealVector r = spec.curve.position(tau);
      const Matrix bg = big_g(spec.patch(prev).metric, spec.patch(seg.patch).metric, spec.transition(prev, seg.patch), r);
      const Vector switched = bg.adjoint() * phi;
      out.switch_times.push_back(tau);
      out.switch_jumps.push_back((switched - phi).norm());
      phi = switched;
    }
    const TimeMatrix h = provider ? provider(seg.patch) : local_hermitian_hamiltonian(spec, seg.patch);
    EvolveOptions opts;
    opts.energy = local_energy_hermitian(spec, seg.patch);
    opts.patch_id = seg.patch;
    auto part = evolve(h, phi, seg.t_begin, seg.t_end, stepper, opts);
    phi = part.final_state();
    out.append(std::move(part), false);
  }
  return out;
}

}  // namespace covdyn
