// Carries a state from near the north pole to near the south pole. The curve
// leaves the plus patch, so the state changes trivialization once in the overlap.

#include <cstdio>

#include "covdyn/s2_system.hpp"

int main() {
  using namespace covdyn;
  s2::Model model;
  model.energy = s2::constant_energy(2.0, Vec3(1.0, 0.0, 1.0));
  s2::CurveSpec curve;
  curve.kind = s2::CurveKind::Meridian;
  curve.theta0 = s2::kPi / 6;
  curve.theta1 = 5 * s2::kPi / 6;
  curve.phi0 = 0.4;

  const SystemSpec spec = s2::build_system(model, curve);
  const StepperConfig stepper{StepMethod::Rk4Fixed, 1e-3};
  Vector psi(2);
  psi << 1.0, 0.0;
  psi /= eta_norm(spec.patch("plus").metric.at(spec.curve.position(0.0)), psi);

  for (const auto& iv : spec.curve.schedule)
    std::printf("patch %-5s  t in [%.4f, %.4f]\n", iv.patch_id.c_str(), iv.t_begin, iv.t_end);

  const auto eta_run = evolve_across_patches(spec, psi, {}, stepper);
  const auto herm_run = evolve_across_patches_hermitian(spec, psi, {}, stepper);
  const auto closed = evolve_across_patches_hermitian(spec, psi, {}, stepper, s2::closed_form_provider(model, spec.curve));

  std::printf("switch at tau = %.4f\n", eta_run.switch_times.front());
  std::printf("eta-norm drift         %.3e\n", eta_run.max_norm_drift());
  std::printf("final <H_E>            %+.12f\n", eta_run.energy_expect.back());

  const Vector mapped = map_state(patch_track(spec, "minus"), 1.0, eta_run.final_state());
  std::printf("|rho psi - Phi|        %.3e\n", (mapped - herm_run.final_state()).norm());
  std::printf("|Phi_closed - Phi|     %.3e\n", (closed.final_state() - herm_run.final_state()).norm());
  for (Eigen::Index k = 0; k < 2; ++k)
    std::printf("Phi[%ld] = %+.12f %+.12fi\n", static_cast<long>(k), herm_run.final_state()(k).real(),
                herm_run.final_state()(k).imag());
}
