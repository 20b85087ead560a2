// Pure transport around circles of latitude. The loop operator is
// pseudo-unitary, so its eigenvalues lie on the unit circle; their phases
// are the holonomy of the connection.

#include <cmath>
#include <complex>
#include <cstdio>

#include "covdyn/s2_system.hpp"

int main() {
  using namespace covdyn;
  s2::Model model;
  model.scales = s2::modulated_scales(model.angles);
  const StepperConfig stepper{StepMethod::Rk4Fixed, 5e-4};

  std::printf("%8s %14s %14s %12s\n", "theta", "phase_1", "phase_2", "|1-|lambda||");
  for (double theta : {0.2, 0.5, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0}) {
    s2::CurveSpec curve;
    curve.theta0 = curve.theta1 = theta;
    curve.start_patch = theta < s2::kPi / 2 ? s2::Patch::Plus : s2::Patch::Minus;
    const SystemSpec spec = s2::build_system(model, curve);
    const std::string patch = spec.curve.schedule.front().patch_id;
    const auto g = transport_operator(spec.patch(patch).connection, spec.curve, 0.0, 1.0, stepper).final_operator();
    const Eigen::ComplexEigenSolver<Matrix> es(g);
    const auto ev = es.eigenvalues();
    const double dev = std::max(std::abs(1.0 - std::abs(ev(0))), std::abs(1.0 - std::abs(ev(1))));
    std::printf("%8.3f %14.10f %14.10f %12.2e\n", theta, std::arg(ev(0)), std::arg(ev(1)), dev);
  }
}
