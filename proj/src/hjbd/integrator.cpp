#include "hjbd/integrator.hpp"

#include <cmath>

namespace hjbd {

Matrix rk4_fixed(const OdeRhs& rhs, Matrix y, double t0, double t1, int substeps) {
  require(substeps >= 1, "substep count must be positive");
  const double h = (t1 - t0) / substeps;
  for (int k = 0; k < substeps; ++k) {
    const double t = t0 + k * h;
    const Matrix k1 = rhs(t, y);
    const Matrix k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    const Matrix k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    const Matrix k4 = rhs(t + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

Matrix rk4_controlled(const OdeRhs& rhs, const Matrix& y, double t0, double t1, int& substeps,
                      const StepControl& control) {
  int k = std::max(1, substeps);
  Matrix coarse = rk4_fixed(rhs, y, t0, t1, k);
  for (int d = 0; d <= control.max_doublings; ++d) {
    Matrix fine = rk4_fixed(rhs, y, t0, t1, 2 * k);
    const double scale = 1.0 + fine.cwiseAbs().maxCoeff();
    const double err = (fine - coarse).cwiseAbs().maxCoeff();
    require(std::isfinite(err), "integrator produced non-finite values", ErrorCode::numerical);
    if (err <= control.rtol * scale) {
      substeps = k;
      return fine;
    }
    k *= 2;
    coarse = std::move(fine);
  }
  throw Error(ErrorCode::numerical, "step-size rejection: local error above budget after " +
                                        std::to_string(control.max_doublings) + " halvings");
}

}  // namespace hjbd
