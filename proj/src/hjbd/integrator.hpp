#pragma once

#include "hjbd/common.hpp"

#include <functional>

namespace hjbd {

/// Right-hand side of y' = f(t, y) for a matrix-valued state.
using OdeRhs = std::function<Matrix(double, const Matrix&)>;

/// Classical four-stage Runge-Kutta with a fixed number of equal substeps;
/// t1 < t0 integrates backward.
Matrix rk4_fixed(const OdeRhs& rhs, Matrix y, double t0, double t1, int substeps);

struct StepControl {
  double rtol = 1e-12;
  int max_doublings = 12;
};

/// Integrates over [t0, t1] with at least min_substeps substeps, doubling
/// until k and 2k substeps agree to rtol (1 + |y|_inf); returns the 2k result.
/// substeps is updated to the accepted k so successive intervals can reuse it.
Matrix rk4_controlled(const OdeRhs& rhs, const Matrix& y, double t0, double t1, int& substeps,
                      const StepControl& control);

}  // namespace hjbd
