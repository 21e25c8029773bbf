#pragma once

#include "hjbd/integrator.hpp"
#include "hjbd/potential.hpp"
#include "hjbd/space.hpp"
#include "hjbd/timefield.hpp"

#include <Eigen/SparseCore>

#include <utility>
#include <vector>

namespace hjbd {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// (1/2) Delta_E in sparse form.
SparseMatrix half_generator(const Space& space);

/// Solves dY/dt = -((1/2) Delta_E + F(t)) Y backward from Y(t_end) = terminal
/// and returns Y on the uniform grid of `steps` intervals over [t_begin, t_end].
/// Columns of Y are independent solutions.
std::vector<Matrix> propagate_backward(const Space& space, const Potential& potential, const Matrix& terminal,
                                       double t_begin, double t_end, std::size_t steps,
                                       const StepControl& control = {});

/// Solves dZ/dt = ((1/2) Delta_E^T + F(t)) Z forward from Z(t_begin) = initial,
/// the transpose of the backward propagator: Z(t_end) = P(t_begin, t_end)^T Z(t_begin).
std::vector<Matrix> propagate_adjoint_forward(const Space& space, const Potential& potential, const Matrix& initial,
                                              double t_begin, double t_end, std::size_t steps,
                                              const StepControl& control = {});

/// Reference solution of dw/dt + (1/2) Delta_E w + F w = 0 with w(0) = w0.
TimeField solve_schrodinger_ode(const Space& space, const Potential& potential, const Field& w0, double t,
                                std::size_t steps, const StepControl& control = {});

struct DuhamelOptions {
  double tol = 1e-12;
  int max_iterations = 200;
  double safety = 0.9;
};

struct DuhamelResult {
  TimeField w;
  double window_length = 0.0;
  std::size_t windows = 0;
  int iterations = 0;                   // summed over windows
  double contraction_factor = 0.0;      // largest measured ratio of successive distances
  double window_c1_product = 0.0;       // largest T * ||F||_{C^1} over windows
  std::vector<double> window_factors;   // per-window largest ratio
};

/// Picard iteration of the Duhamel formula on windows sized by
/// T ||F||_{C^1} <= safety / 4, with trapezoid quadrature on the frame grid.
DuhamelResult solve_schrodinger_duhamel(const Space& space, const Potential& potential, const Field& w0,
                                        double t, std::size_t steps, const DuhamelOptions& options = {});

/// (min w0 e^{-T sup|F|}, max w0 e^{T sup|F|}).
std::pair<double, double> max_principle_bounds(const Potential& potential, const Field& w0, double horizon);

/// Number of grid values outside [lo, hi] by more than rel_tol relative.
std::size_t count_bound_violations(const TimeField& w, std::pair<double, double> bounds, double rel_tol = 1e-9);

/// (time, Lip(w(tau, .))) for every frame.
std::vector<std::pair<double, double>> lipschitz_profile(const Space& space, const TimeField& w);

}  // namespace hjbd
