#pragma once

#include "hjbd/integrator.hpp"
#include "hjbd/potential.hpp"
#include "hjbd/space.hpp"
#include "hjbd/timefield.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hjbd {

/// Densities rho_tau with respect to m on a time grid.
struct MeasureCurve {
  TimeField density;
  double c1 = 0.0;  // sup of the densities over the grid

  static MeasureCurve from_densities(TimeField density);
};

/// Drift term of the generator A phi = 1/2 Delta phi + drift(phi).
/// potential: Gamma(V, phi). doob: Gamma(phi, w) / w.
struct DriftTerm {
  enum class Kind { potential, doob };
  Kind kind = Kind::potential;
  TimeField field;

  static DriftTerm potential(TimeField v) { return {Kind::potential, std::move(v)}; }
  static DriftTerm doob(TimeField w) { return {Kind::doob, std::move(w)}; }

  Field apply(const Space& space, const Field& field_frame, const Field& phi) const;
  /// Off-diagonal jump rates q(x, y) of the generator for one frame of the field.
  Matrix rates(const Space& space, const Field& field_frame) const;
};

/// A test function and its exact time derivative on a grid.
struct TestFunction {
  std::string name;
  TimeField phi;
  TimeField dphi;
};

double drift_norm(const Space& space, const MeasureCurve& mu, const TimeField& v);

/// Forward equation d/dtau pi = A^T pi for the mass vector pi = rho m.
MeasureCurve solve_fp_forward(const Space& space, const DriftTerm& drift, const Field& rho_start, double t0,
                              double t1, std::size_t steps, const StepControl& control = {});

/// [sum phi rho m]_{t0}^{t1} - int sum (dphi + A phi) rho m, trapezoid in time.
double weak_fp_residual(const Space& space, const DriftTerm& drift, const MeasureCurve& mu, const TestFunction& phi);

/// A test function given by closures, sampled onto a grid on demand.
struct TestFamilyMember {
  std::string name;
  std::function<Field(double)> value;
  std::function<Field(double)> deriv;

  TestFunction sample(double t0, double t1, std::size_t steps) const;
};

/// Indicators (and enveloped indicators), the lowest five eigenvectors, their
/// products with envelopes vanishing at both ends, and 20 random smooth fields.
std::vector<TestFamilyMember> polling_set(const Space& space, double t0, double t1, std::uint64_t seed = 20240607);

struct PollResult {
  double max_abs = 0.0;
  std::string worst;
};

/// Largest |weak_fp_residual| over a polling set.
PollResult max_weak_residual(const Space& space, const DriftTerm& drift, const MeasureCurve& mu,
                             const std::vector<TestFamilyMember>& family);

struct ConjugateResult {
  TimeField f;           // f^send(G, tau, .) for tau in [w.t0, send]
  double l1_growth = 0;  // max_tau |f|_{L1(m)} / |G|_{L1(m)}
};

/// psi(send) = G w(send) evolved backward by the Schroedinger equation and
/// divided by w. send must be a grid time of w.
ConjugateResult solve_conjugate(const Space& space, const Potential& potential, const TimeField& w, const Field& G,
                                double send, const StepControl& control = {});

/// M[x][y] = f^send(1_y, t, x); t and send must be grid times of w.
Matrix kernel_measures(const Space& space, const Potential& potential, const TimeField& w, double t, double send,
                       const StepControl& control = {});

/// rho_{i+1} m = M(tau_i, tau_{i+1})^T (rho_i m) on the grid of w.
MeasureCurve construct_fp_solution(const Space& space, const Potential& potential, const TimeField& w,
                                   const Field& rho_start, const StepControl& control = {});

/// max over the family of int sum |Gamma(log w, phi) - Gamma(phi, w) / w| rho m,
/// the part of the weak residual with drift -u that the exact Doob term removes.
double drift_mismatch(const Space& space, const TimeField& w, const MeasureCurve& mu,
                      const std::vector<TestFamilyMember>& family);

/// J = int sum [1/2 Gamma(V, V) - F] rho m dtau + sum u0 rho_end m.
double value_functional(const Space& space, const Potential& potential, const Field& u0, const TimeField& v,
                        const MeasureCurve& mu);

struct DriftRecord {
  std::string id;
  double j = 0.0;
  double gap = 0.0;          // J - sum u(t) rho_t m
  double gap_optimal = 0.0;  // J - J(-u)
  double fp_residual_max = 0.0;
  double c1 = 0.0;
  double norm = 0.0;
};

struct ValueReport {
  double baseline = 0.0;   // sum u(t) rho_t m
  double j_optimal = 0.0;  // J(-u)
  double eps_report = 0.0;
  double defect_term = 0.0;
  double quadrature_term = 0.0;
  std::vector<DriftRecord> drifts;
  bool ordering_ok = true;  // J(V) >= J(-u) - eps for every drift
};

/// Evaluates J for every drift against its forward curve and the bound
/// J(V) >= sum u(t) rho_t m - eps_report.
ValueReport verify_value_inequality(const Space& space, const Potential& potential, const TimeField& u,
                                    const std::vector<std::pair<std::string, TimeField>>& drifts,
                                    const Field& rho_start, const StepControl& control = {});

/// |d/ds f^s(G, t, .) + d/dt f^s(G, t, .)| at t = s by second-order one-sided
/// differences with step stride * dt in both slots.
double conjugate_time_derivative_check(const Space& space, const Potential& potential, const TimeField& w,
                                       const Field& G, double s, std::size_t stride,
                                       const StepControl& control = {});

}  // namespace hjbd
