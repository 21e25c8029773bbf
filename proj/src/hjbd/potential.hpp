#pragma once

#include "hjbd/space.hpp"
#include "hjbd/timefield.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hjbd {

/// Scalar time profile a(t) of a separable potential a(t) b(x).
struct TimeProfile {
  enum class Kind { constant, exp, poly, cos };
  Kind kind = Kind::constant;
  // constant: {a}; exp: {a, k} -> a e^{k t}; poly: coefficients c0, c1, ...;
  // cos: {a, omega, phase} -> a cos(omega t + phase)
  std::vector<double> params{1.0};

  double value(double t) const;
  double derivative(double t) const;
};

/// The time-dependent potential F(t, x) on t <= 0.
class Potential {
 public:
  using FrameFn = std::function<Field(double)>;

  static Potential constant(std::size_t n, double c);
  static Potential separable(TimeProfile profile, Field space_part);
  static Potential tabulated(TimeField table);
  /// General potential from callables; dvalue must be the exact time derivative.
  static Potential from_function(std::size_t n, FrameFn value, FrameFn dvalue, bool time_independent = false);

  std::size_t points() const { return n_; }
  Field at(double t) const { return value_(t); }
  Field dt(double t) const { return dvalue_(t); }
  double at(double t, std::size_t x) const { return value_(t)(static_cast<Eigen::Index>(x)); }
  bool time_independent() const { return time_independent_; }
  bool space_constant() const { return space_constant_; }
  const std::string& description() const { return description_; }

  /// sup |F| over [-horizon, 0] (exact for constant and time-independent
  /// potentials, otherwise a dense-grid maximum).
  double sup_bound(double horizon) const;
  /// sup over [-horizon, 0] of (|F| + |dF/dt|), the C^1 norm used to size
  /// Duhamel windows.
  double c1_bound(double horizon) const;
  /// sup over [-horizon, 0] of the spatial Lipschitz constant.
  double lipschitz_bound(const Space& space, double horizon) const;

 private:
  Potential(std::size_t n, FrameFn value, FrameFn dvalue, bool time_independent, bool space_constant,
            std::string description);

  std::size_t n_ = 0;
  FrameFn value_;
  FrameFn dvalue_;
  bool time_independent_ = false;
  bool space_constant_ = false;
  std::string description_;
};

/// Dense sample times on [-horizon, 0] used by the bound estimates.
std::vector<double> bound_sample_times(double horizon);

}  // namespace hjbd
