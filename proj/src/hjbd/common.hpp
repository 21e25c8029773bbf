#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hjbd {

/// A real-valued function on the points of a Space, indexed like Space::ids().
using Field = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCode {
  invalid_argument = 1,
  io = 2,
  parse = 3,
  invalid_space = 4,
  numerical = 5,
  convergence = 6,
  grid_mismatch = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, const std::string& message,
                    ErrorCode code = ErrorCode::invalid_argument) {
  if (!condition) throw Error(code, message);
}

/// L2(m) inner product.
inline double inner(const Field& f, const Field& g, const Field& measure) {
  return (f.array() * g.array() * measure.array()).sum();
}

inline double l2_norm(const Field& f, const Field& measure) {
  return std::sqrt(inner(f, f, measure));
}

inline double l1_norm(const Field& f, const Field& measure) {
  return (f.array().abs() * measure.array()).sum();
}

inline double sup_norm(const Field& f) { return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff(); }

inline Field indicator(std::size_t n, std::size_t point) {
  Field f = Field::Zero(static_cast<Eigen::Index>(n));
  f(static_cast<Eigen::Index>(point)) = 1.0;
  return f;
}

}  // namespace hjbd
