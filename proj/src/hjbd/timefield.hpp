#pragma once

#include "hjbd/common.hpp"

#include <string>
#include <vector>

namespace hjbd {

/// Field-valued function on the uniform grid t0 = tau_0 < ... < tau_N = t1,
/// linearly interpolated in between.
class TimeField {
 public:
  TimeField() = default;
  TimeField(double t0, double t1, std::vector<Field> frames);

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  std::size_t steps() const { return frames_.empty() ? 0 : frames_.size() - 1; }
  std::size_t points() const { return frames_.empty() ? 0 : static_cast<std::size_t>(frames_[0].size()); }
  double dt() const { return steps() == 0 ? 0.0 : (t1_ - t0_) / static_cast<double>(steps()); }
  double time(std::size_t i) const;

  const std::vector<Field>& frames() const { return frames_; }
  const Field& frame(std::size_t i) const { return frames_.at(i); }
  Field& frame(std::size_t i) { return frames_.at(i); }
  const Field& back() const { return frames_.back(); }

  /// Linear interpolation, clamped to the grid ends.
  Field at(double t) const;

  /// Grid index of t; throws Error(grid_mismatch) if t is not a node.
  std::size_t index_of(double t) const;

  bool same_grid(const TimeField& other) const;

  /// Time derivative per frame: centered in the interior, second-order one
  /// sided at both ends (first order when there is a single step).
  TimeField time_derivative() const;

  double min_value() const;
  double max_value() const;

 private:
  double t0_ = 0.0;
  double t1_ = 0.0;
  std::vector<Field> frames_;
};

/// Applies f to every frame.
template <typename Fn>
TimeField map_frames(const TimeField& field, Fn&& fn) {
  std::vector<Field> out;
  out.reserve(field.frames().size());
  for (std::size_t i = 0; i < field.frames().size(); ++i) out.push_back(fn(field.time(i), field.frame(i)));
  return TimeField(field.t0(), field.t1(), std::move(out));
}

void write_timefield_csv(const TimeField& field, const std::vector<std::string>& ids, const std::string& path);
std::string timefield_csv(const TimeField& field, const std::vector<std::string>& ids);

/// Reads rows (time, point, value). Point ids are matched against ids when
/// given, otherwise they must be 0..n-1.
TimeField read_timefield_csv(const std::string& path, const std::vector<std::string>& ids = {});

/// Linear resampling onto another uniform grid.
TimeField resample(const TimeField& field, double t0, double t1, std::size_t steps);

}  // namespace hjbd
