#include "hjbd/timefield.hpp"

#include "hjbd/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace hjbd {

TimeField::TimeField(double t0, double t1, std::vector<Field> frames)
    : t0_(t0), t1_(t1), frames_(std::move(frames)) {
  require(!frames_.empty(), "time field needs at least one frame");
  require(frames_.size() == 1 ? t0_ == t1_ : t0_ < t1_, "time grid must be increasing");
  for (const auto& f : frames_) {
    require(f.size() == frames_[0].size(), "time field frames differ in length");
  }
}

double TimeField::time(std::size_t i) const {
  if (i == steps()) return t1_;
  return t0_ + static_cast<double>(i) * dt();
}

Field TimeField::at(double t) const {
  if (steps() == 0 || t <= t0_) return frames_.front();
  if (t >= t1_) return frames_.back();
  const double s = (t - t0_) / dt();
  const auto i = std::min(static_cast<std::size_t>(s), steps() - 1);
  const double a = s - static_cast<double>(i);
  return (1.0 - a) * frames_[i] + a * frames_[i + 1];
}

std::size_t TimeField::index_of(double t) const {
  if (steps() == 0) {
    require(std::abs(t - t0_) <= 1e-12, "time is not on the grid", ErrorCode::grid_mismatch);
    return 0;
  }
  const double s = (t - t0_) / dt();
  const double r = std::round(s);
  require(r >= 0.0 && r <= static_cast<double>(steps()) && std::abs(s - r) <= 1e-8,
          "time " + std::to_string(t) + " is not on the grid", ErrorCode::grid_mismatch);
  return static_cast<std::size_t>(r);
}

bool TimeField::same_grid(const TimeField& other) const {
  const double scale = 1e-12 * std::max(1.0, std::abs(t0_));
  return steps() == other.steps() && std::abs(t0_ - other.t0_) <= scale &&
         std::abs(t1_ - other.t1_) <= scale;
}

TimeField TimeField::time_derivative() const {
  const std::size_t n = steps();
  require(n >= 1, "time derivative needs at least two frames");
  const double h = dt();
  std::vector<Field> d(n + 1);
  if (n == 1) {
    d[0] = d[1] = (frames_[1] - frames_[0]) / h;
  } else {
    d[0] = (-3.0 * frames_[0] + 4.0 * frames_[1] - frames_[2]) / (2.0 * h);
    d[n] = (3.0 * frames_[n] - 4.0 * frames_[n - 1] + frames_[n - 2]) / (2.0 * h);
    for (std::size_t i = 1; i < n; ++i) d[i] = (frames_[i + 1] - frames_[i - 1]) / (2.0 * h);
  }
  return TimeField(t0_, t1_, std::move(d));
}

double TimeField::min_value() const {
  double v = frames_[0].minCoeff();
  for (const auto& f : frames_) v = std::min(v, f.minCoeff());
  return v;
}

double TimeField::max_value() const {
  double v = frames_[0].maxCoeff();
  for (const auto& f : frames_) v = std::max(v, f.maxCoeff());
  return v;
}

std::string timefield_csv(const TimeField& field, const std::vector<std::string>& ids) {
  std::ostringstream out;
  out << kSchemaLine << "\ntime,point,value\n";
  for (std::size_t i = 0; i < field.frames().size(); ++i) {
    const auto& f = field.frame(i);
    for (Eigen::Index x = 0; x < f.size(); ++x) {
      out << format_double(field.time(i)) << ','
          << (ids.empty() ? std::to_string(x) : ids[static_cast<std::size_t>(x)]) << ','
          << format_double(f(x)) << '\n';
    }
  }
  return out.str();
}

void write_timefield_csv(const TimeField& field, const std::vector<std::string>& ids, const std::string& path) {
  write_text_file(path, timefield_csv(field, ids));
}

TimeField read_timefield_csv(const std::string& path, const std::vector<std::string>& ids) {
  const auto rows = read_csv(path);
  require(!rows.empty(), "time field file '" + path + "' has no data rows", ErrorCode::parse);
  std::map<std::string, std::size_t> id_index;
  for (std::size_t i = 0; i < ids.size(); ++i) id_index[ids[i]] = i;

  std::vector<double> times;
  std::vector<std::vector<std::pair<std::size_t, double>>> values;
  std::size_t n = ids.size();
  for (const auto& row : rows) {
    require(row.size() == 3, "time field rows are time,point,value", ErrorCode::parse);
    const double t = parse_double(row[0]);
    std::size_t point = 0;
    if (ids.empty()) {
      point = static_cast<std::size_t>(parse_double(row[1]));
      n = std::max(n, point + 1);
    } else {
      auto it = id_index.find(row[1]);
      require(it != id_index.end(), "unknown point id '" + row[1] + "'", ErrorCode::parse);
      point = it->second;
    }
    if (times.empty() || t != times.back()) {
      require(times.empty() || t > times.back(), "time field rows must be ordered by time", ErrorCode::parse);
      times.push_back(t);
      values.emplace_back();
    }
    values.back().emplace_back(point, parse_double(row[2]));
  }
  std::vector<Field> frames;
  for (const auto& frame_values : values) {
    require(frame_values.size() == n, "time field frame is incomplete", ErrorCode::parse);
    Field f = Field::Constant(static_cast<Eigen::Index>(n), std::nan(""));
    for (auto [p, v] : frame_values) f(static_cast<Eigen::Index>(p)) = v;
    require(f.allFinite(), "time field frame has missing or non-finite values", ErrorCode::parse);
    frames.push_back(std::move(f));
  }
  const std::size_t steps = frames.size() - 1;
  if (steps >= 2) {
    const double h = (times.back() - times.front()) / static_cast<double>(steps);
    for (std::size_t i = 0; i < times.size(); ++i) {
      require(std::abs(times[i] - (times.front() + i * h)) <= 1e-9 * std::max(1.0, std::abs(h)),
              "time field grid is not uniform", ErrorCode::parse);
    }
  }
  return TimeField(times.front(), times.back(), std::move(frames));
}

TimeField resample(const TimeField& field, double t0, double t1, std::size_t steps) {
  std::vector<Field> frames;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = i == steps ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(steps);
    frames.push_back(field.at(t));
  }
  return TimeField(t0, t1, std::move(frames));
}

}  // namespace hjbd
