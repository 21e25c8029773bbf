#include "hjbd/potential.hpp"

#include <algorithm>
#include <cmath>

namespace hjbd {

double TimeProfile::value(double t) const {
  switch (kind) {
    case Kind::constant: return params.at(0);
    case Kind::exp: return params.at(0) * std::exp(params.at(1) * t);
    case Kind::poly: {
      double acc = 0.0;
      for (auto it = params.rbegin(); it != params.rend(); ++it) acc = acc * t + *it;
      return acc;
    }
    case Kind::cos: return params.at(0) * std::cos(params.at(1) * t + params.at(2));
  }
  return 0.0;
}

double TimeProfile::derivative(double t) const {
  switch (kind) {
    case Kind::constant: return 0.0;
    case Kind::exp: return params.at(0) * params.at(1) * std::exp(params.at(1) * t);
    case Kind::poly: {
      double acc = 0.0;
      for (std::size_t k = params.size(); k-- > 1;) acc = acc * t + static_cast<double>(k) * params[k];
      return acc;
    }
    case Kind::cos: return -params.at(0) * params.at(1) * std::sin(params.at(1) * t + params.at(2));
  }
  return 0.0;
}

Potential::Potential(std::size_t n, FrameFn value, FrameFn dvalue, bool time_independent,
                     bool space_constant, std::string description)
    : n_(n),
      value_(std::move(value)),
      dvalue_(std::move(dvalue)),
      time_independent_(time_independent),
      space_constant_(space_constant),
      description_(std::move(description)) {}

Potential Potential::constant(std::size_t n, double c) {
  require(std::isfinite(c), "potential constant must be finite");
  const Field v = Field::Constant(static_cast<Eigen::Index>(n), c);
  const Field z = Field::Zero(static_cast<Eigen::Index>(n));
  return Potential(n, [v](double) { return v; }, [z](double) { return z; }, true, true, "constant");
}

Potential Potential::separable(TimeProfile profile, Field space_part) {
  require(space_part.allFinite(), "potential space part must be finite");
  const auto n = static_cast<std::size_t>(space_part.size());
  const bool flat = n > 0 && (space_part.array() == space_part(0)).all();
  const bool still = profile.kind == TimeProfile::Kind::constant;
  return Potential(
      n, [profile, space_part](double t) -> Field { return profile.value(t) * space_part; },
      [profile, space_part](double t) -> Field { return profile.derivative(t) * space_part; }, still, flat,
      "separable");
}

Potential Potential::tabulated(TimeField table) {
  const auto n = table.points();
  auto shared = std::make_shared<const TimeField>(std::move(table));
  auto value = [shared](double t) { return shared->at(t); };
  auto dvalue = [shared](double t) -> Field {
    const auto& f = *shared;
    if (f.steps() == 0 || t < f.t0() || t > f.t1()) return Field::Zero(static_cast<Eigen::Index>(f.points()));
    const auto i = std::min(static_cast<std::size_t>((t - f.t0()) / f.dt()), f.steps() - 1);
    return (f.frame(i + 1) - f.frame(i)) / f.dt();
  };
  bool flat = true;
  for (const auto& fr : shared->frames()) flat = flat && (fr.array() == fr(0)).all();
  return Potential(n, value, dvalue, shared->steps() == 0, flat, "tabulated");
}

Potential Potential::from_function(std::size_t n, FrameFn value, FrameFn dvalue, bool time_independent) {
  return Potential(n, std::move(value), std::move(dvalue), time_independent, false, "function");
}

std::vector<double> bound_sample_times(double horizon) {
  constexpr int kSamples = 1024;
  std::vector<double> times;
  for (int i = 0; i <= kSamples; ++i) times.push_back(-horizon + horizon * i / kSamples);
  return times;
}

double Potential::sup_bound(double horizon) const {
  if (time_independent_) return sup_norm(at(0.0));
  const auto times = bound_sample_times(horizon);
  double s = 0.0, slope = 0.0;
  for (double t : times) {
    s = std::max(s, sup_norm(at(t)));
    slope = std::max(slope, sup_norm(dt(t)));
  }
  // Between samples |F| can exceed the sampled maximum by at most half a
  // spacing times the slope.
  return s + 0.5 * (horizon / static_cast<double>(times.size() - 1)) * slope;
}

double Potential::c1_bound(double horizon) const {
  if (time_independent_) return sup_norm(at(0.0));
  double s = 0.0;
  for (double t : bound_sample_times(horizon)) s = std::max(s, sup_norm(at(t)) + sup_norm(dt(t)));
  return s;
}

double Potential::lipschitz_bound(const Space& space, double horizon) const {
  if (time_independent_) return lipschitz_constant(space, at(0.0));
  double s = 0.0;
  for (double t : bound_sample_times(horizon)) s = std::max(s, lipschitz_constant(space, at(t)));
  return s;
}

}  // namespace hjbd
