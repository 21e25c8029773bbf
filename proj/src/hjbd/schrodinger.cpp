#include "hjbd/schrodinger.hpp"

#include "hjbd/heat.hpp"

#include <algorithm>
#include <cmath>

namespace hjbd {

SparseMatrix half_generator(const Space& space) {
  std::vector<Eigen::Triplet<double>> entries;
  const auto& m = space.measure();
  for (std::size_t x = 0; x < space.size(); ++x) {
    double total = 0.0;
    for (const auto& nb : space.neighbors(x)) {
      entries.emplace_back(x, nb.point, 0.5 * nb.conductance / m(x));
      total += nb.conductance;
    }
    entries.emplace_back(x, x, -0.5 * total / m(x));
  }
  const auto n = static_cast<Eigen::Index>(space.size());
  SparseMatrix g(n, n);
  g.setFromTriplets(entries.begin(), entries.end());
  return g;
}

std::vector<Matrix> propagate_backward(const Space& space, const Potential& potential, const Matrix& terminal,
                                       double t_begin, double t_end, std::size_t steps,
                                       const StepControl& control) {
  require(steps >= 1, "step count must be positive");
  require(t_begin < t_end, "backward solve needs t_begin < t_end");
  require(terminal.rows() == static_cast<Eigen::Index>(space.size()), "terminal data length differs from space");
  require(terminal.allFinite(), "terminal data must be finite");
  const SparseMatrix g = half_generator(space);
  const OdeRhs rhs = [&](double tau, const Matrix& y) -> Matrix {
    return -(g * y + potential.at(tau).asDiagonal() * y);
  };
  const double h = (t_end - t_begin) / static_cast<double>(steps);
  // A step no longer than 1 / (2 max r + sup|F|) keeps the RK4 amplification
  // inside its stability interval for every mode.
  const double stiffness = 2.0 * space.jump_rate().maxCoeff() + potential.sup_bound(-t_begin);
  int substeps = std::max(1, static_cast<int>(std::ceil(h * stiffness)));

  std::vector<Matrix> frames(steps + 1);
  frames[steps] = terminal;
  for (std::size_t i = steps; i-- > 0;) {
    const double hi = i + 1 == steps ? t_end : t_begin + static_cast<double>(i + 1) * h;
    const double lo = t_begin + static_cast<double>(i) * h;
    frames[i] = rk4_controlled(rhs, frames[i + 1], hi, lo, substeps, control);
  }
  return frames;
}

std::vector<Matrix> propagate_adjoint_forward(const Space& space, const Potential& potential, const Matrix& initial,
                                              double t_begin, double t_end, std::size_t steps,
                                              const StepControl& control) {
  require(steps >= 1, "step count must be positive");
  require(t_begin < t_end, "forward solve needs t_begin < t_end");
  require(initial.rows() == static_cast<Eigen::Index>(space.size()), "initial data length differs from space");
  const SparseMatrix gt = half_generator(space).transpose();
  const OdeRhs rhs = [&](double tau, const Matrix& z) -> Matrix {
    return gt * z + potential.at(tau).asDiagonal() * z;
  };
  const double h = (t_end - t_begin) / static_cast<double>(steps);
  const double stiffness = 2.0 * space.jump_rate().maxCoeff() + potential.sup_bound(-t_begin);
  int substeps = std::max(1, static_cast<int>(std::ceil(h * stiffness)));
  std::vector<Matrix> frames(steps + 1);
  frames[0] = initial;
  for (std::size_t i = 0; i < steps; ++i) {
    const double lo = t_begin + static_cast<double>(i) * h;
    const double hi = i + 1 == steps ? t_end : lo + h;
    frames[i + 1] = rk4_controlled(rhs, frames[i], lo, hi, substeps, control);
  }
  return frames;
}

TimeField solve_schrodinger_ode(const Space& space, const Potential& potential, const Field& w0, double t,
                                std::size_t steps, const StepControl& control) {
  require(t < 0.0, "solve needs t < 0");
  auto frames = propagate_backward(space, potential, w0, t, 0.0, steps, control);
  std::vector<Field> out;
  out.reserve(frames.size());
  for (auto& f : frames) out.emplace_back(f.col(0));
  out.back() = w0;
  return TimeField(t, 0.0, std::move(out));
}

DuhamelResult solve_schrodinger_duhamel(const Space& space, const Potential& potential, const Field& w0,
                                        double t, std::size_t steps, const DuhamelOptions& options) {
  require(t < 0.0, "solve needs t < 0");
  require(steps >= 1, "step count must be positive");
  require(options.tol > 0.0, "tolerance must be positive");
  require(w0.size() == static_cast<Eigen::Index>(space.size()) && w0.allFinite(), "w0 must be a finite field");
  const double horizon = -t;
  const double delta = horizon / static_cast<double>(steps);
  const double c1 = potential.c1_bound(horizon);
  const double window = c1 > 0.0 ? std::min(options.safety * 0.25 / c1, horizon) : horizon;
  const std::size_t per_window = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(window / delta + 1e-9)));
  const Matrix k = heat_kernel(space, delta).entries;
  const Field& m = space.measure();
  auto time_at = [&](std::size_t i) { return i == steps ? 0.0 : t + static_cast<double>(i) * delta; };

  DuhamelResult result;
  result.window_length = static_cast<double>(per_window) * delta;
  std::vector<Field> frames(steps + 1);
  frames[steps] = w0;
  std::vector<Field> pot(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) pot[i] = potential.at(time_at(i));

  std::size_t hi = steps;
  while (hi > 0) {
    const std::size_t lo = hi >= per_window ? hi - per_window : 0;
    const std::size_t len = hi - lo;
    ++result.windows;
    double wc1 = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      wc1 = std::max(wc1, sup_norm(pot[i]) + sup_norm(potential.dt(time_at(i))));
    }
    result.window_c1_product = std::max(result.window_c1_product, wc1 * static_cast<double>(len) * delta);

    // Local frames 0..len map to global lo..hi; iterate starts as free heat flow.
    std::vector<Field> cur(len + 1), next(len + 1), g(len + 1);
    cur[len] = frames[hi];
    for (std::size_t j = len; j-- > 0;) cur[j] = k * cur[j + 1];

    double prev_dist = -1.0;
    double window_factor = 0.0;
    int it = 0;
    for (;;) {
      ++it;
      for (std::size_t j = 0; j <= len; ++j) g[j] = pot[lo + j].cwiseProduct(cur[j]);
      Field r = cur[len] - 0.5 * delta * g[len];
      Field acc = g[len];
      next[len] = cur[len];
      for (std::size_t j = len; j-- > 0;) {
        r = k * r;
        acc = g[j] + k * acc;
        next[j] = r + delta * (acc - 0.5 * g[j]);
      }
      double dist = 0.0;
      for (std::size_t j = 0; j <= len; ++j) dist = std::max(dist, l2_norm(next[j] - cur[j], m));
      std::swap(cur, next);
      const double scale = 1.0 + l2_norm(cur[0], m);
      if (prev_dist > 1e-13 * scale) window_factor = std::max(window_factor, dist / prev_dist);
      prev_dist = dist;
      if (dist <= options.tol * scale) break;
      if (it >= options.max_iterations) {
        throw Error(ErrorCode::convergence,
                    "Duhamel iteration did not converge in " + std::to_string(it) +
                        " iterations; measured contraction factor " + std::to_string(window_factor));
      }
    }
    for (std::size_t j = 0; j < len; ++j) frames[lo + j] = cur[j];
    result.iterations += it;
    result.window_factors.push_back(window_factor);
    result.contraction_factor = std::max(result.contraction_factor, window_factor);
    hi = lo;
  }
  result.w = TimeField(t, 0.0, std::move(frames));
  return result;
}

std::pair<double, double> max_principle_bounds(const Potential& potential, const Field& w0, double horizon) {
  require(horizon >= 0.0, "horizon must be nonnegative");
  require(w0.size() > 0 && w0.minCoeff() > 0.0, "w0 must be strictly positive");
  const double growth = std::exp(horizon * potential.sup_bound(horizon));
  return {w0.minCoeff() / growth, w0.maxCoeff() * growth};
}

std::size_t count_bound_violations(const TimeField& w, std::pair<double, double> bounds, double rel_tol) {
  std::size_t count = 0;
  for (const auto& f : w.frames()) {
    for (Eigen::Index x = 0; x < f.size(); ++x) {
      if (f(x) < bounds.first * (1.0 - rel_tol) || f(x) > bounds.second * (1.0 + rel_tol)) ++count;
    }
  }
  return count;
}

std::vector<std::pair<double, double>> lipschitz_profile(const Space& space, const TimeField& w) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < w.frames().size(); ++i) out.emplace_back(w.time(i), lipschitz_constant(space, w.frame(i)));
  return out;
}

}  // namespace hjbd
