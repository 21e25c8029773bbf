#include "hjbd/montecarlo.hpp"

#include "hjbd/heat.hpp"
#include "hjbd/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace hjbd {

namespace {

constexpr std::size_t kMaxUniformJumps = 48;

std::size_t sample_index(const double* weights, std::size_t n, double total, CounterRng& rng) {
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (target < acc) return i;
  }
  require(last < n, "sampling from an empty distribution", ErrorCode::numerical);
  return last;
}

}  // namespace

std::size_t PathSample::point_at(double time) const {
  std::size_t p = segments.front().second;
  for (const auto& [entry, point] : segments) {
    if (entry > time) break;
    p = point;
  }
  return p;
}

McEstimate estimate_from_values(const std::vector<double>& values, std::uint64_t seed) {
  require(values.size() >= 2, "an estimate needs at least two samples");
  const std::size_t n = values.size();
  const double pivot = values.front();
  std::vector<double> dev(n), dev2(n);
  for (std::size_t i = 0; i < n; ++i) {
    dev[i] = values[i] - pivot;
    dev2[i] = dev[i] * dev[i];
  }
  const double s1 = pairwise_sum(dev);
  const double s2 = pairwise_sum(dev2);
  const double nn = static_cast<double>(n);
  const double var = std::max(0.0, (s2 - s1 * s1 / nn) / (nn - 1.0));
  return {pivot + s1 / nn, std::sqrt(var / nn), n, seed};
}

PathSample sample_ctmc_path(const Space& space, double t, std::size_t x, CounterRng& rng, double end) {
  require(t < end, "path needs start time before end time");
  require(x < space.size(), "start point out of range");
  PathSample path;
  path.start_time = t;
  path.end_time = end;
  path.segments.emplace_back(t, x);
  double now = t;
  std::size_t cur = x;
  const auto& rate = space.jump_rate();
  for (;;) {
    const double r = rate(cur);
    if (r <= 0.0) break;
    now += rng.exponential(r);
    if (now >= end) break;
    const auto& nbs = space.neighbors(cur);
    const double target = rng.uniform() * 2.0 * space.measure()(cur) * r;
    double acc = 0.0;
    std::size_t next = nbs.back().point;
    for (const auto& nb : nbs) {
      acc += nb.conductance;
      if (target < acc) {
        next = nb.point;
        break;
      }
    }
    cur = next;
    path.segments.emplace_back(now, cur);
  }
  return path;
}

PathSample sample_ctmc_path(const Space& space, double t, std::size_t x, std::uint64_t seed, double end) {
  CounterRng rng(seed);
  return sample_ctmc_path(space, t, x, rng, end);
}

PathIntegral::PathIntegral(const Potential& potential, double start, double end, std::size_t reference_point)
    : potential_(potential), reference_(reference_point) {
  if (potential.time_independent()) frozen_ = potential.at(0.0);
  base_ = segment(start, end, reference_);
}

double PathIntegral::segment(double a, double b, std::size_t x) const {
  if (b <= a) return 0.0;
  if (frozen_.size() > 0) return frozen_(static_cast<Eigen::Index>(x)) * (b - a);
  std::size_t panels = static_cast<std::size_t>(std::ceil((b - a) * 128.0));
  panels = std::max<std::size_t>(2, panels + (panels % 2));
  const double h = (b - a) / static_cast<double>(panels);
  double acc = potential_.at(a, x) + potential_.at(b, x);
  for (std::size_t k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * potential_.at(a + k * h, x);
  return acc * h / 3.0;
}

double PathIntegral::operator()(const PathSample& path) const {
  // Integrate relative to the reference point so that spatially constant
  // potentials give the same value on every path.
  double total = base_;
  for (std::size_t k = 0; k < path.segments.size(); ++k) {
    const auto [entry, point] = path.segments[k];
    if (point == reference_) continue;
    const double exit = k + 1 < path.segments.size() ? path.segments[k + 1].first : path.end_time;
    total += segment(entry, exit, point) - segment(entry, exit, reference_);
  }
  return total;
}

McEstimate feynman_kac_estimate(const Space& space, const Potential& potential, const Field& w0, double t,
                                std::size_t x, std::size_t n, std::uint64_t seed,
                                std::vector<PathSample>* paths_out) {
  require(t < 0.0, "Feynman-Kac estimate needs t < 0");
  require(n >= 2, "Feynman-Kac estimate needs n >= 2");
  require(x < space.size(), "start point out of range");
  require(w0.size() == static_cast<Eigen::Index>(space.size()), "w0 length differs from space");
  const PathIntegral integral(potential, t, 0.0, x);
  std::vector<double> values(n);
  if (paths_out) paths_out->assign(n, {});
  parallel_for(n, [&](std::size_t i) {
    CounterRng rng(stream_seed(seed, i));
    PathSample path = sample_ctmc_path(space, t, x, rng, 0.0);
    values[i] = std::exp(integral(path)) * w0(static_cast<Eigen::Index>(path.end_point()));
    if (paths_out) (*paths_out)[i] = std::move(path);
  });
  return estimate_from_values(values, seed);
}

Field trotter_product(const Space& space, const Potential& potential, const Field& w0, double t,
                      std::size_t n_slices) {
  require(t < 0.0, "Trotter product needs t < 0");
  require(n_slices >= 1, "Trotter product needs at least one slice");
  const double delta = -t / static_cast<double>(n_slices);
  const Matrix k = heat_kernel(space, delta).entries;
  Field v = w0;
  for (std::size_t j = n_slices; j >= 1; --j) {
    const double tau = t * (1.0 - static_cast<double>(j) / static_cast<double>(n_slices));
    v = k * ((delta * potential.at(tau)).array().exp().matrix().cwiseProduct(v));
  }
  return v;
}

BridgeSampler::BridgeSampler(const Space& space, double t, double send)
    : n_(space.size()), t_(t), send_(send) {
  require(t < send, "bridge needs t < send");
  rate_ = space.jump_rate().maxCoeff();
  slices_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(rate_ * (send - t) / 2.0)));
  delta_ = (send - t) / static_cast<double>(slices_);
  for (std::size_t j = 0; j <= slices_; ++j) {
    kernels_.push_back(heat_kernel(space, static_cast<double>(j) * delta_).entries);
  }
  const auto n = static_cast<Eigen::Index>(n_);
  Matrix r = Matrix::Identity(n, n) + 0.5 * space.generator_matrix() / rate_;
  powers_.push_back(Matrix::Identity(n, n));
  for (std::size_t k = 1; k <= kMaxUniformJumps; ++k) powers_.push_back(powers_.back() * r);
  const double lambda = rate_ * delta_;
  double w = std::exp(-lambda);
  for (std::size_t k = 0; k <= kMaxUniformJumps; ++k) {
    poisson_.push_back(w);
    w *= lambda / static_cast<double>(k + 1);
  }
}

void BridgeSampler::fill_slice(std::size_t a, std::size_t b, double begin, CounterRng& rng,
                               PathSample& path) const {
  std::vector<double> weights(kMaxUniformJumps + 1);
  for (std::size_t k = 0; k <= kMaxUniformJumps; ++k) weights[k] = poisson_[k] * powers_[k](a, b);
  double total = 0.0;
  for (double v : weights) total += v;
  const std::size_t k = sample_index(weights.data(), weights.size(), total, rng);
  if (k == 0) return;
  std::vector<double> times(k);
  for (auto& s : times) s = begin + rng.uniform() * delta_;
  std::sort(times.begin(), times.end());
  const Matrix& r = powers_[1];
  std::vector<double> step(n_);
  std::size_t cur = a;
  for (std::size_t j = 1; j <= k; ++j) {
    const Matrix& rest = powers_[k - j];
    double sum = 0.0;
    for (std::size_t z = 0; z < n_; ++z) {
      step[z] = r(cur, z) * rest(z, b);
      sum += step[z];
    }
    const std::size_t next = sample_index(step.data(), n_, sum, rng);
    if (next != cur) path.segments.emplace_back(times[j - 1], next);
    cur = next;
  }
}

PathSample BridgeSampler::sample(std::size_t x, std::size_t y, CounterRng& rng) const {
  require(x < n_ && y < n_, "bridge endpoint out of range");
  require(kernel()(x, y) > 0.0, "bridge endpoint has zero probability", ErrorCode::numerical);
  PathSample path;
  path.start_time = t_;
  path.end_time = send_;
  path.segments.emplace_back(t_, x);
  std::vector<double> weights(n_);
  std::size_t cur = x;
  for (std::size_t j = 1; j <= slices_; ++j) {
    const Matrix& ahead = kernels_[slices_ - j];
    std::size_t next = y;
    if (j < slices_) {
      double total = 0.0;
      for (std::size_t z = 0; z < n_; ++z) {
        weights[z] = kernels_[1](cur, z) * ahead(z, y);
        total += weights[z];
      }
      next = sample_index(weights.data(), n_, total, rng);
    }
    fill_slice(cur, next, t_ + static_cast<double>(j - 1) * delta_, rng, path);
    cur = next;
  }
  return path;
}

PathSample sample_bridge_path(const Space& space, double t, std::size_t x, double send, std::size_t y,
                              std::uint64_t seed) {
  BridgeSampler sampler(space, t, send);
  CounterRng rng(seed);
  return sampler.sample(x, y, rng);
}

McEstimate bridge_feynman_kac(const Space& space, const Potential& potential, const TimeField& w, const Field& G,
                              double t, std::size_t x, double send, std::size_t n, std::uint64_t seed) {
  require(n >= 2, "estimate needs n >= 2");
  require(send <= 0.0, "bridge end must be <= 0");
  const double wtx = w.at(t)(static_cast<Eigen::Index>(x));
  require(wtx > 0.0, "w(t, x) must be positive");
  const BridgeSampler sampler(space, t, send);
  const PathIntegral integral(potential, t, send, x);
  const Field terminal = G.cwiseProduct(w.at(send));
  const Field endpoint_law = sampler.kernel().row(static_cast<Eigen::Index>(x)).transpose();
  std::vector<double> values(n);
  parallel_for(n, [&](std::size_t i) {
    CounterRng rng(stream_seed(seed, i));
    const std::size_t y = sample_index(endpoint_law.data(), space.size(), endpoint_law.sum(), rng);
    const PathSample path = sampler.sample(x, y, rng);
    values[i] = terminal(static_cast<Eigen::Index>(y)) * std::exp(integral(path)) / wtx;
  });
  return estimate_from_values(values, seed);
}

}  // namespace hjbd
