#pragma once

#include "hjbd/potential.hpp"
#include "hjbd/rng.hpp"
#include "hjbd/space.hpp"
#include "hjbd/timefield.hpp"

#include <cstdint>
#include <vector>

namespace hjbd {

/// Piecewise-constant jump path: the point segments[k].second is occupied
/// from segments[k].first until the next entry time (or end_time).
struct PathSample {
  double start_time = 0.0;
  double end_time = 0.0;
  std::vector<std::pair<double, std::size_t>> segments;

  std::size_t point_at(double time) const;
  std::size_t end_point() const { return segments.back().second; }
  std::size_t jumps() const { return segments.size() - 1; }
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Mean and standard error of per-path values; constant inputs give an exact
/// mean and a zero standard error.
McEstimate estimate_from_values(const std::vector<double>& values, std::uint64_t seed);

/// Exact event-driven path of the chain generated by (1/2) Delta_E on [t, end].
PathSample sample_ctmc_path(const Space& space, double t, std::size_t x, CounterRng& rng, double end = 0.0);
PathSample sample_ctmc_path(const Space& space, double t, std::size_t x, std::uint64_t seed, double end = 0.0);

/// int F(tau, gamma_tau) dtau along a path, exact in space; time-dependent
/// potentials use composite Simpson with panels no wider than 1/128.
class PathIntegral {
 public:
  PathIntegral(const Potential& potential, double start, double end, std::size_t reference_point);
  double operator()(const PathSample& path) const;
  double segment(double a, double b, std::size_t x) const;

 private:
  const Potential& potential_;
  Field frozen_;
  std::size_t reference_;
  double base_ = 0.0;
};

/// E^{(t,x)}[exp(int_t^0 F) w0(B_0)].
McEstimate feynman_kac_estimate(const Space& space, const Potential& potential, const Field& w0, double t,
                                std::size_t x, std::size_t n, std::uint64_t seed,
                                std::vector<PathSample>* paths_out = nullptr);

/// Lie-Trotter product of heat slices and potential multipliers
/// exp((|t|/n) F(t(1 - j/n), .)).
Field trotter_product(const Space& space, const Potential& potential, const Field& w0, double t,
                      std::size_t n_slices);

/// Exact sampler for the chain conditioned on its value at send. Skeleton
/// points on a slice grid come from kernel ratios; each slice is filled by
/// uniformization conditioned on both ends.
class BridgeSampler {
 public:
  BridgeSampler(const Space& space, double t, double send);

  PathSample sample(std::size_t x, std::size_t y, CounterRng& rng) const;
  const Matrix& kernel() const { return kernels_.back(); }
  std::size_t slices() const { return slices_; }

 private:
  void fill_slice(std::size_t a, std::size_t b, double begin, CounterRng& rng, PathSample& path) const;

  std::size_t n_;
  double t_;
  double send_;
  std::size_t slices_;
  double delta_;
  double rate_;
  std::vector<Matrix> kernels_;   // K(j delta), j = 0..slices
  std::vector<Matrix> powers_;    // R^k, R = I + Q / rate
  std::vector<double> poisson_;   // Poisson(rate delta) weights
};

PathSample sample_bridge_path(const Space& space, double t, std::size_t x, double send, std::size_t y,
                              std::uint64_t seed);

/// Estimates f^send(G, t, x) = E[G(B_s) w(s, B_s) e^{int F}] / w(t, x) through
/// endpoint sampling and the conditioned bridge.
McEstimate bridge_feynman_kac(const Space& space, const Potential& potential, const TimeField& w, const Field& G,
                              double t, std::size_t x, double send, std::size_t n, std::uint64_t seed);

}  // namespace hjbd
