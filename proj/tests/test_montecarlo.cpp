#include "hjbd/fokkerplanck.hpp"
#include "hjbd/heat.hpp"
#include "hjbd/montecarlo.hpp"
#include "hjbd/parallel.hpp"
#include "hjbd/schrodinger.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace hjbd;

TEST(Rng, CounterStreamsAreReproducible) {
  CounterRng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
  CounterRng u(9);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) mean += u.uniform();
  EXPECT_NEAR(mean / 100000, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 100000));
}

TEST(Parallel, PairwiseSumMatchesCompensatedSum) {
  std::vector<double> v(10007);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / static_cast<double>(i + 1);
  long double ref = 0.0L;
  for (double x : v) ref += x;
  EXPECT_NEAR(pairwise_sum(v), static_cast<double>(ref), 1e-13);
}

TEST(Parallel, EveryIndexRunsOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw Error(ErrorCode::numerical, "boom");
               }),
               Error);
}

TEST(Paths, SameSeedSamePath) {
  const Space s = make_gasket(2);
  const PathSample a = sample_ctmc_path(s, -2.0, 3, 99);
  const PathSample b = sample_ctmc_path(s, -2.0, 3, 99);
  EXPECT_EQ(a.segments, b.segments);
  EXPECT_EQ(a.segments.front().first, -2.0);
  for (std::size_t i = 1; i < a.segments.size(); ++i) EXPECT_GT(a.segments[i].first, a.segments[i - 1].first);
}

TEST(Paths, JumpCountAndHoldingTimeFollowTheRates) {
  const Space s = make_cycle(8);
  const double r = s.jump_rate()(0);
  EXPECT_DOUBLE_EQ(r, 64.0);
  const std::size_t n = 20000;
  double jumps = 0.0, hold = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const PathSample p = sample_ctmc_path(s, -0.25, 0, stream_seed(5, i));
    jumps += static_cast<double>(p.jumps());
    if (p.jumps() > 0) hold += p.segments[1].first - p.segments[0].first;
  }
  // Poisson count with mean |t| r; the holding time is exponential, censored
  // at |t| with negligible probability e^{-16}.
  EXPECT_NEAR(jumps / n, 0.25 * r, 3.0 * std::sqrt(0.25 * r / n));
  EXPECT_NEAR(hold / n, 1.0 / r, 3.0 * (1.0 / r) / std::sqrt(static_cast<double>(n)));
}

TEST(FeynmanKac, ZeroPotentialUnitDataIsExact) {
  const Space s = make_cycle(8);
  const McEstimate e = feynman_kac_estimate(s, Potential::constant(8, 0.0), Field::Ones(8), -1.0, 2, 500, 1);
  EXPECT_EQ(e.mean, 1.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(FeynmanKac, ConstantPotentialIsExact) {
  const Space s = make_gasket(2);
  const McEstimate e = feynman_kac_estimate(s, Potential::constant(15, 0.8), Field::Ones(15), -1.5, 4, 500, 1);
  EXPECT_NEAR(e.mean, std::exp(0.8 * 1.5), 1e-12 * std::exp(1.2));
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(FeynmanKac, MatchesOdeWithinFourSigma) {
  const int n = 8;
  const Space s = make_cycle(n);
  const Potential f = Potential::separable({}, oracle::mode(n, 0.0, 1.0, 1, false));
  const Field w0 = oracle::mode(n, 1.0, 0.5, 1, true);
  const Field ref = oracle::schrodinger(s, oracle::mode(n, 0.0, 1.0, 1, false), w0, -0.5);
  for (std::size_t x : {0u, 3u, 6u}) {
    const McEstimate e = feynman_kac_estimate(s, f, w0, -0.5, x, 20000, 100 + x);
    EXPECT_LE(std::abs(e.mean - ref(static_cast<Eigen::Index>(x))), 4.0 * e.std_error) << x;
    EXPECT_GT(e.std_error, 0.0);
  }
}

TEST(FeynmanKac, TimeDependentPotentialWithinFourSigma) {
  const int n = 8;
  const Space s = make_cycle(n);
  const Potential f = Potential::separable({TimeProfile::Kind::exp, {1.0, 1.0}}, oracle::mode(n, 0.0, 1.0, 1, true));
  const Field w0 = oracle::mode(n, 1.0, 0.5, 1, false);
  const Field ref = solve_schrodinger_ode(s, f, w0, -1.0, 100).frame(0);
  const McEstimate e = feynman_kac_estimate(s, f, w0, -1.0, 2, 20000, 77);
  EXPECT_LE(std::abs(e.mean - ref(2)), 4.0 * e.std_error);
}

TEST(FeynmanKac, IndependentOfWorkerCount) {
  const Space s = make_cycle(8);
  const Potential f = Potential::separable({}, oracle::mode(8, 0.0, 1.0, 1, false));
  const Field w0 = oracle::mode(8, 1.0, 0.5, 1, true);
  setenv("HJBD_THREADS", "1", 1);
  const McEstimate a = feynman_kac_estimate(s, f, w0, -0.5, 1, 3000, 8);
  setenv("HJBD_THREADS", "4", 1);
  const McEstimate b = feynman_kac_estimate(s, f, w0, -0.5, 1, 3000, 8);
  unsetenv("HJBD_THREADS");
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(FeynmanKac, PathsOutHasOneEntryPerSample) {
  const Space s = make_cycle(4);
  std::vector<PathSample> paths;
  feynman_kac_estimate(s, Potential::constant(4, 0.0), Field::Ones(4), -0.5, 0, 50, 3, &paths);
  ASSERT_EQ(paths.size(), 50u);
  EXPECT_EQ(paths[0].segments.front().second, 0u);
}

TEST(Trotter, ZeroPotentialIsTheSemigroup) {
  std::mt19937_64 gen(1);
  const Space s = make_cycle(16);
  const Field w0 = oracle::random_field(16, gen);
  for (std::size_t slices : {1u, 7u, 32u})
    EXPECT_LE(sup_norm(trotter_product(s, Potential::constant(16, 0.0), w0, -1.0, slices) -
                       oracle::cycle_heat_fourier(16, 1.0) * w0),
              1e-12);
}

TEST(Trotter, ConstantPotentialIsExact) {
  std::mt19937_64 gen(2);
  const Space s = make_cycle(16);
  const Field w0 = oracle::random_field(16, gen);
  const Field ref = std::exp(0.4) * (oracle::cycle_heat_fourier(16, 1.0) * w0);
  for (std::size_t slices : {1u, 5u, 64u})
    EXPECT_LE(sup_norm(trotter_product(s, Potential::constant(16, 0.4), w0, -1.0, slices) - ref), 1e-12);
}

TEST(Trotter, FirstOrderConvergence) {
  const int n = 16;
  const Space s = make_cycle(n);
  const Potential f = Potential::separable({TimeProfile::Kind::cos, {1.0, 1.0, 0.0}}, oracle::mode(n, 0, 1, 1, false));
  const Field w0 = oracle::mode(n, 1.0, 0.5, 1, true);
  const Field ref = solve_schrodinger_ode(s, f, w0, -0.5, 100).frame(0);
  std::vector<double> err;
  for (std::size_t slices : {8u, 16u, 32u, 64u}) err.push_back(sup_norm(trotter_product(s, f, w0, -0.5, slices) - ref));
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    EXPECT_GE(err[i] / err[i + 1], 1.7);
    EXPECT_LE(err[i] / err[i + 1], 2.3);
  }
}

TEST(Bridge, ShortBridgeToItselfDoesNotJump) {
  const Space s = make_cycle(8);
  const PathSample p = sample_bridge_path(s, -1.0, 3, -1.0 + 1e-9, 3, 5);
  EXPECT_EQ(p.jumps(), 0u);
  EXPECT_EQ(p.end_point(), 3u);
}

TEST(Bridge, EndsAtTheRequestedPoint) {
  const Space s = make_gasket(2);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const PathSample p = sample_bridge_path(s, -1.0, 0, 0.0, 7, seed);
    EXPECT_EQ(p.end_point(), 7u);
    EXPECT_EQ(p.segments.front().second, 0u);
  }
}

TEST(Bridge, IntermediateMarginalMatchesKernelRatio) {
  const Space s = make_cycle(8);
  const double t = -0.1, send = 0.0, tau = -0.06;
  const std::size_t x = 0, y = 2;
  const BridgeSampler sampler(s, t, send);
  const Matrix a = oracle::cycle_heat_fourier(8, tau - t);
  const Matrix b = oracle::cycle_heat_fourier(8, send - tau);
  const double norm = oracle::cycle_heat_fourier(8, send - t)(x, y);
  const std::size_t n = 100000;
  std::vector<double> counts(8, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(stream_seed(31, i));
    counts[sampler.sample(x, y, rng).point_at(tau)] += 1.0;
  }
  for (Eigen::Index z = 0; z < 8; ++z) {
    const double p = a(static_cast<Eigen::Index>(x), z) * b(z, static_cast<Eigen::Index>(y)) / norm;
    EXPECT_NEAR(counts[static_cast<std::size_t>(z)] / n, p, 3.0 * std::sqrt(p * (1.0 - p) / n) + 1e-12) << z;
  }
}

TEST(Bridge, ReversedBridgeHasTheSameJumpLaw) {
  const Space s = make_cycle(8);
  const BridgeSampler sampler(s, -0.1, 0.0);
  const std::size_t n = 50000;
  double fwd = 0.0, fwd2 = 0.0, bwd = 0.0, bwd2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng r1(stream_seed(41, i)), r2(stream_seed(42, i));
    const double a = static_cast<double>(sampler.sample(0, 3, r1).jumps());
    const double b = static_cast<double>(sampler.sample(3, 0, r2).jumps());
    fwd += a;
    fwd2 += a * a;
    bwd += b;
    bwd2 += b * b;
  }
  const double va = fwd2 / n - (fwd / n) * (fwd / n);
  const double vb = bwd2 / n - (bwd / n) * (bwd / n);
  EXPECT_NEAR(fwd / n, bwd / n, 3.0 * std::sqrt((va + vb) / n));
}

TEST(Bridge, ConjugateOfOneIsOne) {
  const Space s = make_cycle(8);
  const TimeField w = solve_schrodinger_ode(s, Potential::constant(8, 0.0), Field::Ones(8), -0.5, 10);
  const McEstimate e = bridge_feynman_kac(s, Potential::constant(8, 0.0), w, Field::Ones(8), -0.5, 1, 0.0, 200, 3);
  EXPECT_NEAR(e.mean, 1.0, 1e-12);
  EXPECT_LE(e.std_error, 1e-12);
}

TEST(Bridge, HeatFlowConjugateMatchesKernel) {
  std::mt19937_64 gen(4);
  const Space s = make_cycle(8);
  const Field G = oracle::random_field(8, gen, 0.0, 1.0);
  const TimeField w = solve_schrodinger_ode(s, Potential::constant(8, 0.0), Field::Ones(8), -0.5, 10);
  const McEstimate e = bridge_feynman_kac(s, Potential::constant(8, 0.0), w, G, -0.5, 1, -0.2, 20000, 3);
  const double ref = (oracle::cycle_heat_fourier(8, 0.3) * G)(1);
  EXPECT_LE(std::abs(e.mean - ref), 4.0 * e.std_error);
}

TEST(Bridge, GenericCaseMatchesConjugateSolve) {
  const int n = 8;
  const Space s = make_cycle(n);
  const Potential f = Potential::separable({TimeProfile::Kind::cos, {1.0, 2.0, 0.0}}, oracle::mode(n, 0, 1, 1, true));
  const TimeField w = solve_schrodinger_ode(s, f, oracle::mode(n, 1.0, 0.5, 1, false), -0.5, 40);
  std::mt19937_64 gen(5);
  const Field G = oracle::random_field(8, gen, 0.5, 1.5);
  const ConjugateResult c = solve_conjugate(s, f, w, G, -0.25);
  const McEstimate e = bridge_feynman_kac(s, f, w, G, -0.5, 4, -0.25, 20000, 13);
  EXPECT_LE(std::abs(e.mean - c.f.frame(0)(4)), 4.0 * e.std_error);
}
