#include "hjbd/heat.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace hjbd;

TEST(HeatKernel, ZeroTimeIsIdentity) {
  const Space s = make_gasket(2);
  EXPECT_EQ(heat_kernel(s, 0.0).entries, Matrix::Identity(15, 15));
}

TEST(HeatKernel, LongTimeRowsApproachMeasure) {
  const Space s = make_cycle(8);
  const Matrix k = heat_kernel(s, 100.0).entries;
  for (Eigen::Index x = 0; x < 8; ++x) EXPECT_LE((k.row(x).transpose() - s.measure()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(HeatKernel, TwoPointHandValue) {
  const Space s = oracle::two_point();
  for (double h : {0.01, 0.3, 2.0}) {
    const Matrix k = heat_kernel(s, h).entries;
    EXPECT_NEAR(k(0, 0), 0.5 * (1.0 + std::exp(-2.0 * h)), 1e-14);
    Field f(2);
    f << 1.0, 0.0;
    const Field pf = semigroup_apply(s, h, f);
    EXPECT_NEAR(pf(0), k(0, 0), 1e-15);
    EXPECT_NEAR(pf(1), k(1, 0), 1e-15);
  }
}

TEST(HeatKernel, CycleMatchesFourierSeries) {
  for (int n : {8, 16, 33}) {
    const Space s = make_cycle(n);
    for (double h : {1e-3, 0.05, 0.7}) {
      const Matrix ref = oracle::cycle_heat_fourier(n, h);
      EXPECT_LE((heat_kernel(s, h, ExpMethod::pade).entries - ref).cwiseAbs().maxCoeff(), 1e-12) << n << " " << h;
      EXPECT_LE((heat_kernel(s, h, ExpMethod::spectral).entries - ref).cwiseAbs().maxCoeff(), 1e-12) << n << " " << h;
    }
  }
}

TEST(HeatKernel, RandomGraphsMatchGeneralExponential) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Space s = oracle::random_graph(25, seed);
    for (double h : {0.01, 0.5}) {
      const Matrix ref = oracle::heat(s, h);
      EXPECT_LE((expm_pade(0.5 * h * s.generator_matrix()) - ref).cwiseAbs().maxCoeff(), 1e-11);
      EXPECT_LE((heat_kernel(s, h, ExpMethod::spectral).entries - ref).cwiseAbs().maxCoeff(), 1e-11);
    }
  }
}

TEST(HeatKernel, StochasticReversibleAndSemigroup) {
  for (const Space& s : {make_cycle(16), make_gasket(3), make_torus2d(4), oracle::random_graph(40, 9)}) {
    const Matrix k1 = heat_kernel(s, 0.02).entries;
    const Matrix k2 = heat_kernel(s, 0.04).entries;
    EXPECT_LE((k1.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_GE(k1.minCoeff(), 0.0);
    const Matrix mk = s.measure().asDiagonal() * k1;
    EXPECT_LE((mk - mk.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((k1 * k1 - k2).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(HeatKernel, ConstantsArePreserved) {
  const Space s = make_gasket(2);
  const Field c = Field::Constant(15, -1.25);
  for (double h : {0.0, 0.1, 3.0}) EXPECT_LE(sup_norm(semigroup_apply(s, h, c) - c), 1e-13);
}

TEST(HeatKernel, GeneratorIsTheDerivativeAtZero) {
  std::mt19937_64 gen(1);
  const Space s = make_cycle(8);
  const Field f = oracle::random_field(8, gen);
  const Field target = 0.5 * generator_apply(s, f);
  const double e1 = sup_norm((semigroup_apply(s, 1e-5, f) - f) / 1e-5 - target);
  const double e2 = sup_norm((semigroup_apply(s, 5e-6, f) - f) / 5e-6 - target);
  EXPECT_NEAR(e1 / e2, 2.0, 0.1);
  const Field richardson = 2.0 * (semigroup_apply(s, 5e-6, f) - f) / 5e-6 - (semigroup_apply(s, 1e-5, f) - f) / 1e-5;
  EXPECT_LT(sup_norm(richardson - target), 0.05 * e2);
}

TEST(HeatKernel, NegativeTimeIsRejected) {
  EXPECT_THROW(heat_kernel(make_cycle(4), -1.0), Error);
}

TEST(CleanStochastic, ClampsRoundOffAndRejectsGarbage) {
  Matrix k(2, 2);
  k << 1.0 + 1e-14, -1e-14, 0.5, 0.5;
  clean_stochastic(k);
  EXPECT_GE(k.minCoeff(), 0.0);
  EXPECT_NEAR(k.row(0).sum(), 1.0, 1e-15);
  Matrix bad(2, 2);
  bad << 0.9, 0.0, 0.5, 0.5;
  EXPECT_THROW(clean_stochastic(bad), Error);
}

TEST(Spectrum, CycleEigenvaluesAndOrthonormality) {
  const int n = 12;
  const Space s = make_cycle(n);
  const Spectrum sp = generator_spectrum(s);
  EXPECT_NEAR(sp.values(0), 0.0, 1e-9);
  EXPECT_NEAR(sp.values(1), oracle::cycle_eigenvalue(n, 1), 1e-9);
  EXPECT_NEAR(sp.values(2), oracle::cycle_eigenvalue(n, 1), 1e-9);
  EXPECT_NEAR(sp.values(n - 1), oracle::cycle_eigenvalue(n, n / 2), 1e-9);
  const Matrix gram = sp.vectors.transpose() * s.measure().asDiagonal() * sp.vectors;
  EXPECT_LE((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KernelLipschitz, LimitsAndMonotoneDecrease) {
  const Space s8 = make_cycle(8);
  EXPECT_NEAR(kernel_lipschitz_diagnostic(s8, 1e-6), 1.0, 1e-3);
  EXPECT_LT(kernel_lipschitz_diagnostic(s8, 50.0), 1e-6);
  const Space s16 = make_cycle(16);
  const double a = kernel_lipschitz_diagnostic(s16, 0.01);
  const double b = kernel_lipschitz_diagnostic(s16, 0.1);
  const double c = kernel_lipschitz_diagnostic(s16, 1.0);
  EXPECT_GT(a, b);
  EXPECT_GT(b, c);
}
