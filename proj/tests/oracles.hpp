#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library's numerical routines; only the data types are shared.

#include "hjbd/space.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using hjbd::Field;
using hjbd::Matrix;

inline constexpr double kPi = std::numbers::pi;

/// Generator matrix read straight off the conductance and measure arrays.
inline Matrix generator(const hjbd::Space& s) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y) continue;
      l(x, y) = s.conductance()(x, y) / s.measure()(x);
      l(x, x) -= l(x, y);
    }
  }
  return l;
}

/// 1/2 sum_{x,y} c(x,y) (f(x)-f(y)) (g(x)-g(y)) by the double sum.
inline double double_sum_energy(const hjbd::Space& s, const Field& f, const Field& g) {
  double e = 0.0;
  const auto n = static_cast<Eigen::Index>(s.size());
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) e += 0.5 * s.conductance()(x, y) * (f(x) - f(y)) * (g(x) - g(y));
  return e;
}

/// Pointwise carre du champ by its defining sum.
inline Field carre(const hjbd::Space& s, const Field& f, const Field& g) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Field out = Field::Zero(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) out(x) += s.conductance()(x, y) * (f(x) - f(y)) * (g(x) - g(y));
    out(x) /= 2.0 * s.measure()(x);
  }
  return out;
}

/// exp(h/2 Delta) by Eigen's general matrix exponential.
inline Matrix heat(const hjbd::Space& s, double h) { return (0.5 * h * generator(s)).exp(); }

/// Heat kernel of cycle(n) with unit scaling from its Fourier series.
inline Matrix cycle_heat_fourier(int n, double h) {
  Matrix k(n, n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) {
        const double theta = 2.0 * kPi * j / n;
        sum += std::exp(-h * n * n * (1.0 - std::cos(theta))) * std::cos(theta * (x - y));
      }
      k(x, y) = sum / n;
    }
  }
  return k;
}

/// Eigenvalue of -Delta on cycle(n) belonging to sin(2 pi k x / n).
inline double cycle_eigenvalue(int n, int k) { return 2.0 * n * n * (1.0 - std::cos(2.0 * kPi * k / n)); }

/// w(t) = exp(|t| (1/2 Delta + F)) w0 for a time-independent potential.
inline Field schrodinger(const hjbd::Space& s, const Field& F, const Field& w0, double t) {
  const Matrix a = 0.5 * generator(s) + Matrix(F.asDiagonal());
  return (-t * a).exp() * w0;
}

/// Two-point space with m = (1/2, 1/2) and c01 = c.
inline hjbd::Space two_point(double c = 1.0) {
  Field m(2);
  m << 0.5, 0.5;
  return hjbd::make_graph_space(m, {{0, 1, c, 1.0}});
}

/// Connected graph: a random spanning tree plus extra random edges, random
/// conductances and a random normalized measure.
inline hjbd::Space random_graph(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.2, 2.0);
  std::vector<hjbd::Edge> edges;
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t u = std::uniform_int_distribution<std::size_t>(0, v - 1)(gen);
    edges.push_back({u, v, unit(gen), unit(gen)});
    used[u][v] = used[v][u] = true;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = std::uniform_int_distribution<std::size_t>(0, n - 1)(gen);
    const std::size_t b = std::uniform_int_distribution<std::size_t>(0, n - 1)(gen);
    if (a == b || used[a][b]) continue;
    edges.push_back({std::min(a, b), std::max(a, b), unit(gen), unit(gen)});
    used[a][b] = used[b][a] = true;
  }
  Field m(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = unit(gen);
  m /= m.sum();
  return hjbd::make_graph_space(m, edges);
}

inline Field random_field(std::size_t n, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Field f(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = d(gen);
  return f;
}

/// a + b sin or cos (2 pi k x / n).
inline Field mode(int n, double a, double b, int k, bool use_sin) {
  Field f(n);
  for (int x = 0; x < n; ++x) {
    const double arg = 2.0 * kPi * k * x / n;
    f(x) = a + b * (use_sin ? std::sin(arg) : std::cos(arg));
  }
  return f;
}

/// Squared W2 between uniform measures on two k-point lists by trying every
/// matching (Birkhoff: some optimal plan is a permutation).
inline double uniform_w2_squared(const Matrix& d, std::vector<std::size_t> from, const std::vector<std::size_t>& to) {
  std::sort(from.begin(), from.end());
  double best = INFINITY;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) c += d(from[i], to[i]) * d(from[i], to[i]);
    best = std::min(best, c / static_cast<double>(from.size()));
  } while (std::next_permutation(from.begin(), from.end()));
  return best;
}

}  // namespace oracle
