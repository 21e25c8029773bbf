#pragma once

#include "hjbd/space.hpp"

namespace hjbd {

enum class ExpMethod { pade, spectral };

/// K[x][y] = p_h(x, {y}), the transition probabilities of the process
/// generated by (1/2) Delta_E over a duration h.
struct KernelMatrix {
  double h = 0.0;
  Matrix entries;
};

/// exp(A) by scaling and squaring with a degree-13 Pade approximant.
Matrix expm_pade(const Matrix& a);

/// exp(h/2 Delta_E) through the m^{1/2} similarity that makes it symmetric.
Matrix expm_spectral(const Space& space, double h);

/// Clamps round-off negatives and renormalizes rows; throws Error(numerical)
/// when a row sum is off by more than 1e-10 or an entry is below -1e-12.
void clean_stochastic(Matrix& k);

KernelMatrix heat_kernel(const Space& space, double h, ExpMethod method = ExpMethod::pade);

Field semigroup_apply(const Space& space, double h, const Field& f);

/// max over conductance edges of W2(p_h(x,.), p_h(y,.)) / d(x,y).
double kernel_lipschitz_diagnostic(const Space& space, double h);

/// Eigenpairs of -Delta_E in L2(m), ascending, eigenvectors m-orthonormal.
struct Spectrum {
  Field values;
  Matrix vectors;
};
Spectrum generator_spectrum(const Space& space);

}  // namespace hjbd
