#pragma once

#include "hjbd/space.hpp"

namespace hjbd {

/// W2 between the measures p m and q m, solved exactly as a transport linear
/// program with cost d(x,y)^2. p and q are densities with respect to m.
double wasserstein2(const Space& space, const Field& p, const Field& q);

/// Optimal transport cost between two mass vectors (not densities) under an
/// arbitrary cost matrix. Masses must have equal totals.
double transport_cost(const Field& supply, const Field& demand, const Matrix& cost);

}  // namespace hjbd
