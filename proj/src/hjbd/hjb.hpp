#pragma once

#include "hjbd/potential.hpp"
#include "hjbd/space.hpp"
#include "hjbd/timefield.hpp"

#include <functional>
#include <vector>

namespace hjbd {

/// u = -log w frame by frame; throws Error(numerical) naming the first
/// nonpositive entry.
TimeField hopf_cole(const TimeField& w);
TimeField inverse_hopf_cole(const TimeField& u);

/// A scalar map with its first two derivatives.
struct ScalarMap {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;

  static ScalarMap affine(double a, double b);
  static ScalarMap square();
  static ScalarMap neg_log();
  static ScalarMap exp();
};

/// Delta eta(f) - eta'(f) Delta f - eta''(f) Gamma(f, f).
Field chain_rule_defect(const Space& space, const Field& f, const ScalarMap& eta);

struct HjbFrameNorms {
  double time = 0.0;
  double residual_sup = 0.0;
  double residual_l2 = 0.0;
  double exact_sup = 0.0;
  double exact_l2 = 0.0;
  double defect_sup = 0.0;
};

struct HjbReport {
  TimeField residual;        // du/dt + 1/2 Delta u - 1/2 Gamma(u, u) - F
  TimeField exact_residual;  // du/dt - 1/2 e^u Delta e^{-u} - F
  TimeField chain_defect;    // chain_rule_defect(e^{-u}, -log)
  std::vector<HjbFrameNorms> frames;
  double residual_sup = 0.0;
  double exact_sup = 0.0;
  double defect_sup = 0.0;
};

HjbReport hjb_residual(const Space& space, const Potential& potential, const TimeField& u);

}  // namespace hjbd
