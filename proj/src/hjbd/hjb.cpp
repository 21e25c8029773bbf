#include "hjbd/hjb.hpp"

#include <algorithm>
#include <cmath>

namespace hjbd {

TimeField hopf_cole(const TimeField& w) {
  for (std::size_t i = 0; i < w.frames().size(); ++i) {
    const auto& f = w.frame(i);
    for (Eigen::Index x = 0; x < f.size(); ++x) {
      if (!(f(x) > 0.0)) {
        throw Error(ErrorCode::numerical, "Hopf-Cole needs w > 0: w(" + std::to_string(w.time(i)) + ", " +
                                              std::to_string(x) + ") = " + std::to_string(f(x)));
      }
    }
  }
  return map_frames(w, [](double, const Field& f) -> Field { return -f.array().log().matrix(); });
}

TimeField inverse_hopf_cole(const TimeField& u) {
  return map_frames(u, [](double, const Field& f) -> Field { return (-f.array()).exp().matrix(); });
}

ScalarMap ScalarMap::affine(double a, double b) {
  return {[a, b](double r) { return a * r + b; }, [a](double) { return a; }, [](double) { return 0.0; }};
}

ScalarMap ScalarMap::square() {
  return {[](double r) { return r * r; }, [](double r) { return 2.0 * r; }, [](double) { return 2.0; }};
}

ScalarMap ScalarMap::neg_log() {
  return {[](double r) { return -std::log(r); }, [](double r) { return -1.0 / r; },
          [](double r) { return 1.0 / (r * r); }};
}

ScalarMap ScalarMap::exp() {
  return {[](double r) { return std::exp(r); }, [](double r) { return std::exp(r); },
          [](double r) { return std::exp(r); }};
}

Field chain_rule_defect(const Space& space, const Field& f, const ScalarMap& eta) {
  const Field ef = f.unaryExpr(eta.value);
  const Field d1 = f.unaryExpr(eta.d1);
  const Field d2 = f.unaryExpr(eta.d2);
  return generator_apply(space, ef) - d1.cwiseProduct(generator_apply(space, f)) -
         d2.cwiseProduct(carre_du_champ(space, f, f));
}

HjbReport hjb_residual(const Space& space, const Potential& potential, const TimeField& u) {
  require(u.points() == space.size(), "u frames differ in length from the space");
  require(potential.points() == space.size(), "potential length differs from the space");
  const TimeField du = u.time_derivative();
  const auto& m = space.measure();
  std::vector<Field> res, exact, defect;
  HjbReport report;
  for (std::size_t i = 0; i < u.frames().size(); ++i) {
    const double tau = u.time(i);
    const Field& ui = u.frame(i);
    const Field f = potential.at(tau);
    const Field w = (-ui.array()).exp().matrix();
    res.push_back(du.frame(i) + 0.5 * generator_apply(space, ui) - 0.5 * carre_du_champ(space, ui, ui) - f);
    exact.push_back(du.frame(i) - 0.5 * generator_apply(space, w).cwiseQuotient(w) - f);
    defect.push_back(chain_rule_defect(space, w, ScalarMap::neg_log()));
    HjbFrameNorms n{tau,
                    sup_norm(res.back()),
                    l2_norm(res.back(), m),
                    sup_norm(exact.back()),
                    l2_norm(exact.back(), m),
                    sup_norm(defect.back())};
    report.residual_sup = std::max(report.residual_sup, n.residual_sup);
    report.exact_sup = std::max(report.exact_sup, n.exact_sup);
    report.defect_sup = std::max(report.defect_sup, n.defect_sup);
    report.frames.push_back(n);
  }
  report.residual = TimeField(u.t0(), u.t1(), std::move(res));
  report.exact_residual = TimeField(u.t0(), u.t1(), std::move(exact));
  report.chain_defect = TimeField(u.t0(), u.t1(), std::move(defect));
  return report;
}

}  // namespace hjbd
