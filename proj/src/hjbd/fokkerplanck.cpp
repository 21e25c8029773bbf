#include "hjbd/fokkerplanck.hpp"

#include "hjbd/heat.hpp"
#include "hjbd/hjb.hpp"
#include "hjbd/rng.hpp"
#include "hjbd/schrodinger.hpp"

#include <algorithm>
#include <cmath>

namespace hjbd {

namespace {

constexpr double kNegativeMassTol = 1e-12;

void require_same_grid(const TimeField& a, const TimeField& b, const char* what) {
  require(a.same_grid(b), std::string("time grids differ: ") + what, ErrorCode::grid_mismatch);
}

double trapezoid(const std::vector<double>& values, double h) {
  if (values.size() < 2) return 0.0;
  double acc = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
  return acc * h;
}

// Clamps round-off negatives of a mass vector and restores its total.
Field clean_mass(Field pi) {
  const double total = pi.sum();
  for (Eigen::Index x = 0; x < pi.size(); ++x) {
    require(pi(x) >= -kNegativeMassTol * std::max(1.0, std::abs(total)),
            "density lost nonnegativity beyond round-off", ErrorCode::numerical);
    if (pi(x) < 0.0) pi(x) = 0.0;
  }
  return pi * (total / pi.sum());
}

double edge_factor(DriftTerm::Kind kind, const Field& v, std::size_t x, std::size_t y) {
  if (kind == DriftTerm::Kind::potential) return 1.0 + v(y) - v(x);
  return v(y) / v(x);
}

std::vector<Matrix> propagate_between(const Space& space, const Potential& potential, const TimeField& w,
                                      const Matrix& terminal, std::size_t lo, std::size_t hi,
                                      const StepControl& control) {
  if (lo == hi) return {terminal};
  return propagate_backward(space, potential, terminal, w.time(lo), w.time(hi), hi - lo, control);
}

}  // namespace

MeasureCurve MeasureCurve::from_densities(TimeField density) {
  MeasureCurve mu;
  mu.c1 = density.max_value();
  mu.density = std::move(density);
  return mu;
}

Field DriftTerm::apply(const Space& space, const Field& field_frame, const Field& phi) const {
  if (kind == Kind::potential) return carre_du_champ(space, field_frame, phi);
  return carre_du_champ(space, phi, field_frame).cwiseQuotient(field_frame);
}

Matrix DriftTerm::rates(const Space& space, const Field& field_frame) const {
  const auto n = static_cast<Eigen::Index>(space.size());
  Matrix q = Matrix::Zero(n, n);
  for (std::size_t x = 0; x < space.size(); ++x) {
    for (const auto& nb : space.neighbors(x)) {
      q(x, nb.point) = nb.conductance / (2.0 * space.measure()(x)) * edge_factor(kind, field_frame, x, nb.point);
    }
  }
  return q;
}

double drift_norm(const Space& space, const MeasureCurve& mu, const TimeField& v) {
  require_same_grid(mu.density, v, "drift and measure curve");
  const auto& m = space.measure();
  std::vector<double> integrand;
  for (std::size_t i = 0; i < v.frames().size(); ++i) {
    const Field& vi = v.frame(i);
    const Field density = vi.cwiseProduct(vi) + carre_du_champ(space, vi, vi);
    integrand.push_back(inner(density, mu.density.frame(i), m));
  }
  return std::sqrt(std::max(0.0, trapezoid(integrand, v.dt())));
}

MeasureCurve solve_fp_forward(const Space& space, const DriftTerm& drift, const Field& rho_start, double t0,
                              double t1, std::size_t steps, const StepControl& control) {
  require(steps >= 1 && t0 < t1, "forward solve needs t0 < t1 and steps >= 1");
  const auto& m = space.measure();
  require(rho_start.size() == m.size() && (rho_start.array() >= 0.0).all(), "initial density must be nonnegative");
  require(std::abs(inner(rho_start, Field::Ones(m.size()), m) - 1.0) <= 1e-9, "initial density must have mass 1");
  require(drift.field.points() == space.size(), "drift length differs from the space");
  const double h = (t1 - t0) / static_cast<double>(steps);

  double stiffness = 0.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const Field v = drift.field.at(t0 + static_cast<double>(i) * h);
    for (std::size_t x = 0; x < space.size(); ++x) {
      double out = 0.0;
      for (const auto& nb : space.neighbors(x)) {
        const double q = nb.conductance / (2.0 * m(x)) * edge_factor(drift.kind, v, x, nb.point);
        require(q >= 0.0, "drift makes a jump rate negative; the forward flow is not positive",
                ErrorCode::numerical);
        out += q;
      }
      stiffness = std::max(stiffness, 2.0 * out);
    }
  }

  const OdeRhs rhs = [&](double tau, const Matrix& pi) -> Matrix {
    const Field v = drift.field.at(tau);
    Matrix out = Matrix::Zero(pi.rows(), pi.cols());
    for (std::size_t x = 0; x < space.size(); ++x) {
      for (const auto& nb : space.neighbors(x)) {
        const double q = nb.conductance / (2.0 * m(x)) * edge_factor(drift.kind, v, x, nb.point);
        out.row(nb.point) += q * pi.row(x);
        out.row(x) -= q * pi.row(x);
      }
    }
    return out;
  };
  int substeps = std::max(1, static_cast<int>(std::ceil(h * stiffness)));
  std::vector<Field> frames;
  Field pi = rho_start.cwiseProduct(m);
  frames.push_back(rho_start);
  for (std::size_t i = 0; i < steps; ++i) {
    const double a = t0 + static_cast<double>(i) * h;
    const double b = i + 1 == steps ? t1 : a + h;
    Matrix next = rk4_controlled(rhs, pi, a, b, substeps, control);
    pi = clean_mass(next.col(0));
    frames.push_back(pi.cwiseQuotient(m));
  }
  return MeasureCurve::from_densities(TimeField(t0, t1, std::move(frames)));
}

double weak_fp_residual(const Space& space, const DriftTerm& drift, const MeasureCurve& mu, const TestFunction& phi) {
  const TimeField& rho = mu.density;
  require_same_grid(rho, phi.phi, "test function and measure curve");
  require_same_grid(rho, phi.dphi, "test function derivative and measure curve");
  require_same_grid(rho, drift.field, "drift and measure curve");
  const auto& m = space.measure();
  std::vector<double> integrand;
  for (std::size_t i = 0; i < rho.frames().size(); ++i) {
    const Field& p = phi.phi.frame(i);
    const Field a = phi.dphi.frame(i) + 0.5 * generator_apply(space, p) + drift.apply(space, drift.field.frame(i), p);
    integrand.push_back(inner(a, rho.frame(i), m));
  }
  const std::size_t last = rho.steps();
  const double boundary = inner(phi.phi.frame(last), rho.frame(last), m) - inner(phi.phi.frame(0), rho.frame(0), m);
  return boundary - trapezoid(integrand, rho.dt());
}

TestFunction TestFamilyMember::sample(double t0, double t1, std::size_t steps) const {
  std::vector<Field> v, d;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double tau = i == steps ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(steps);
    v.push_back(value(tau));
    d.push_back(deriv(tau));
  }
  return TestFunction{name, TimeField(t0, t1, std::move(v)), TimeField(t0, t1, std::move(d))};
}

std::vector<TestFamilyMember> polling_set(const Space& space, double t0, double t1, std::uint64_t seed) {
  const auto n = space.size();
  const double len = t1 - t0;
  const Field zero = Field::Zero(static_cast<Eigen::Index>(n));
  auto envelope = [t0, len](double tau) {
    const double s = std::sin(M_PI * (tau - t0) / len);
    return s * s;
  };
  auto envelope_dt = [t0, len](double tau) { return (M_PI / len) * std::sin(2.0 * M_PI * (tau - t0) / len); };
  auto still = [zero](const Field& e) -> TestFamilyMember {
    return {"", [e](double) { return e; }, [zero](double) { return zero; }};
  };
  auto enveloped = [&](const Field& e) -> TestFamilyMember {
    return {"", [e, envelope](double tau) -> Field { return envelope(tau) * e; },
            [e, envelope_dt](double tau) -> Field { return envelope_dt(tau) * e; }};
  };

  std::vector<TestFamilyMember> set;
  for (std::size_t y = 0; y < n; ++y) {
    set.push_back(still(indicator(n, y)));
    set.back().name = "indicator_" + std::to_string(y);
  }
  const std::size_t picks = std::min<std::size_t>(n, 8);
  for (std::size_t k = 0; k < picks; ++k) {
    const std::size_t y = k * n / picks;
    set.push_back(enveloped(indicator(n, y)));
    set.back().name = "indicator_env_" + std::to_string(y);
  }
  const Spectrum spec = generator_spectrum(space);
  const std::size_t modes = std::min<std::size_t>(n, 5);
  const Matrix basis = spec.vectors.leftCols(static_cast<Eigen::Index>(modes));
  for (std::size_t k = 0; k < modes; ++k) {
    const Field e = basis.col(static_cast<Eigen::Index>(k));
    set.push_back(still(e));
    set.back().name = "eigen_" + std::to_string(k);
    set.push_back(enveloped(e));
    set.back().name = "eigen_env_" + std::to_string(k);
  }
  CounterRng rng(seed);
  for (int r = 0; r < 20; ++r) {
    Field alpha(modes), beta(modes), omega(modes), theta(modes);
    for (std::size_t k = 0; k < modes; ++k) {
      alpha(k) = 2.0 * rng.uniform() - 1.0;
      beta(k) = 2.0 * rng.uniform() - 1.0;
      omega(k) = (0.5 + 5.5 * rng.uniform()) * M_PI / (2.0 * len);
      theta(k) = 2.0 * M_PI * rng.uniform();
    }
    TestFamilyMember member;
    member.name = "random_" + std::to_string(r);
    member.value = [=](double tau) -> Field {
      const Field c = alpha.array() + beta.array() * (omega.array() * tau + theta.array()).sin();
      return basis * c;
    };
    member.deriv = [=](double tau) -> Field {
      const Field c = beta.array() * omega.array() * (omega.array() * tau + theta.array()).cos();
      return basis * c;
    };
    set.push_back(std::move(member));
  }
  return set;
}

PollResult max_weak_residual(const Space& space, const DriftTerm& drift, const MeasureCurve& mu,
                             const std::vector<TestFamilyMember>& family) {
  PollResult out;
  const auto& rho = mu.density;
  for (const auto& member : family) {
    const double r = std::abs(weak_fp_residual(space, drift, mu, member.sample(rho.t0(), rho.t1(), rho.steps())));
    if (r >= out.max_abs) {
      out.max_abs = r;
      out.worst = member.name;
    }
  }
  return out;
}

ConjugateResult solve_conjugate(const Space& space, const Potential& potential, const TimeField& w, const Field& G,
                                double send, const StepControl& control) {
  require(w.min_value() > 0.0, "conjugate solve needs w > 0", ErrorCode::numerical);
  require(G.size() == static_cast<Eigen::Index>(space.size()), "G length differs from the space");
  const std::size_t s = w.index_of(send);
  const auto psi = propagate_between(space, potential, w, G.cwiseProduct(w.frame(s)), 0, s, control);
  std::vector<Field> f;
  for (std::size_t i = 0; i < psi.size(); ++i) f.emplace_back(psi[i].col(0).cwiseQuotient(w.frame(i)));
  f.back() = G;
  ConjugateResult result;
  const auto& m = space.measure();
  const double g1 = l1_norm(G, m);
  for (const auto& fi : f) result.l1_growth = std::max(result.l1_growth, g1 > 0.0 ? l1_norm(fi, m) / g1 : 0.0);
  result.f = TimeField(w.t0(), w.time(s), std::move(f));
  return result;
}

Matrix kernel_measures(const Space& space, const Potential& potential, const TimeField& w, double t, double send,
                       const StepControl& control) {
  require(w.min_value() > 0.0, "kernel measures need w > 0", ErrorCode::numerical);
  const std::size_t lo = w.index_of(t);
  const std::size_t hi = w.index_of(send);
  require(lo <= hi, "kernel measures need t <= send");
  const auto n = static_cast<Eigen::Index>(space.size());
  if (lo == hi) return Matrix::Identity(n, n);
  const Matrix terminal = w.frame(hi).asDiagonal();
  const auto psi = propagate_between(space, potential, w, terminal, lo, hi, control);
  return w.frame(lo).cwiseInverse().asDiagonal() * psi.front();
}

MeasureCurve construct_fp_solution(const Space& space, const Potential& potential, const TimeField& w,
                                   const Field& rho_start, const StepControl& control) {
  const auto& m = space.measure();
  require(rho_start.size() == m.size() && (rho_start.array() >= 0.0).all(), "initial density must be nonnegative");
  require(std::abs(inner(rho_start, Field::Ones(m.size()), m) - 1.0) <= 1e-9, "initial density must have mass 1");
  require(w.min_value() > 0.0, "construction needs w > 0", ErrorCode::numerical);
  // sum_x pi(x) M[x][.] = w_{i+1} P^T (pi / w_i), and P^T is the forward
  // propagator of the adjoint equation, so one vector sweep replaces the
  // row-by-row kernel matrices.
  std::vector<Field> frames{rho_start};
  Field pi = rho_start.cwiseProduct(m);
  int substeps = 1;
  const SparseMatrix gt = half_generator(space).transpose();
  const OdeRhs rhs = [&](double tau, const Matrix& z) -> Matrix {
    return gt * z + potential.at(tau).asDiagonal() * z;
  };
  const double stiffness = 2.0 * space.jump_rate().maxCoeff() + potential.sup_bound(-w.t0());
  substeps = std::max(1, static_cast<int>(std::ceil(w.dt() * stiffness)));
  for (std::size_t i = 0; i < w.steps(); ++i) {
    const Matrix z = pi.cwiseQuotient(w.frame(i));
    const Matrix next = rk4_controlled(rhs, z, w.time(i), w.time(i + 1), substeps, control);
    pi = clean_mass(next.col(0).cwiseProduct(w.frame(i + 1)));
    frames.push_back(pi.cwiseQuotient(m));
  }
  return MeasureCurve::from_densities(TimeField(w.t0(), w.t1(), std::move(frames)));
}

double drift_mismatch(const Space& space, const TimeField& w, const MeasureCurve& mu,
                      const std::vector<TestFamilyMember>& family) {
  require_same_grid(w, mu.density, "w and measure curve");
  const auto& m = space.measure();
  const TimeField logw = map_frames(w, [](double, const Field& f) -> Field { return f.array().log().matrix(); });
  double worst = 0.0;
  for (const auto& member : family) {
    std::vector<double> integrand;
    for (std::size_t i = 0; i < w.frames().size(); ++i) {
      const Field phi = member.value(w.time(i));
      const Field diff = carre_du_champ(space, logw.frame(i), phi) -
                         carre_du_champ(space, phi, w.frame(i)).cwiseQuotient(w.frame(i));
      integrand.push_back(inner(diff.cwiseAbs(), mu.density.frame(i), m));
    }
    worst = std::max(worst, trapezoid(integrand, w.dt()));
  }
  return worst;
}

double value_functional(const Space& space, const Potential& potential, const Field& u0, const TimeField& v,
                        const MeasureCurve& mu) {
  require_same_grid(mu.density, v, "drift and measure curve");
  const auto& m = space.measure();
  std::vector<double> integrand;
  for (std::size_t i = 0; i < v.frames().size(); ++i) {
    const Field& vi = v.frame(i);
    const Field running = 0.5 * carre_du_champ(space, vi, vi) - potential.at(v.time(i));
    integrand.push_back(inner(running, mu.density.frame(i), m));
  }
  return trapezoid(integrand, v.dt()) + inner(u0, mu.density.back(), m);
}

namespace {

TimeField every_other(const TimeField& f) {
  std::vector<Field> out;
  for (std::size_t i = 0; i < f.frames().size(); i += 2) out.push_back(f.frame(i));
  return TimeField(f.t0(), f.t1(), std::move(out));
}

}  // namespace

ValueReport verify_value_inequality(const Space& space, const Potential& potential, const TimeField& u,
                                    const std::vector<std::pair<std::string, TimeField>>& drifts,
                                    const Field& rho_start, const StepControl& control) {
  const auto& m = space.measure();
  const std::size_t steps = u.steps();
  const double t0 = u.t0(), t1 = u.t1();
  const Field u0 = u.back();
  const TimeField optimal = map_frames(u, [](double, const Field& f) -> Field { return -f; });
  const auto tests = polling_set(space, t0, t1);

  ValueReport report;
  report.baseline = inner(u.frame(0), rho_start, m);
  const MeasureCurve mu_opt = solve_fp_forward(space, DriftTerm::potential(optimal), rho_start, t0, t1, steps, control);
  report.j_optimal = value_functional(space, potential, u0, optimal, mu_opt);

  const TimeField w = inverse_hopf_cole(u);
  for (const auto& frame : w.frames()) {
    report.defect_term = std::max(report.defect_term, sup_norm(chain_rule_defect(space, frame, ScalarMap::neg_log())));
  }
  report.defect_term *= 2.0 * (t1 - t0);
  if (steps % 2 == 0 && steps >= 2) {
    const TimeField half = every_other(optimal);
    const MeasureCurve mu_half = MeasureCurve::from_densities(every_other(mu_opt.density));
    const double j_half = value_functional(space, potential, u0, half, mu_half);
    report.quadrature_term = 10.0 * std::abs(report.j_optimal - j_half) / 3.0;
  }
  report.eps_report = report.defect_term + report.quadrature_term;

  for (const auto& [id, v] : drifts) {
    require_same_grid(u, v, "drift and value function");
    const DriftTerm drift = DriftTerm::potential(v);
    const MeasureCurve mu = solve_fp_forward(space, drift, rho_start, t0, t1, steps, control);
    DriftRecord rec;
    rec.id = id;
    rec.j = value_functional(space, potential, u0, v, mu);
    rec.gap = rec.j - report.baseline;
    rec.gap_optimal = rec.j - report.j_optimal;
    rec.fp_residual_max = max_weak_residual(space, drift, mu, tests).max_abs;
    rec.c1 = mu.c1;
    rec.norm = drift_norm(space, mu, v);
    if (rec.j < report.j_optimal - report.eps_report || rec.j < report.baseline - report.eps_report) {
      report.ordering_ok = false;
    }
    report.drifts.push_back(rec);
  }
  return report;
}

double conjugate_time_derivative_check(const Space& space, const Potential& potential, const TimeField& w,
                                       const Field& G, double s, std::size_t stride, const StepControl& control) {
  require(stride >= 1, "stride must be positive");
  const std::size_t i = w.index_of(s);
  require(i >= 2 * stride && i + 2 * stride <= w.steps(), "derivative check needs interior grid times");
  const double h = static_cast<double>(stride) * w.dt();
  // Slot s: f^{s + k h}(G, s) for k = 0, 1, 2.
  std::vector<Field> fs{G};
  for (std::size_t k = 1; k <= 2; ++k) {
    const std::size_t hi = i + k * stride;
    const auto psi = propagate_between(space, potential, w, G.cwiseProduct(w.frame(hi)), i, hi, control);
    fs.push_back(psi.front().col(0).cwiseQuotient(w.frame(i)));
  }
  // Slot t: f^s(G, s - k h) for k = 0, 1, 2.
  const auto psi = propagate_between(space, potential, w, G.cwiseProduct(w.frame(i)), i - 2 * stride, i, control);
  std::vector<Field> ft{G};
  for (std::size_t k = 1; k <= 2; ++k) {
    const std::size_t idx = 2 * stride - k * stride;
    ft.push_back(psi[idx].col(0).cwiseQuotient(w.frame(i - k * stride)));
  }
  const Field ds = (-3.0 * fs[0] + 4.0 * fs[1] - fs[2]) / (2.0 * h);
  const Field dt = (3.0 * ft[0] - 4.0 * ft[1] + ft[2]) / (2.0 * h);
  return sup_norm(ds + dt);
}

}  // namespace hjbd
