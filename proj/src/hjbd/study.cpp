#include "hjbd/study.hpp"

#include "hjbd/csv.hpp"
#include "hjbd/fokkerplanck.hpp"
#include "hjbd/heat.hpp"
#include "hjbd/hjb.hpp"
#include "hjbd/montecarlo.hpp"
#include "hjbd/parallel.hpp"
#include "hjbd/plots.hpp"
#include "hjbd/rng.hpp"
#include "hjbd/schrodinger.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace hjbd {

bool StudyReport::pass() const {
  return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; });
}

void Recorder::at_most(const std::string& check, double measured, double limit, const std::string& anchor) {
  records_.push_back({check, measured, "<=" + format_double(limit), std::isfinite(measured) && measured <= limit, anchor});
}

void Recorder::at_least(const std::string& check, double measured, double limit, const std::string& anchor) {
  records_.push_back({check, measured, ">=" + format_double(limit), std::isfinite(measured) && measured >= limit, anchor});
}

void Recorder::within(const std::string& check, double measured, double lo, double hi, const std::string& anchor) {
  records_.push_back({check, measured, "in [" + format_double(lo) + ", " + format_double(hi) + "]",
                      std::isfinite(measured) && measured >= lo && measured <= hi, anchor});
}

void Recorder::equals(const std::string& check, double measured, double expected, const std::string& anchor) {
  records_.push_back({check, measured, "==" + format_double(expected), measured == expected, anchor});
}

void Recorder::failure(const std::string& check, const std::string& message, const std::string& anchor) {
  records_.push_back({check + ": " + message, std::numeric_limits<double>::quiet_NaN(), "no error", false, anchor});
}

namespace {

struct Setup {
  SpaceSpec spec;
  Space space;
  Potential potential;
  Field w0;
  Field rho0;
  double t;
  std::size_t steps;
};

Field probability_density(const Field& f, const Field& m) {
  require((f.array() >= 0.0).all(), "rho0 must be nonnegative");
  const double mass = inner(f, Field::Ones(m.size()), m);
  require(mass > 0.0, "rho0 must have positive mass");
  return f / mass;
}

Setup make_setup(const ExperimentConfig& cfg, const SpaceSpec& spec) {
  Space space = build_space(spec);
  Potential potential = potential_from_json(cfg.potential, space, cfg.base_dir);
  Field w0 = field_from_json(cfg.w0, space.size(), cfg.base_dir);
  Field rho0 = probability_density(field_from_json(cfg.rho0, space.size(), cfg.base_dir), space.measure());
  return Setup{spec, std::move(space), std::move(potential), std::move(w0), std::move(rho0), cfg.t, cfg.time_steps};
}

Field random_field(std::size_t n, std::uint64_t seed, double lo, double hi) {
  CounterRng rng(seed);
  Field f(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = lo + (hi - lo) * rng.uniform();
  return f;
}

double sup_diff(const TimeField& a, const TimeField& b, std::size_t stride_b = 1) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.frames().size(); ++i)
    worst = std::max(worst, sup_norm(a.frame(i) - b.frame(i * stride_b)));
  return worst;
}

double scale_of(const TimeField& f) { return std::max({1.0, std::abs(f.min_value()), std::abs(f.max_value())}); }

class Output {
 public:
  Output(const ExperimentConfig& cfg, StudyReport& report) : cfg_(cfg), report_(report) {}

  void write(const std::string& name, const std::string& text) {
    write_text_file(join_path(cfg_.output_dir, name), text);
    report_.files.push_back(name);
  }

  void plot(const std::string& name, const PlotSpec& spec, const std::vector<Series>& series) {
    if (cfg_.plots) write(name, svg_plot(spec, series));
  }

 private:
  const ExperimentConfig& cfg_;
  StudyReport& report_;
};

std::string csv_header(const std::string& columns) { return std::string(kSchemaLine) + "\n" + columns + "\n"; }

// Dirichlet-form calculus, Markov property and heat-kernel identities.
void identities_study(const Setup& s, std::uint64_t seed, Recorder& rec) {
  const Space& sp = s.space;
  const std::size_t n = sp.size();
  const Field& m = sp.measure();
  const Field f = random_field(n, stream_seed(seed, 1), -1.0, 1.0);
  const Field g = random_field(n, stream_seed(seed, 2), -1.0, 1.0);

  const double efg = energy(sp, f, g);
  rec.at_most("integration by parts relative error", std::abs(inner(generator_apply(sp, f), g, m) + efg) / std::max(1.0, std::abs(efg)),
              1e-10, "integration by parts");
  const Field lhs = generator_apply(sp, f.cwiseProduct(g));
  const Field rhs = f.cwiseProduct(generator_apply(sp, g)) + g.cwiseProduct(generator_apply(sp, f)) +
                    2.0 * carre_du_champ(sp, f, g);
  rec.at_most("Leibniz rule relative error", sup_norm(lhs - rhs) / std::max(1.0, sup_norm(lhs)), 1e-10,
              "carre du champ as Leibniz defect");
  const Field gff = carre_du_champ(sp, f, f);
  const Field ggg = carre_du_champ(sp, g, g);
  const Field gfg = carre_du_champ(sp, f, g);
  const double cs = ((gfg.array().square() - gff.array() * ggg.array()) /
                     (1.0 + (gff.array() * ggg.array()))).maxCoeff();
  rec.at_most("pointwise Cauchy-Schwarz excess", cs, 1e-12, "Cauchy-Schwarz for the carre du champ");
  const double eff = energy(sp, f, f);
  rec.at_most("energy measure total mass error", std::abs(eff - inner(gff, Field::Ones(m.size()), m)) / std::max(1.0, eff),
              1e-10, "energy as integrated carre du champ");

  const std::vector<std::pair<std::string, std::function<double(double)>>> maps{
      {"unit clamp", [](double r) { return std::clamp(r, 0.0, 1.0); }},
      {"absolute value", [](double r) { return std::abs(r); }},
      {"symmetric clamp", [](double r) { return std::clamp(r, -0.5, 0.5); }},
      {"soft threshold", [](double r) { return r > 0 ? std::max(r - 0.1, 0.0) : std::min(r + 0.1, 0.0); }},
      {"tanh", [](double r) { return std::tanh(r); }},
  };
  double markov = -std::numeric_limits<double>::infinity();
  for (const auto& [name, eta] : maps) {
    const Field ef = f.unaryExpr(eta);
    markov = std::max(markov, (energy(sp, ef, ef) - eff) / std::max(1.0, eff));
  }
  rec.at_most("normal contraction energy growth", markov, 1e-12, "Markov property of the form");

  const double h = 0.1;
  const KernelMatrix kp = heat_kernel(sp, h, ExpMethod::pade);
  const KernelMatrix ks = heat_kernel(sp, h, ExpMethod::spectral);
  rec.at_most("heat kernel row-sum error", (kp.entries.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10,
              "conservativeness of the heat semigroup");
  rec.at_least("heat kernel smallest entry", kp.entries.minCoeff(), 0.0, "positivity of the heat semigroup");
  const Matrix weighted = m.asDiagonal() * kp.entries;
  rec.at_most("heat kernel reversibility error", (weighted - weighted.transpose()).cwiseAbs().maxCoeff(), 1e-12,
              "symmetry of the heat semigroup in L2(m)");
  rec.at_most("Pade versus spectral exponential", (kp.entries - ks.entries).cwiseAbs().maxCoeff(), 1e-10,
              "plumbing");
  const KernelMatrix k2 = heat_kernel(sp, 2.0 * h, ExpMethod::pade);
  rec.at_most("heat semigroup law error", (kp.entries * kp.entries - k2.entries).cwiseAbs().maxCoeff(), 1e-10,
              "semigroup property");

  const TimeField w = solve_schrodinger_ode(sp, s.potential, s.w0, s.t, s.steps);
  const double mid = w.time(s.steps / 2);
  const Matrix kts = kernel_measures(sp, s.potential, w, w.t0(), mid);
  const Matrix ksr = kernel_measures(sp, s.potential, w, mid, w.t1());
  const Matrix ktr = kernel_measures(sp, s.potential, w, w.t0(), w.t1());
  rec.at_most("conjugate kernel Chapman-Kolmogorov error", (kts * ksr - ktr).cwiseAbs().maxCoeff(), 1e-9,
              "Chapman-Kolmogorov for the conjugate kernel");
  rec.at_most("conjugate kernel row-sum error", (ktr.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9,
              "conjugate kernels are probability measures");
  rec.at_least("conjugate kernel smallest entry", ktr.minCoeff(), -1e-14, "conjugate kernels are probability measures");

  const Field G = random_field(n, stream_seed(seed, 3), 0.0, 1.0);
  const ConjugateResult conj = solve_conjugate(sp, s.potential, w, G, w.t1());
  rec.at_most("conjugate semigroup versus kernel measures", sup_norm(conj.f.frame(0) - ktr * G), 1e-9,
              "conjugate semigroup as kernel integral");
  const MeasureCurve mu = construct_fp_solution(sp, s.potential, w, s.rho0);
  const double left = inner(conj.f.frame(0), s.rho0, m);
  const double right = inner(G, mu.density.back(), m);
  rec.at_most("duality between conjugate semigroup and Fokker-Planck flow", std::abs(left - right), 1e-9,
              "duality of the conjugate semigroup");
  double sup_f = 0.0;
  for (const auto& fi : conj.f.frames()) sup_f = std::max(sup_f, sup_norm(fi));
  rec.at_most("conjugate semigroup sup growth", sup_f / sup_norm(G), 1.0 + 1e-9,
              "conjugate kernels are probability measures");
}

// Well-posedness of the Schroedinger problem and the fixed-point route.
void schrodinger_study(const Setup& s, Recorder& rec, Output& out, std::uint64_t seed) {
  const Space& sp = s.space;
  const std::size_t N = s.steps;
  const TimeField ode = solve_schrodinger_ode(sp, s.potential, s.w0, s.t, N);
  const TimeField ode2 = solve_schrodinger_ode(sp, s.potential, s.w0, s.t, 2 * N);
  const DuhamelResult d1 = solve_schrodinger_duhamel(sp, s.potential, s.w0, s.t, N);
  const DuhamelResult d2 = solve_schrodinger_duhamel(sp, s.potential, s.w0, s.t, 2 * N);
  const double scale = scale_of(ode);
  const double err1 = sup_diff(d1.w, ode) / scale;
  const double err2 = sup_diff(d2.w, ode2) / scale;
  const double disc = sup_diff(d1.w, d2.w, 2) / scale;
  const double tol = DuhamelOptions{}.tol;
  rec.at_most("Duhamel versus ODE relative error", err1, std::max(10.0 * tol, 2.0 * disc),
              "existence and uniqueness of the Schroedinger solution");
  rec.at_most("ODE refinement relative difference", sup_diff(ode, ode2, 2) / scale, 1e-9, "plumbing");
  if (err2 > 100.0 * tol) {
    rec.within("Duhamel error ratio under step halving", err1 / err2, 3.0, 5.0, "plumbing");
  }
  rec.at_most("Picard contraction factor", d1.contraction_factor, 0.25,
              "contraction of the Duhamel map on short windows");
  rec.at_most("window length times C1 norm of F", d1.window_c1_product, 0.25,
              "contraction of the Duhamel map on short windows");

  if (s.w0.minCoeff() > 0.0) {
    const auto bounds = max_principle_bounds(s.potential, s.w0, -s.t);
    rec.equals("maximum principle violations (ODE)", static_cast<double>(count_bound_violations(ode, bounds)), 0.0,
               "maximum principle");
    rec.equals("maximum principle violations (Duhamel)", static_cast<double>(count_bound_violations(d1.w, bounds)),
               0.0, "maximum principle");
    rec.at_least("smallest value of w", ode.min_value(), 0.0, "positivity of w");
  }

  const Field v0 = random_field(sp.size(), stream_seed(seed, 11), -1.0, 1.0);
  const TimeField wv = solve_schrodinger_ode(sp, s.potential, v0, s.t, N);
  const TimeField wc = solve_schrodinger_ode(sp, s.potential, 2.0 * s.w0 + 3.0 * v0, s.t, N);
  double lin = 0.0;
  for (std::size_t i = 0; i < wc.frames().size(); ++i)
    lin = std::max(lin, sup_norm(wc.frame(i) - 2.0 * ode.frame(i) - 3.0 * wv.frame(i)));
  rec.at_most("linearity defect", lin / std::max(scale, scale_of(wv)), 1e-10, "linearity of the solution map");

  const auto profile = lipschitz_profile(sp, ode);
  std::ostringstream csv;
  csv << csv_header("time,lipschitz");
  Series series{"Lip w(tau)", {}, {}, {}};
  for (const auto& [time, lip] : profile) {
    csv << format_double(time) << ',' << format_double(lip) << '\n';
    series.x.push_back(time);
    series.y.push_back(lip);
  }
  out.write("lipschitz.csv", csv.str());
  out.plot("lipschitz.svg", {"Lipschitz constant of w", "tau", "Lip", false, false, ""}, {series});
}

// Feynman-Kac, Trotter and the bridge representation of the conjugate semigroup.
void feynman_kac_study(const Setup& s, std::size_t samples, std::uint64_t seed, Recorder& rec, Output& out) {
  const Space& sp = s.space;
  const std::size_t n = sp.size();
  const TimeField w = solve_schrodinger_ode(sp, s.potential, s.w0, s.t, s.steps);
  const Field& ref = w.frame(0);
  const std::size_t probes = std::min<std::size_t>(n, 8);

  std::ostringstream csv;
  csv << csv_header("probe,point,mean,std_error,reference,z");
  Series est{"Monte Carlo", {}, {}, {}};
  Series exact{"ODE reference", {}, {}, {}};
  double worst_z = 0.0;
  for (std::size_t k = 0; k < probes; ++k) {
    const std::size_t x = k * n / probes;
    const McEstimate e = feynman_kac_estimate(sp, s.potential, s.w0, s.t, x, samples, stream_seed(seed, 100 + k));
    const double r = ref(static_cast<Eigen::Index>(x));
    const double z = e.std_error > 0.0 ? (e.mean - r) / e.std_error : (e.mean == r ? 0.0 : INFINITY);
    worst_z = std::max(worst_z, std::abs(z));
    csv << k << ',' << sp.ids()[x] << ',' << format_double(e.mean) << ',' << format_double(e.std_error) << ','
        << format_double(r) << ',' << format_double(z) << '\n';
    est.x.push_back(static_cast<double>(x));
    est.y.push_back(e.mean);
    est.err.push_back(2.0 * e.std_error);
    exact.x.push_back(static_cast<double>(x));
    exact.y.push_back(r);
  }
  rec.at_most("largest Feynman-Kac z-score", worst_z, 4.0, "Feynman-Kac representation");
  out.write("mc.csv", csv.str());
  out.plot("mc.svg", {"Feynman-Kac estimate at time t", "point", "w(t, x)", false, false, "error bars: 2 std errors"},
           {est, exact});

  const double c = 0.5;
  const Potential flat = Potential::constant(n, c);
  const McEstimate ce = feynman_kac_estimate(sp, flat, Field::Ones(static_cast<Eigen::Index>(n)), s.t, 0,
                                             std::min<std::size_t>(samples, 1000), seed);
  const double expected = std::exp(-c * s.t);
  rec.equals("constant potential estimator std error", ce.std_error, 0.0, "Feynman-Kac representation");
  rec.at_most("constant potential estimator relative error", std::abs(ce.mean - expected) / expected, 1e-12,
              "Feynman-Kac representation");

  std::vector<double> errors;
  for (std::size_t slices : {8, 16, 32, 64}) {
    const Field tr = trotter_product(sp, s.potential, s.w0, s.t, slices);
    errors.push_back(sup_norm(tr - ref));
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (errors[i + 1] > 1e-11 * std::max(1.0, sup_norm(ref))) {
      rec.within("Trotter error ratio " + std::to_string(8u << i) + "/" + std::to_string(16u << i),
                 errors[i] / errors[i + 1], 1.6, 2.4, "Trotter product formula");
    }
  }

  if (w.min_value() > 0.0) {
    const Field G = random_field(n, stream_seed(seed, 7), 0.5, 1.5);
    const double send = w.time(s.steps / 2);
    const ConjugateResult conj = solve_conjugate(sp, s.potential, w, G, send);
    const std::size_t x = 0;
    const McEstimate b = bridge_feynman_kac(sp, s.potential, w, G, s.t, x, send, std::max<std::size_t>(samples / 4, 2),
                                            stream_seed(seed, 9));
    const double r = conj.f.frame(0)(static_cast<Eigen::Index>(x));
    const double z = b.std_error > 0.0 ? std::abs(b.mean - r) / b.std_error : (b.mean == r ? 0.0 : INFINITY);
    rec.at_most("bridge estimate of the conjugate semigroup z-score", z, 4.0,
                "path representation of the conjugate semigroup");
  }
}

// HJB residuals of u = -log w and the chain-rule defect.
void hjb_study(const Setup& s, Recorder& rec, Output& out) {
  const Space& sp = s.space;
  const TimeField w1 = solve_schrodinger_ode(sp, s.potential, s.w0, s.t, s.steps);
  require(w1.min_value() > 0.0, "Hopf-Cole needs w > 0", ErrorCode::numerical);
  const TimeField u1 = hopf_cole(w1);
  const HjbReport r1 = hjb_residual(sp, s.potential, u1);
  const TimeField w2 = solve_schrodinger_ode(sp, s.potential, s.w0, s.t, 2 * s.steps);
  const HjbReport r2 = hjb_residual(sp, s.potential, hopf_cole(w2));

  rec.at_most("Hopf-Cole round trip error", sup_diff(inverse_hopf_cole(u1), w1) / scale_of(w1), 1e-13, "plumbing");
  const double c1 = r1.exact_sup / (w1.dt() * w1.dt());
  const double c2 = r2.exact_sup / (w2.dt() * w2.dt());
  if (r2.exact_sup > 1e-12) {
    rec.within("exact residual constant ratio under step halving", c1 / c2, 0.5, 2.0,
               "u = -log w solves the exact nonlocal HJB");
  } else {
    rec.at_most("exact residual sup", r1.exact_sup, 1e-10, "u = -log w solves the exact nonlocal HJB");
  }
  double split = 0.0;
  for (std::size_t i = 0; i < u1.frames().size(); ++i) {
    const Field& wf = w1.frame(i);
    const Field& uf = u1.frame(i);
    const Field predicted = 0.5 * (r1.chain_defect.frame(i) +
                                   carre_du_champ(sp, wf, wf).cwiseQuotient(wf.cwiseProduct(wf)) -
                                   carre_du_champ(sp, uf, uf));
    split = std::max(split, sup_norm(r1.residual.frame(i) - r1.exact_residual.frame(i) - predicted) /
                                std::max(1.0, sup_norm(predicted)));
  }
  rec.at_most("HJB residual split into chain-rule terms", split, 1e-9, "plumbing");
  rec.at_least("HJB residual sup (finite)", r1.residual_sup, 0.0, "HJB residual equals the chain-rule defect");

  const Field V = random_field(sp.size(), 77, -1.0, 1.0);
  double square = 0.0;
  for (const auto& uf : u1.frames()) {
    const Field lhs = -0.5 * carre_du_champ(sp, uf, uf) - carre_du_champ(sp, V, uf);
    const Field rhs = 0.5 * carre_du_champ(sp, V, V);
    square = std::max(square, (lhs - rhs).maxCoeff() / std::max(1.0, sup_norm(rhs)));
  }
  rec.at_most("completing-the-square excess", square, 1e-12, "completing the square in the carre du champ");

  std::ostringstream csv;
  csv << csv_header("time,residual_sup,residual_l2,exact_sup,exact_l2,defect_sup");
  Series eq{"HJB residual", {}, {}, {}};
  Series ex{"exact residual", {}, {}, {}};
  Series de{"chain-rule defect", {}, {}, {}};
  for (const auto& f : r1.frames) {
    csv << format_double(f.time) << ',' << format_double(f.residual_sup) << ',' << format_double(f.residual_l2) << ','
        << format_double(f.exact_sup) << ',' << format_double(f.exact_l2) << ',' << format_double(f.defect_sup) << '\n';
    eq.x.push_back(f.time);
    eq.y.push_back(std::max(f.residual_sup, 1e-300));
    ex.x.push_back(f.time);
    ex.y.push_back(std::max(f.exact_sup, 1e-300));
    de.x.push_back(f.time);
    de.y.push_back(std::max(f.defect_sup, 1e-300));
  }
  out.write("hjb.csv", csv.str());
  out.plot("hjb.svg", {"HJB residuals along the time grid", "tau", "sup norm", false, true, ""}, {eq, ex, de});
}

std::vector<std::pair<std::string, TimeField>> drift_family(const Space& sp, const TimeField& u, std::uint64_t seed) {
  const std::size_t n = sp.size();
  const Spectrum spec = generator_spectrum(sp);
  const auto mode = [&](Eigen::Index k) -> Field {
    const Field e = spec.vectors.col(std::min<Eigen::Index>(k, spec.vectors.cols() - 1));
    return e / std::max(1e-300, sup_norm(e));
  };
  const Field Z = 0.2 * mode(1);
  std::vector<std::pair<std::string, TimeField>> out;
  out.push_back({"zero", map_frames(u, [](double, const Field& f) -> Field { return Field::Zero(f.size()); })});
  out.push_back({"optimal", map_frames(u, [](double, const Field& f) -> Field { return -f; })});
  for (double d : {0.2, 0.1, 0.05}) {
    for (int sign : {1, -1}) {
      const std::string id = std::string(sign > 0 ? "plus_" : "minus_") + format_double(d);
      out.push_back({id, map_frames(u, [&](double tau, const Field& f) -> Field {
                       return -f + sign * d * (1.0 + 0.5 * std::cos(3.0 * tau)) * Z;
                     })});
    }
  }
  for (std::size_t j = 0; j < 18; ++j) {
    CounterRng rng(stream_seed(seed, 1000 + j));
    const double b = 1.5 * rng.uniform();
    std::array<double, 3> a{};
    std::array<double, 3> omega{};
    for (std::size_t k = 0; k < 3; ++k) {
      a[k] = rng.uniform() - 0.5;
      omega[k] = 4.0 * rng.uniform();
    }
    std::array<Field, 3> modes{mode(1), mode(2), mode(std::min<Eigen::Index>(3, static_cast<Eigen::Index>(n) - 1))};
    out.push_back({"random_" + std::to_string(j), map_frames(u, [&](double tau, const Field& f) -> Field {
                     Field v = -b * f;
                     for (std::size_t k = 0; k < 3; ++k) v += a[k] * std::cos(omega[k] * tau) * modes[k];
                     return v;
                   })});
  }
  return out;
}

// The value-function inequality over a family of drifts, and the FP duality.
void value_study(const Setup& s, std::uint64_t seed, Recorder& rec, Output& out) {
  const Space& sp = s.space;
  const TimeField w = solve_schrodinger_ode(sp, s.potential, s.w0, s.t, s.steps);
  require(w.min_value() > 0.0, "value study needs w > 0", ErrorCode::numerical);
  const TimeField u = hopf_cole(w);
  const auto drifts = drift_family(sp, u, seed);
  const ValueReport vr = verify_value_inequality(sp, s.potential, u, drifts, s.rho0);

  rec.at_most("gap of J(-u) to the value", std::abs(vr.j_optimal - vr.baseline), vr.eps_report,
              "the drift -u attains the value");
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& d : vr.drifts) margin = std::min(margin, d.j - vr.j_optimal + vr.eps_report);
  rec.at_least("smallest J(V) - J(-u) + eps over the family", margin, 0.0, "value function is a lower bound");

  const auto find = [&](const std::string& id) -> const DriftRecord& {
    return *std::find_if(vr.drifts.begin(), vr.drifts.end(), [&](const DriftRecord& d) { return d.id == id; });
  };
  const double j_zero = find("zero").j;
  std::vector<double> ratios;
  for (double d : {0.2, 0.1, 0.05}) {
    for (const char* side : {"plus_", "minus_"}) {
      const DriftRecord& r = find(side + format_double(d));
      ratios.push_back(r.gap_optimal / (d * d));
      if (d <= 0.1) {
        rec.at_least(std::string("J(0) - J(-u ") + (side[0] == 'p' ? "+" : "-") + " " + format_double(d) + " Z)",
                     j_zero - r.j, 0.0, "value function is a lower bound");
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  rec.at_least("smallest quadratic excess ratio", *lo, 0.0, "quadratic growth of J around -u");
  rec.at_most("spread of quadratic excess ratios", *hi / std::max(1e-300, *lo), 1.3, "quadratic growth of J around -u");

  const MeasureCurve built = construct_fp_solution(sp, s.potential, w, s.rho0);
  const MeasureCurve forward = solve_fp_forward(sp, DriftTerm::doob(w), s.rho0, w.t0(), w.t1(), w.steps());
  const double gap1 = sup_diff(built.density, forward.density) / forward.c1;
  const TimeField w2 = solve_schrodinger_ode(sp, s.potential, s.w0, s.t, 2 * s.steps);
  const MeasureCurve built2 = construct_fp_solution(sp, s.potential, w2, s.rho0);
  const MeasureCurve forward2 = solve_fp_forward(sp, DriftTerm::doob(w2), s.rho0, w2.t0(), w2.t1(), w2.steps());
  const double gap2 = sup_diff(built2.density, forward2.density) / forward2.c1;
  rec.at_most("constructed versus integrated FP solution", gap1, 1e-3, "conjugate kernels solve the FP equation");
  if (gap2 > 1e-10) {
    rec.at_least("FP construction gap ratio under step halving", gap1 / gap2, 3.0,
                 "conjugate kernels solve the FP equation");
  }
  const auto family = polling_set(sp, w.t0(), w.t1());
  const PollResult exact = max_weak_residual(sp, DriftTerm::doob(w), built, family);
  rec.at_most("weak FP residual with the Doob drift", exact.max_abs, 1e-5, "conjugate kernels solve the FP equation");
  const PollResult approx = max_weak_residual(sp, DriftTerm::potential(drifts[1].second), built, family);
  const double allowance = drift_mismatch(sp, w, built, family);
  rec.at_most("weak FP residual with the drift -u", approx.max_abs, allowance + 1e-5,
              "FP equation with drift -u up to the chain-rule defect");
  double mass = 0.0;
  for (const auto& f : built.density.frames())
    mass = std::max(mass, std::abs(inner(f, Field::Ones(f.size()), sp.measure()) - 1.0));
  rec.at_most("mass drift of the constructed curve", mass, 1e-10, "conjugate kernels are probability measures");

  std::ostringstream csv;
  csv << csv_header("drift_id,J,gap_vs_optimal,fp_residual_max,C1");
  Series js{"J(V) - J(-u)", {}, {}, {}};
  for (std::size_t i = 0; i < vr.drifts.size(); ++i) {
    const auto& d = vr.drifts[i];
    csv << d.id << ',' << format_double(d.j) << ',' << format_double(d.gap_optimal) << ','
        << format_double(d.fp_residual_max) << ',' << format_double(d.c1) << '\n';
    js.x.push_back(static_cast<double>(i));
    js.y.push_back(d.gap_optimal);
  }
  out.write("value.csv", csv.str());
  out.plot("value.svg", {"Value functional over the drift family", "drift index", "J(V) - J(-u)", false, false,
                         "eps_report = " + format_double(vr.eps_report)},
           {js});
}

struct LadderRow {
  int size = 0;
  double h = 0.0;
  double eq6 = 0.0;
  double exact = 0.0;
  double defect = 0.0;
  double value_gap = 0.0;
  double eps_report = 0.0;
  double fp_gap = 0.0;
  double allowance = 0.0;
  std::string error;
};

LadderRow ladder_row(const ExperimentConfig& cfg, int size) {
  LadderRow row;
  row.size = size;
  try {
    SpaceSpec spec = cfg.space;
    spec.size = size;
    const Setup s = make_setup(cfg, spec);
    const Space& sp = s.space;
    row.h = sp.edges().empty() ? 0.0 : sp.edges().front().length;
    const TimeField w = solve_schrodinger_ode(sp, s.potential, s.w0, s.t, s.steps);
    require(w.min_value() > 0.0, "ladder needs w > 0", ErrorCode::numerical);
    const TimeField u = hopf_cole(w);
    const HjbReport hr = hjb_residual(sp, s.potential, u);
    row.eq6 = hr.residual_sup;
    row.exact = hr.exact_sup;
    row.defect = hr.defect_sup;
    const TimeField negu = map_frames(u, [](double, const Field& f) -> Field { return -f; });
    const ValueReport vr = verify_value_inequality(sp, s.potential, u, {{"optimal", negu}}, s.rho0);
    row.value_gap = std::abs(vr.j_optimal - vr.baseline);
    row.eps_report = vr.eps_report;
    const MeasureCurve built = construct_fp_solution(sp, s.potential, w, s.rho0);
    const MeasureCurve fwd = solve_fp_forward(sp, DriftTerm::potential(negu), s.rho0, w.t0(), w.t1(), w.steps());
    double gap = 0.0;
    for (std::size_t i = 0; i < w.frames().size(); ++i)
      gap = std::max(gap, l1_norm(built.density.frame(i) - fwd.density.frame(i), sp.measure()));
    row.fp_gap = gap;
    row.allowance = drift_mismatch(sp, w, built, polling_set(sp, w.t0(), w.t1()));
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

void check_decreasing(Recorder& rec, const std::string& what, const std::vector<LadderRow>& rows,
                      double LadderRow::*field, double min_order, const std::string& anchor) {
  std::vector<double> h;
  std::vector<double> e;
  for (const auto& r : rows) {
    h.push_back(r.h);
    e.push_back(r.*field);
  }
  const auto orders = empirical_orders(h, e);
  for (std::size_t i = 0; i < orders.size(); ++i) {
    rec.at_least(what + " order " + std::to_string(rows[i].size) + "->" + std::to_string(rows[i + 1].size), orders[i],
                 min_order, anchor);
  }
}

// Mesh ladder: every approximate quantity must shrink as the graph refines.
void convergence_study(const ExperimentConfig& cfg, Recorder& rec, Output& out) {
  std::vector<LadderRow> rows(cfg.ladder.size());
  parallel_for(rows.size(), [&](std::size_t i) { rows[i] = ladder_row(cfg, cfg.ladder[i]); });
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      rec.failure("ladder entry " + std::to_string(r.size), r.error, "plumbing");
      return;
    }
  }
  check_decreasing(rec, "HJB residual", rows, &LadderRow::eq6, 1.0, "HJB residual vanishes as the mesh refines");
  check_decreasing(rec, "chain-rule defect", rows, &LadderRow::defect, 1.0, "chain-rule defect vanishes as the mesh refines");
  check_decreasing(rec, "eps_report", rows, &LadderRow::eps_report, 1.0, "value identity in the limit");
  check_decreasing(rec, "FP drift allowance", rows, &LadderRow::allowance, 1.0,
                   "FP equation with drift -u in the limit");
  check_decreasing(rec, "FP curve gap between drifts", rows, &LadderRow::fp_gap, 0.5,
                   "FP equation with drift -u in the limit");
  check_decreasing(rec, "value gap", rows, &LadderRow::value_gap, 0.0, "the drift -u attains the value");
  for (const auto& r : rows) {
    rec.at_most("value gap on n=" + std::to_string(r.size), r.value_gap, r.eps_report, "the drift -u attains the value");
  }

  std::ostringstream csv;
  csv << csv_header("n,h,hjb_residual_sup,exact_residual_sup,chain_defect_sup,value_gap,eps_report,fp_gap,fp_allowance");
  std::vector<Series> series{{"HJB residual", {}, {}, {}}, {"chain-rule defect", {}, {}, {}},
                             {"eps_report", {}, {}, {}}, {"FP gap", {}, {}, {}}};
  for (const auto& r : rows) {
    csv << r.size << ',' << format_double(r.h) << ',' << format_double(r.eq6) << ',' << format_double(r.exact) << ','
        << format_double(r.defect) << ',' << format_double(r.value_gap) << ',' << format_double(r.eps_report) << ','
        << format_double(r.fp_gap) << ',' << format_double(r.allowance) << '\n';
    const double vals[] = {r.eq6, r.defect, r.eps_report, r.fp_gap};
    for (std::size_t k = 0; k < series.size(); ++k) {
      series[k].x.push_back(r.h);
      series[k].y.push_back(std::max(vals[k], 1e-300));
    }
  }
  out.write("convergence.csv", csv.str());
  std::string slopes = "fitted slopes:";
  for (const auto& sr : series) slopes += " " + sr.name + " " + format_double(std::round(loglog_slope(sr.x, sr.y) * 100.0) / 100.0) + ";";
  out.plot("convergence.svg", {"Mesh ladder", "edge length h", "size", true, true, slopes}, series);
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename Fn>
void guarded(Recorder& rec, const std::string& study, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    rec.failure(study, e.what(), "plumbing");
  } catch (const std::exception& e) {
    rec.failure(study, e.what(), "plumbing");
  }
}

}  // namespace

StudyReport run_study(const ExperimentConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  require(!ec && std::filesystem::is_directory(cfg.output_dir), "cannot create output directory " + cfg.output_dir,
          ErrorCode::io);
  const std::string started = timestamp();
  StudyReport report;
  Recorder rec;
  Output out(cfg, report);
  const auto wants = [&](StudyKind k) { return cfg.study == k || cfg.study == StudyKind::all; };

  std::optional<Setup> setup;
  try {
    setup.emplace(make_setup(cfg, cfg.space));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    rec.failure("setup", e.what(), e.code() == ErrorCode::invalid_space ? "space validation" : "plumbing");
  }
  if (setup) {
    if (wants(StudyKind::identities)) guarded(rec, "identities", [&] { identities_study(*setup, cfg.seed, rec); });
    if (wants(StudyKind::schrodinger)) guarded(rec, "schrodinger", [&] { schrodinger_study(*setup, rec, out, cfg.seed); });
    if (wants(StudyKind::feynman_kac))
      guarded(rec, "feynman-kac", [&] { feynman_kac_study(*setup, cfg.mc_samples, cfg.seed, rec, out); });
    if (wants(StudyKind::hjb)) guarded(rec, "hjb", [&] { hjb_study(*setup, rec, out); });
    if (wants(StudyKind::value)) guarded(rec, "value", [&] { value_study(*setup, cfg.seed, rec, out); });
  }
  if (wants(StudyKind::convergence)) {
    if (cfg.space.kind == SpaceKind::file) {
      if (cfg.study == StudyKind::convergence) rec.failure("convergence", "a mesh ladder needs a generated space", "plumbing");
    } else {
      guarded(rec, "convergence", [&] { convergence_study(cfg, rec, out); });
    }
  }

  report.records = std::move(rec.records());
  write_text_file(join_path(cfg.output_dir, "report.csv"), report_csv(report));
  nlohmann::json meta = {{"started", started},
                         {"finished", timestamp()},
                         {"threads", worker_count()},
                         {"pass", report.pass()},
                         {"files", report.files},
                         {"config", config_to_json(cfg)}};
  write_text_file(join_path(cfg.output_dir, "meta.json"), meta.dump(2) + "\n");
  report.files.insert(report.files.begin(), {"report.csv", "meta.json"});
  return report;
}

std::string report_csv(const StudyReport& report) {
  std::ostringstream os;
  os << csv_header("check,measured,threshold,pass,anchor");
  const auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  for (const auto& r : report.records) {
    os << quote(r.check) << ',' << format_double(r.measured) << ',' << quote(r.threshold) << ','
       << (r.pass ? "true" : "false") << ',' << quote(r.anchor) << '\n';
  }
  return os.str();
}

}  // namespace hjbd
