#include "hjbd/hjbd.h"

#include "hjbd/csv.hpp"
#include "hjbd/fokkerplanck.hpp"
#include "hjbd/heat.hpp"
#include "hjbd/hjb.hpp"
#include "hjbd/montecarlo.hpp"
#include "hjbd/plots.hpp"
#include "hjbd/schrodinger.hpp"
#include "hjbd/specs.hpp"
#include "hjbd/study.hpp"

#include <json.hpp>

#include <cstring>
#include <new>
#include <sstream>
#include <string>

struct hjbd_space {
  hjbd::Space space;
};

struct hjbd_potential {
  hjbd::Potential potential;
};

struct hjbd_timefield {
  hjbd::TimeField field;
};

namespace {

thread_local std::string last_error;

hjbd_status to_status(hjbd::ErrorCode code) {
  switch (code) {
    case hjbd::ErrorCode::invalid_argument: return HJBD_INVALID_ARGUMENT;
    case hjbd::ErrorCode::io: return HJBD_IO_ERROR;
    case hjbd::ErrorCode::parse: return HJBD_PARSE_ERROR;
    case hjbd::ErrorCode::invalid_space: return HJBD_INVALID_SPACE;
    case hjbd::ErrorCode::numerical: return HJBD_NUMERICAL_ERROR;
    case hjbd::ErrorCode::convergence: return HJBD_CONVERGENCE_ERROR;
    case hjbd::ErrorCode::grid_mismatch: return HJBD_GRID_MISMATCH;
  }
  return HJBD_INTERNAL_ERROR;
}

template <typename Fn>
hjbd_status guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return HJBD_OK;
  } catch (const hjbd::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return HJBD_PARSE_ERROR;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HJBD_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HJBD_INTERNAL_ERROR;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw hjbd::Error(hjbd::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

hjbd::Field read_field(const hjbd_space* space, const double* values) {
  need(values, "field");
  const auto n = static_cast<Eigen::Index>(space->space.size());
  return Eigen::Map<const hjbd::Field>(values, n);
}

void write_field(const hjbd::Field& f, double* out) {
  need(out, "output");
  std::memcpy(out, f.data(), sizeof(double) * static_cast<std::size_t>(f.size()));
}

hjbd::ExpMethod exp_method(const char* method) {
  const std::string m = method == nullptr ? "pade" : method;
  if (m == "pade") return hjbd::ExpMethod::pade;
  if (m == "spectral") return hjbd::ExpMethod::spectral;
  throw hjbd::Error(hjbd::ErrorCode::invalid_argument, "unknown exponential method: " + m);
}

}  // namespace

extern "C" {

const char* hjbd_last_error(void) { return last_error.c_str(); }

const char* hjbd_version(void) { return "1.0.0"; }

hjbd_status hjbd_space_build(const char* kind, int size, double scaling, hjbd_space** out) {
  return guard([&] {
    need(kind, "kind");
    need(out, "out");
    hjbd::SpaceSpec spec;
    spec.kind = hjbd::parse_space_kind(kind);
    hjbd::require(spec.kind != hjbd::SpaceKind::file, "use hjbd_space_load for space files");
    spec.size = size;
    spec.scaling = scaling;
    *out = new hjbd_space{hjbd::build_space(spec)};
  });
}

hjbd_status hjbd_space_load(const char* path, hjbd_space** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    hjbd::SpaceSpec spec;
    spec.kind = hjbd::SpaceKind::file;
    spec.path = path;
    *out = new hjbd_space{hjbd::build_space(spec)};
  });
}

hjbd_status hjbd_space_save(const hjbd_space* space, const char* path) {
  return guard([&] {
    need(space, "space");
    need(path, "path");
    hjbd::save_space_file(space->space, path);
  });
}

size_t hjbd_space_size(const hjbd_space* space) { return space == nullptr ? 0 : space->space.size(); }

void hjbd_space_free(hjbd_space* space) { delete space; }

hjbd_status hjbd_space_validate_file(const char* path, int* ok, char* buf, size_t buf_len) {
  return guard([&] {
    need(path, "path");
    need(ok, "ok");
    const hjbd::ValidationReport report = hjbd::validate_space(hjbd::load_space_file(path));
    *ok = report.ok() ? 1 : 0;
    if (buf != nullptr && buf_len > 0) {
      std::string text;
      for (const auto& v : report.violations) text += v + "\n";
      const std::size_t len = std::min(text.size(), buf_len - 1);
      std::memcpy(buf, text.data(), len);
      buf[len] = '\0';
    }
  });
}

hjbd_status hjbd_generator_apply(const hjbd_space* space, const double* f, double* out) {
  return guard([&] {
    need(space, "space");
    write_field(hjbd::generator_apply(space->space, read_field(space, f)), out);
  });
}

hjbd_status hjbd_carre_du_champ(const hjbd_space* space, const double* f, const double* g, double* out) {
  return guard([&] {
    need(space, "space");
    write_field(hjbd::carre_du_champ(space->space, read_field(space, f), read_field(space, g)), out);
  });
}

hjbd_status hjbd_energy(const hjbd_space* space, const double* f, const double* g, double* out) {
  return guard([&] {
    need(space, "space");
    need(out, "out");
    *out = hjbd::energy(space->space, read_field(space, f), read_field(space, g));
  });
}

hjbd_status hjbd_heat_kernel(const hjbd_space* space, double h, const char* method, double* out) {
  return guard([&] {
    need(space, "space");
    need(out, "out");
    const hjbd::KernelMatrix k = hjbd::heat_kernel(space->space, h, exp_method(method));
    const auto n = k.entries.rows();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) out[i * n + j] = k.entries(i, j);
  });
}

hjbd_status hjbd_heat_kernel_csv(const hjbd_space* space, double h, const char* method, const char* path) {
  return guard([&] {
    need(space, "space");
    need(path, "path");
    const hjbd::KernelMatrix k = hjbd::heat_kernel(space->space, h, exp_method(method));
    const auto& ids = space->space.ids();
    std::ostringstream os;
    os << hjbd::kSchemaLine << "\nx,y,value\n";
    for (Eigen::Index i = 0; i < k.entries.rows(); ++i)
      for (Eigen::Index j = 0; j < k.entries.cols(); ++j)
        os << ids[static_cast<std::size_t>(i)] << ',' << ids[static_cast<std::size_t>(j)] << ','
           << hjbd::format_double(k.entries(i, j)) << '\n';
    hjbd::write_text_file(path, os.str());
  });
}

hjbd_status hjbd_potential_constant(const hjbd_space* space, double value, hjbd_potential** out) {
  return guard([&] {
    need(space, "space");
    need(out, "out");
    *out = new hjbd_potential{hjbd::Potential::constant(space->space.size(), value)};
  });
}

hjbd_status hjbd_potential_load(const hjbd_space* space, const char* path, hjbd_potential** out) {
  return guard([&] {
    need(space, "space");
    need(path, "path");
    need(out, "out");
    *out = new hjbd_potential{hjbd::load_potential_file(path, space->space)};
  });
}

void hjbd_potential_free(hjbd_potential* potential) { delete potential; }

hjbd_status hjbd_potential_sample(const hjbd_potential* potential, double t, double* out) {
  return guard([&] {
    need(potential, "potential");
    write_field(potential->potential.at(t), out);
  });
}

hjbd_status hjbd_field_load(const hjbd_space* space, const char* path, double* out) {
  return guard([&] {
    need(space, "space");
    need(path, "path");
    write_field(hjbd::load_field_file(path, space->space.size()), out);
  });
}

hjbd_status hjbd_solve(const hjbd_space* space, const hjbd_potential* potential, const double* w0, double t,
                       size_t steps, const char* method, hjbd_timefield** out) {
  return guard([&] {
    need(space, "space");
    need(potential, "potential");
    need(out, "out");
    hjbd::require(potential->potential.points() == space->space.size(), "potential length differs from the space");
    const std::string m = method == nullptr ? "ode" : method;
    const hjbd::Field w = read_field(space, w0);
    if (m == "ode") {
      *out = new hjbd_timefield{hjbd::solve_schrodinger_ode(space->space, potential->potential, w, t, steps)};
    } else if (m == "duhamel") {
      *out = new hjbd_timefield{hjbd::solve_schrodinger_duhamel(space->space, potential->potential, w, t, steps).w};
    } else {
      throw hjbd::Error(hjbd::ErrorCode::invalid_argument, "unknown solve method: " + m);
    }
  });
}

size_t hjbd_timefield_steps(const hjbd_timefield* field) { return field == nullptr ? 0 : field->field.steps(); }

double hjbd_timefield_time(const hjbd_timefield* field, size_t index) {
  return field == nullptr ? 0.0 : field->field.time(index);
}

hjbd_status hjbd_timefield_frame(const hjbd_timefield* field, size_t index, double* out) {
  return guard([&] {
    need(field, "field");
    hjbd::require(index <= field->field.steps(), "frame index out of range");
    write_field(field->field.frame(index), out);
  });
}

hjbd_status hjbd_timefield_write_csv(const hjbd_timefield* field, const hjbd_space* space, const char* path) {
  return guard([&] {
    need(field, "field");
    need(space, "space");
    need(path, "path");
    hjbd::write_timefield_csv(field->field, space->space.ids(), path);
  });
}

hjbd_status hjbd_timefield_read_csv(const hjbd_space* space, const char* path, hjbd_timefield** out) {
  return guard([&] {
    need(space, "space");
    need(path, "path");
    need(out, "out");
    *out = new hjbd_timefield{hjbd::read_timefield_csv(path, space->space.ids())};
  });
}

void hjbd_timefield_free(hjbd_timefield* field) { delete field; }

hjbd_status hjbd_fk_estimate(const hjbd_space* space, const hjbd_potential* potential, const double* w0, double t,
                             size_t x, size_t samples, uint64_t seed, const char* paths_csv, hjbd_mc_estimate* out) {
  return guard([&] {
    need(space, "space");
    need(potential, "potential");
    need(out, "out");
    hjbd::require(x < space->space.size(), "start point out of range");
    std::vector<hjbd::PathSample> paths;
    const hjbd::McEstimate e = hjbd::feynman_kac_estimate(space->space, potential->potential, read_field(space, w0), t,
                                                          x, samples, seed, paths_csv ? &paths : nullptr);
    if (paths_csv != nullptr) {
      const auto& ids = space->space.ids();
      std::ostringstream os;
      os << hjbd::kSchemaLine << "\npath,time,point\n";
      for (std::size_t i = 0; i < paths.size(); ++i)
        for (const auto& [time, point] : paths[i].segments)
          os << i << ',' << hjbd::format_double(time) << ',' << ids[point] << '\n';
      hjbd::write_text_file(paths_csv, os.str());
    }
    *out = {e.mean, e.std_error, e.n_samples, e.seed};
  });
}

hjbd_status hjbd_hjb_report(const hjbd_space* space, const hjbd_potential* potential, const hjbd_timefield* w,
                            const char* csv_path, const char* svg_path, hjbd_hjb_summary* out) {
  return guard([&] {
    need(space, "space");
    need(potential, "potential");
    need(w, "w");
    const hjbd::HjbReport r = hjbd::hjb_residual(space->space, potential->potential, hjbd::hopf_cole(w->field));
    if (csv_path != nullptr) {
      std::ostringstream os;
      os << hjbd::kSchemaLine << "\ntime,residual_sup,residual_l2,exact_sup,exact_l2,defect_sup\n";
      for (const auto& f : r.frames)
        os << hjbd::format_double(f.time) << ',' << hjbd::format_double(f.residual_sup) << ','
           << hjbd::format_double(f.residual_l2) << ',' << hjbd::format_double(f.exact_sup) << ','
           << hjbd::format_double(f.exact_l2) << ',' << hjbd::format_double(f.defect_sup) << '\n';
      hjbd::write_text_file(csv_path, os.str());
    }
    if (svg_path != nullptr) {
      hjbd::Series res{"HJB residual", {}, {}, {}};
      hjbd::Series def{"chain-rule defect", {}, {}, {}};
      for (const auto& f : r.frames) {
        res.x.push_back(f.time);
        res.y.push_back(std::max(f.residual_sup, 1e-300));
        def.x.push_back(f.time);
        def.y.push_back(std::max(f.defect_sup, 1e-300));
      }
      hjbd::write_text_file(svg_path, hjbd::svg_plot({"HJB residuals", "tau", "sup norm", false, true, ""}, {res, def}));
    }
    if (out != nullptr) *out = {r.residual_sup, r.exact_sup, r.defect_sup};
  });
}

hjbd_status hjbd_value_report(const hjbd_space* space, const hjbd_potential* potential, const hjbd_timefield* w,
                              const double* rho0, const char* const* drift_paths, size_t n_drifts,
                              const char* csv_path, hjbd_value_summary* out) {
  return guard([&] {
    need(space, "space");
    need(potential, "potential");
    need(w, "w");
    hjbd::require(n_drifts == 0 || drift_paths != nullptr, "drift paths are NULL");
    const auto& sp = space->space;
    hjbd::Field rho = read_field(space, rho0);
    hjbd::require((rho.array() >= 0.0).all(), "rho0 must be nonnegative");
    const double mass = hjbd::inner(rho, hjbd::Field::Ones(rho.size()), sp.measure());
    hjbd::require(mass > 0.0, "rho0 must have positive mass");
    rho /= mass;
    const hjbd::TimeField u = hjbd::hopf_cole(w->field);
    std::vector<std::pair<std::string, hjbd::TimeField>> drifts;
    drifts.push_back({"optimal", hjbd::map_frames(u, [](double, const hjbd::Field& f) -> hjbd::Field { return -f; })});
    for (std::size_t i = 0; i < n_drifts; ++i) {
      hjbd::TimeField v = hjbd::read_timefield_csv(drift_paths[i], sp.ids());
      if (!v.same_grid(u))
        throw hjbd::Error(hjbd::ErrorCode::grid_mismatch, std::string("drift grid differs from w: ") + drift_paths[i]);
      drifts.push_back({drift_paths[i], std::move(v)});
    }
    const hjbd::ValueReport vr = hjbd::verify_value_inequality(sp, potential->potential, u, drifts, rho);
    if (csv_path != nullptr) {
      std::ostringstream os;
      os << hjbd::kSchemaLine << "\ndrift_id,J,gap_vs_optimal,fp_residual_max,C1\n";
      for (const auto& d : vr.drifts)
        os << d.id << ',' << hjbd::format_double(d.j) << ',' << hjbd::format_double(d.gap_optimal) << ','
           << hjbd::format_double(d.fp_residual_max) << ',' << hjbd::format_double(d.c1) << '\n';
      hjbd::write_text_file(csv_path, os.str());
    }
    if (out != nullptr) *out = {vr.baseline, vr.j_optimal, vr.eps_report, vr.ordering_ok ? 1 : 0};
  });
}

hjbd_status hjbd_study_run(const char* config_path, const char* overrides_json, int* passed, size_t* n_checks) {
  return guard([&] {
    need(config_path, "config path");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(hjbd::read_text_file(config_path));
      if (overrides_json != nullptr) doc.merge_patch(nlohmann::json::parse(overrides_json));
    } catch (const nlohmann::json::parse_error& e) {
      throw hjbd::Error(hjbd::ErrorCode::parse, std::string("config: ") + e.what());
    }
    const hjbd::ExperimentConfig cfg = hjbd::config_from_json(doc, hjbd::parent_directory(config_path));
    const hjbd::StudyReport report = hjbd::run_study(cfg);
    if (passed != nullptr) *passed = report.pass() ? 1 : 0;
    if (n_checks != nullptr) *n_checks = report.records.size();
  });
}

}  // extern "C"
