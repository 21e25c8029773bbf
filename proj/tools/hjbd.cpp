// Command-line front end over the C API.

#include "hjbd/hjbd.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Failure {
  hjbd_status status;
};

using SpacePtr = std::unique_ptr<hjbd_space, decltype(&hjbd_space_free)>;
using PotentialPtr = std::unique_ptr<hjbd_potential, decltype(&hjbd_potential_free)>;
using FieldPtr = std::unique_ptr<hjbd_timefield, decltype(&hjbd_timefield_free)>;

void check(hjbd_status s) {
  if (s != HJBD_OK) {
    std::fprintf(stderr, "hjbd: %s\n", hjbd_last_error());
    throw Failure{s};
  }
}

int exit_code(hjbd_status s) {
  switch (s) {
    case HJBD_INVALID_ARGUMENT:
    case HJBD_IO_ERROR:
    case HJBD_PARSE_ERROR:
    case HJBD_GRID_MISMATCH:
      return kUsage;
    default:
      return kCheckFailed;
  }
}

// "<kind>:<size>" builds a generated space, anything else is a space file.
SpacePtr open_space(const std::string& spec) {
  hjbd_space* raw = nullptr;
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  if (colon != std::string::npos && (kind == "cycle" || kind == "torus2d" || kind == "gasket")) {
    int size = 0;
    try {
      size = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
      std::fprintf(stderr, "hjbd: bad space size in '%s'\n", spec.c_str());
      throw Failure{HJBD_INVALID_ARGUMENT};
    }
    check(hjbd_space_build(kind.c_str(), size, 1.0, &raw));
  } else {
    check(hjbd_space_load(spec.c_str(), &raw));
  }
  return SpacePtr(raw, hjbd_space_free);
}

PotentialPtr open_potential(const hjbd_space* space, const std::string& path) {
  hjbd_potential* raw = nullptr;
  if (path.empty()) {
    check(hjbd_potential_constant(space, 0.0, &raw));
  } else {
    check(hjbd_potential_load(space, path.c_str(), &raw));
  }
  return PotentialPtr(raw, hjbd_potential_free);
}

std::vector<double> open_field(const hjbd_space* space, const std::string& path, double fallback) {
  std::vector<double> f(hjbd_space_size(space), fallback);
  if (!path.empty()) check(hjbd_field_load(space, path.c_str(), f.data()));
  return f;
}

struct Common {
  std::string space;
  std::string potential;
  std::string w0;
  double t = -1.0;
  std::size_t steps = 200;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--space", c.space, "space file or kind:size (cycle:16, torus2d:8, gasket:3)")->required();
  cmd->add_option("--potential", c.potential, "potential document (default F = 0)");
  cmd->add_option("--w0", c.w0, "terminal field document (default w0 = 1)");
  cmd->add_option("--t", c.t, "start time, negative")->capture_default_str();
  cmd->add_option("--steps", c.steps, "time steps")->capture_default_str()->check(CLI::PositiveNumber);
}

FieldPtr solve(const hjbd_space* space, const hjbd_potential* potential, const std::vector<double>& w0,
               const Common& c, const std::string& method) {
  hjbd_timefield* raw = nullptr;
  check(hjbd_solve(space, potential, w0.data(), c.t, c.steps, method.c_str(), &raw));
  return FieldPtr(raw, hjbd_timefield_free);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value functions, Schroedinger and Fokker-Planck flows on finite Dirichlet spaces"};
  app.set_version_flag("--version", std::string(hjbd_version()));
  app.require_subcommand(1);

  auto* space_cmd = app.add_subcommand("space", "build and validate space files");
  space_cmd->require_subcommand(1);
  std::string validate_path;
  auto* validate = space_cmd->add_subcommand("validate", "report violations of the space invariants");
  validate->add_option("file", validate_path)->required();
  std::string build_kind = "cycle";
  int build_n = 8;
  double build_scaling = 1.0;
  std::string build_out;
  auto* build = space_cmd->add_subcommand("build", "write a generated space");
  build->add_option("--kind", build_kind)->check(CLI::IsMember({"cycle", "torus2d", "gasket"}))->capture_default_str();
  build->add_option("--n", build_n, "points per side, or the gasket level")->capture_default_str();
  build->add_option("--scaling", build_scaling)->capture_default_str();
  build->add_option("--out", build_out)->required();

  auto* heat_cmd = app.add_subcommand("heat", "heat kernel of the space");
  std::string heat_space, heat_method = "pade", heat_out;
  double heat_h = 0.1;
  heat_cmd->add_option("--space", heat_space)->required();
  heat_cmd->add_option("--time", heat_h, "kernel time h")->capture_default_str();
  heat_cmd->add_option("--method", heat_method)->check(CLI::IsMember({"pade", "spectral"}))->capture_default_str();
  heat_cmd->add_option("--out", heat_out)->required();

  Common solve_opts;
  std::string solve_method = "ode", solve_out;
  auto* solve_cmd = app.add_subcommand("solve", "solve the backward Schroedinger equation");
  add_common(solve_cmd, solve_opts);
  solve_cmd->add_option("--method", solve_method)->check(CLI::IsMember({"ode", "duhamel"}))->capture_default_str();
  solve_cmd->add_option("--out", solve_out, "timefield CSV")->required();

  Common fk_opts;
  std::size_t fk_x = 0, fk_samples = 20000;
  std::uint64_t fk_seed = 7;
  std::string fk_paths;
  auto* fk_cmd = app.add_subcommand("fk", "Feynman-Kac estimate of w(t, x) against the ODE solution");
  add_common(fk_cmd, fk_opts);
  fk_cmd->add_option("--x", fk_x, "start point index")->capture_default_str();
  fk_cmd->add_option("--samples", fk_samples)->capture_default_str();
  fk_cmd->add_option("--seed", fk_seed)->capture_default_str();
  fk_cmd->add_option("--paths", fk_paths, "write sampled paths to this CSV");

  std::string hjb_space, hjb_potential, hjb_w, hjb_report, hjb_plot;
  auto* hjb_cmd = app.add_subcommand("hjb", "HJB residuals of u = -log w");
  hjb_cmd->add_option("--space", hjb_space)->required();
  hjb_cmd->add_option("--potential", hjb_potential);
  hjb_cmd->add_option("--w", hjb_w, "timefield CSV of w")->required();
  hjb_cmd->add_option("--report", hjb_report)->required();
  hjb_cmd->add_option("--plot", hjb_plot, "SVG output");

  Common value_opts;
  std::string value_rho0, value_drifts, value_report;
  auto* value_cmd = app.add_subcommand("value", "value-function inequality over a drift family");
  add_common(value_cmd, value_opts);
  value_cmd->add_option("--rho0", value_rho0, "initial density document (default uniform)");
  value_cmd->add_option("--drifts", value_drifts, "directory of drift timefield CSVs");
  value_cmd->add_option("--report", value_report)->required();

  std::string study_config;
  std::string study_set;
  auto* study_cmd = app.add_subcommand("study", "run a configured study");
  study_cmd->add_option("config", study_config)->required();
  study_cmd->add_option("--set", study_set, "JSON object merged over the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*validate) {
      int ok = 0;
      std::string buf(1 << 16, '\0');
      check(hjbd_space_validate_file(validate_path.c_str(), &ok, buf.data(), buf.size()));
      if (ok) {
        std::printf("valid\n");
        return kPass;
      }
      std::printf("%s", buf.c_str());
      return kCheckFailed;
    }
    if (*build) {
      hjbd_space* raw = nullptr;
      check(hjbd_space_build(build_kind.c_str(), build_n, build_scaling, &raw));
      SpacePtr space(raw, hjbd_space_free);
      check(hjbd_space_save(space.get(), build_out.c_str()));
      std::printf("%zu points written to %s\n", hjbd_space_size(space.get()), build_out.c_str());
      return kPass;
    }
    if (*heat_cmd) {
      const SpacePtr space = open_space(heat_space);
      check(hjbd_heat_kernel_csv(space.get(), heat_h, heat_method.c_str(), heat_out.c_str()));
      return kPass;
    }
    if (*solve_cmd) {
      const SpacePtr space = open_space(solve_opts.space);
      const PotentialPtr potential = open_potential(space.get(), solve_opts.potential);
      const auto w0 = open_field(space.get(), solve_opts.w0, 1.0);
      const FieldPtr w = solve(space.get(), potential.get(), w0, solve_opts, solve_method);
      check(hjbd_timefield_write_csv(w.get(), space.get(), solve_out.c_str()));
      return kPass;
    }
    if (*fk_cmd) {
      const SpacePtr space = open_space(fk_opts.space);
      const PotentialPtr potential = open_potential(space.get(), fk_opts.potential);
      const auto w0 = open_field(space.get(), fk_opts.w0, 1.0);
      hjbd_mc_estimate e{};
      check(hjbd_fk_estimate(space.get(), potential.get(), w0.data(), fk_opts.t, fk_x, fk_samples, fk_seed,
                             fk_paths.empty() ? nullptr : fk_paths.c_str(), &e));
      const FieldPtr w = solve(space.get(), potential.get(), w0, fk_opts, "ode");
      std::vector<double> frame(hjbd_space_size(space.get()));
      check(hjbd_timefield_frame(w.get(), 0, frame.data()));
      const double ref = frame.at(fk_x);
      const double z = e.std_error > 0.0 ? (e.mean - ref) / e.std_error : (e.mean == ref ? 0.0 : 1e300);
      std::printf("mean %.17g\nstd_error %.17g\nreference %.17g\nz %.6g\n", e.mean, e.std_error, ref, z);
      return std::abs(z) <= 4.0 ? kPass : kCheckFailed;
    }
    if (*hjb_cmd) {
      const SpacePtr space = open_space(hjb_space);
      const PotentialPtr potential = open_potential(space.get(), hjb_potential);
      hjbd_timefield* raw = nullptr;
      check(hjbd_timefield_read_csv(space.get(), hjb_w.c_str(), &raw));
      const FieldPtr w(raw, hjbd_timefield_free);
      hjbd_hjb_summary s{};
      check(hjbd_hjb_report(space.get(), potential.get(), w.get(), hjb_report.c_str(),
                            hjb_plot.empty() ? nullptr : hjb_plot.c_str(), &s));
      std::printf("residual_sup %.6e\nexact_residual_sup %.6e\nchain_defect_sup %.6e\n", s.residual_sup, s.exact_sup,
                  s.defect_sup);
      return kPass;
    }
    if (*value_cmd) {
      const SpacePtr space = open_space(value_opts.space);
      const PotentialPtr potential = open_potential(space.get(), value_opts.potential);
      const auto w0 = open_field(space.get(), value_opts.w0, 1.0);
      const auto rho0 = open_field(space.get(), value_rho0, 1.0);
      const FieldPtr w = solve(space.get(), potential.get(), w0, value_opts, "ode");
      std::vector<std::string> paths;
      if (!value_drifts.empty()) {
        std::error_code ec;
        for (const auto& entry : std::filesystem::directory_iterator(value_drifts, ec))
          if (entry.path().extension() == ".csv") paths.push_back(entry.path().string());
        if (ec) {
          std::fprintf(stderr, "hjbd: cannot read %s: %s\n", value_drifts.c_str(), ec.message().c_str());
          return kUsage;
        }
        std::sort(paths.begin(), paths.end());
      }
      std::vector<const char*> cpaths;
      for (const auto& p : paths) cpaths.push_back(p.c_str());
      hjbd_value_summary s{};
      check(hjbd_value_report(space.get(), potential.get(), w.get(), rho0.data(), cpaths.data(), cpaths.size(),
                              value_report.c_str(), &s));
      std::printf("value %.17g\nJ_optimal %.17g\neps_report %.6e\nordering %s\n", s.baseline, s.j_optimal,
                  s.eps_report, s.ordering_ok ? "ok" : "violated");
      return (s.ordering_ok && std::abs(s.j_optimal - s.baseline) <= s.eps_report) ? kPass : kCheckFailed;
    }
    if (*study_cmd) {
      int passed = 0;
      std::size_t checks = 0;
      check(hjbd_study_run(study_config.c_str(), study_set.empty() ? nullptr : study_set.c_str(), &passed, &checks));
      std::printf("%s: %zu checks\n", passed ? "PASS" : "FAIL", checks);
      return passed ? kPass : kCheckFailed;
    }
  } catch (const Failure& f) {
    return exit_code(f.status);
  }
  return kUsage;
}
