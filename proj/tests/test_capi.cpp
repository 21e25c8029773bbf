// Exercises the shared library through its C header only.

#include "hjbd/hjbd.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hjbd_capi_" + name)).string();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(CApi, VersionAndEmptyError) {
  EXPECT_STRNE(hjbd_version(), "");
  EXPECT_NE(hjbd_last_error(), nullptr);
}

TEST(CApi, BuildRejectsBadInput) {
  hjbd_space* s = nullptr;
  EXPECT_NE(hjbd_space_build("cycle", 1, 1.0, &s), HJBD_OK);
  EXPECT_STRNE(hjbd_last_error(), "");
  EXPECT_EQ(s, nullptr);
  EXPECT_EQ(hjbd_space_build("moebius", 8, 1.0, &s), HJBD_INVALID_ARGUMENT);
  EXPECT_EQ(hjbd_space_build(nullptr, 8, 1.0, &s), HJBD_INVALID_ARGUMENT);
  EXPECT_EQ(hjbd_space_load("/nonexistent/space.json", &s), HJBD_IO_ERROR);
}

TEST(CApi, TwoPointCalculus) {
  const std::string path = temp_path("two.json");
  write(path, R"({"m": [0.5, 0.5], "edges": [[0, 1, 1.0]]})");
  hjbd_space* s = nullptr;
  ASSERT_EQ(hjbd_space_load(path.c_str(), &s), HJBD_OK);
  ASSERT_EQ(hjbd_space_size(s), 2u);
  const double f[2] = {0.0, 1.0};
  double out[2];
  ASSERT_EQ(hjbd_generator_apply(s, f, out), HJBD_OK);
  EXPECT_DOUBLE_EQ(out[0], 2.0);
  EXPECT_DOUBLE_EQ(out[1], -2.0);
  ASSERT_EQ(hjbd_carre_du_champ(s, f, f, out), HJBD_OK);
  EXPECT_DOUBLE_EQ(out[0], 1.0);
  double e = 0.0;
  ASSERT_EQ(hjbd_energy(s, f, f, &e), HJBD_OK);
  EXPECT_DOUBLE_EQ(e, 1.0);
  double k[4];
  ASSERT_EQ(hjbd_heat_kernel(s, 0.5, "pade", k), HJBD_OK);
  EXPECT_NEAR(k[0], 0.5 * (1.0 + std::exp(-1.0)), 1e-14);
  EXPECT_EQ(hjbd_heat_kernel(s, 0.5, "taylor", k), HJBD_INVALID_ARGUMENT);
  hjbd_space_free(s);
}

TEST(CApi, ValidateReportsViolations) {
  const std::string path = temp_path("asym.json");
  write(path, R"({"m": [0.5, 0.5], "edges": [[0, 1, 1.0], [1, 0, 3.0]]})");
  int ok = 1;
  char buf[512];
  ASSERT_EQ(hjbd_space_validate_file(path.c_str(), &ok, buf, sizeof buf), HJBD_OK);
  EXPECT_EQ(ok, 0);
  EXPECT_NE(std::string(buf).find("conductance not symmetric"), std::string::npos);
  hjbd_space* s = nullptr;
  EXPECT_EQ(hjbd_space_load(path.c_str(), &s), HJBD_INVALID_SPACE);
}

TEST(CApi, SolveRoundTripAndResiduals) {
  hjbd_space* s = nullptr;
  ASSERT_EQ(hjbd_space_build("cycle", 8, 1.0, &s), HJBD_OK);
  hjbd_potential* p = nullptr;
  ASSERT_EQ(hjbd_potential_constant(s, 0.5, &p), HJBD_OK);
  std::vector<double> w0(8, 1.0);
  hjbd_timefield* w = nullptr;
  ASSERT_EQ(hjbd_solve(s, p, w0.data(), -1.0, 20, "ode", &w), HJBD_OK);
  EXPECT_EQ(hjbd_timefield_steps(w), 20u);
  EXPECT_DOUBLE_EQ(hjbd_timefield_time(w, 0), -1.0);
  std::vector<double> frame(8);
  ASSERT_EQ(hjbd_timefield_frame(w, 0, frame.data()), HJBD_OK);
  EXPECT_NEAR(frame[3], std::exp(0.5), 1e-12);
  EXPECT_EQ(hjbd_timefield_frame(w, 21, frame.data()), HJBD_INVALID_ARGUMENT);

  const std::string csv = temp_path("w.csv");
  ASSERT_EQ(hjbd_timefield_write_csv(w, s, csv.c_str()), HJBD_OK);
  hjbd_timefield* back = nullptr;
  ASSERT_EQ(hjbd_timefield_read_csv(s, csv.c_str(), &back), HJBD_OK);
  std::vector<double> again(8);
  ASSERT_EQ(hjbd_timefield_frame(back, 0, again.data()), HJBD_OK);
  EXPECT_EQ(again, frame);

  hjbd_timefield* d = nullptr;
  ASSERT_EQ(hjbd_solve(s, p, w0.data(), -1.0, 20, "duhamel", &d), HJBD_OK);
  ASSERT_EQ(hjbd_timefield_frame(d, 0, again.data()), HJBD_OK);
  EXPECT_NEAR(again[0], frame[0], 1e-4);
  EXPECT_EQ(hjbd_solve(s, p, w0.data(), 1.0, 20, "ode", &d), HJBD_INVALID_ARGUMENT);

  hjbd_hjb_summary h{};
  ASSERT_EQ(hjbd_hjb_report(s, p, w, temp_path("hjb.csv").c_str(), temp_path("hjb.svg").c_str(), &h), HJBD_OK);
  EXPECT_LE(h.residual_sup, 1e-9);
  EXPECT_TRUE(std::filesystem::exists(temp_path("hjb.svg")));

  hjbd_timefield_free(back);
  hjbd_timefield_free(d);
  hjbd_timefield_free(w);
  hjbd_potential_free(p);
  hjbd_space_free(s);
}

TEST(CApi, FeynmanKacAndPaths) {
  hjbd_space* s = nullptr;
  ASSERT_EQ(hjbd_space_build("cycle", 8, 1.0, &s), HJBD_OK);
  hjbd_potential* p = nullptr;
  ASSERT_EQ(hjbd_potential_constant(s, 0.25, &p), HJBD_OK);
  std::vector<double> w0(8, 1.0);
  hjbd_mc_estimate e{};
  const std::string paths = temp_path("paths.csv");
  ASSERT_EQ(hjbd_fk_estimate(s, p, w0.data(), -2.0, 0, 100, 3, paths.c_str(), &e), HJBD_OK);
  EXPECT_NEAR(e.mean, std::exp(0.5), 1e-12);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.n_samples, 100u);
  EXPECT_TRUE(std::filesystem::exists(paths));
  EXPECT_EQ(hjbd_fk_estimate(s, p, w0.data(), -2.0, 99, 100, 3, nullptr, &e), HJBD_INVALID_ARGUMENT);
  hjbd_potential_free(p);
  hjbd_space_free(s);
}

TEST(CApi, ValueReportWithDriftFiles) {
  hjbd_space* s = nullptr;
  ASSERT_EQ(hjbd_space_build("cycle", 8, 1.0, &s), HJBD_OK);
  hjbd_potential* p = nullptr;
  ASSERT_EQ(hjbd_potential_constant(s, 0.0, &p), HJBD_OK);
  std::vector<double> w0(8), rho(8, 1.0);
  for (int x = 0; x < 8; ++x) w0[x] = 1.0 + 0.3 * std::cos(2.0 * M_PI * x / 8.0);
  hjbd_timefield* w = nullptr;
  ASSERT_EQ(hjbd_solve(s, p, w0.data(), -0.5, 40, "ode", &w), HJBD_OK);
  hjbd_timefield* zero = nullptr;
  std::vector<double> z(8, 0.0);
  ASSERT_EQ(hjbd_solve(s, p, z.data(), -0.5, 40, "ode", &zero), HJBD_OK);
  const std::string drift = temp_path("drift_zero.csv");
  ASSERT_EQ(hjbd_timefield_write_csv(zero, s, drift.c_str()), HJBD_OK);
  const char* paths[] = {drift.c_str()};
  hjbd_value_summary v{};
  ASSERT_EQ(hjbd_value_report(s, p, w, rho.data(), paths, 1, temp_path("value.csv").c_str(), &v), HJBD_OK);
  EXPECT_LE(std::abs(v.j_optimal - v.baseline), v.eps_report);
  EXPECT_EQ(v.ordering_ok, 1);

  hjbd_timefield* coarse = nullptr;
  ASSERT_EQ(hjbd_solve(s, p, z.data(), -0.5, 20, "ode", &coarse), HJBD_OK);
  ASSERT_EQ(hjbd_timefield_write_csv(coarse, s, drift.c_str()), HJBD_OK);
  EXPECT_EQ(hjbd_value_report(s, p, w, rho.data(), paths, 1, nullptr, &v), HJBD_GRID_MISMATCH);
  hjbd_timefield_free(coarse);
  hjbd_timefield_free(zero);
  hjbd_timefield_free(w);
  hjbd_potential_free(p);
  hjbd_space_free(s);
}

TEST(CApi, StudyRun) {
  const auto dir = std::filesystem::temp_directory_path() / "hjbd_capi_study";
  std::filesystem::create_directories(dir);
  const std::string cfg = (dir / "cfg.json").string();
  write(cfg, R"({"space": {"kind": "cycle", "n": 8}, "study": "identities", "time_steps": 40, "output_dir": "out"})");
  int passed = 0;
  size_t checks = 0;
  ASSERT_EQ(hjbd_study_run(cfg.c_str(), nullptr, &passed, &checks), HJBD_OK);
  EXPECT_EQ(passed, 1);
  EXPECT_GT(checks, 10u);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "report.csv"));
  EXPECT_EQ(hjbd_study_run(cfg.c_str(), "{not json", &passed, &checks), HJBD_PARSE_ERROR);
  EXPECT_EQ(hjbd_study_run(cfg.c_str(), R"({"t": 1.0})", &passed, &checks), HJBD_PARSE_ERROR);
}

TEST(CApi, NullHandlesAreErrors) {
  double out = 0.0;
  EXPECT_EQ(hjbd_energy(nullptr, &out, &out, &out), HJBD_INVALID_ARGUMENT);
  EXPECT_EQ(hjbd_space_size(nullptr), 0u);
  hjbd_space_free(nullptr);
  hjbd_timefield_free(nullptr);
}
