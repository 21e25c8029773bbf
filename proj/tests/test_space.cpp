#include "hjbd/csv.hpp"
#include "hjbd/space.hpp"
#include "hjbd/transport.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace hjbd;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hjbd_test_" + name)).string();
}

}  // namespace

TEST(Space, CycleFourHasUniformMeasureAndTwoNeighbors) {
  const Space s = make_cycle(4);
  ASSERT_EQ(s.size(), 4u);
  for (std::size_t x = 0; x < 4; ++x) {
    EXPECT_DOUBLE_EQ(s.measure()(static_cast<Eigen::Index>(x)), 0.25);
    EXPECT_EQ(s.neighbors(x).size(), 2u);
  }
}

TEST(Space, GasketLevelOneHasSixPointsNineEdges) {
  const Space s = make_gasket(1);
  EXPECT_EQ(s.size(), 6u);
  EXPECT_EQ(s.edges().size(), 9u);
  EXPECT_TRUE(validate_space(s).ok());
}

TEST(Space, GasketCountsFollowTheRecursion) {
  // V_{L+1} = 3 V_L - 3, E_L = 3^{L+1}
  std::size_t v = 3;
  for (int level = 0; level <= 4; ++level) {
    const Space s = make_gasket(level);
    EXPECT_EQ(s.size(), v) << level;
    EXPECT_EQ(s.edges().size(), static_cast<std::size_t>(std::pow(3, level + 1))) << level;
    v = 3 * v - 3;
  }
}

TEST(Space, TorusIsFourRegular) {
  const Space s = make_torus2d(5);
  ASSERT_EQ(s.size(), 25u);
  for (std::size_t x = 0; x < s.size(); ++x) EXPECT_EQ(s.neighbors(x).size(), 4u);
  EXPECT_TRUE(validate_space(s).ok());
}

TEST(Space, TwoPointFileRoundTripsVerbatim) {
  const std::string path = temp_path("two.json");
  write_text_file(path, R"({"points": ["a", "b"], "m": [0.5, 0.5], "edges": [[0, 1, 1.0]]})");
  SpaceSpec spec;
  spec.kind = SpaceKind::file;
  spec.path = path;
  const Space s = build_space(spec);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.ids()[0], "a");
  EXPECT_DOUBLE_EQ(s.conductance()(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(s.conductance()(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.metric()(0, 1), 1.0);

  const std::string again = temp_path("two_again.json");
  save_space_file(s, again);
  const Space t = load_space_file(again);
  EXPECT_EQ(t.ids(), s.ids());
  EXPECT_EQ(t.measure(), s.measure());
  EXPECT_EQ(t.conductance(), s.conductance());
  EXPECT_EQ(t.metric(), s.metric());
}

TEST(Space, GeneratedSpacesRoundTripThroughJson) {
  for (const Space& s : {make_cycle(8), make_gasket(2), make_torus2d(3)}) {
    const Space t = parse_space_json(space_to_json(s));
    EXPECT_EQ(t.measure(), s.measure());
    EXPECT_EQ(t.conductance(), s.conductance());
    EXPECT_LE((t.metric() - s.metric()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Validation, CycleIsValid) { EXPECT_TRUE(validate_space(make_cycle(8)).ok()); }

TEST(Validation, RescaledMeasureIsReported) {
  const Space c = make_cycle(8);
  const Space bad(c.ids(), 2.0 * c.measure(), c.conductance(), c.metric());
  const auto report = validate_space(bad);
  EXPECT_TRUE(report.contains("measure not normalized"));
}

TEST(Validation, AsymmetricConductanceIsReported) {
  const Space c = make_cycle(8);
  Matrix cond = c.conductance();
  cond(0, 1) *= 2.0;
  const auto report = validate_space(Space(c.ids(), c.measure(), cond, c.metric()));
  EXPECT_TRUE(report.contains("conductance not symmetric"));
}

TEST(Validation, AsymmetricFileIsRejectedByBuild) {
  const std::string path = temp_path("asym.json");
  write_text_file(path, R"({"m": [0.5, 0.5], "edges": [[0, 1, 1.0], [1, 0, 2.0]]})");
  EXPECT_TRUE(validate_space(load_space_file(path)).contains("conductance not symmetric"));
  SpaceSpec spec;
  spec.kind = SpaceKind::file;
  spec.path = path;
  try {
    build_space(spec);
    FAIL() << "expected invalid_space";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_space);
  }
}

TEST(Validation, DisconnectedAndNegativeAreReported) {
  Field m = Field::Constant(4, 0.25);
  const Space s = make_graph_space(m, {{0, 1, 1.0, 1.0}, {2, 3, 1.0, 1.0}});
  EXPECT_TRUE(validate_space(s).contains("graph not connected"));
  const Space c = make_cycle(4);
  Matrix cond = c.conductance();
  cond(0, 1) = cond(1, 0) = -1.0;
  EXPECT_TRUE(validate_space(Space(c.ids(), c.measure(), cond, c.metric())).contains("conductance negative"));
}

TEST(Validation, MalformedDocumentIsParseError) {
  const std::string path = temp_path("bad.json");
  write_text_file(path, R"({"m": [0.5, 0.5], "edges": [[0, 5, 1.0]]})");
  try {
    load_space_file(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
  }
}

TEST(Generator, ConstantsAreHarmonic) {
  for (const Space& s : {make_cycle(8), make_gasket(2), oracle::random_graph(20, 3)}) {
    EXPECT_LE(sup_norm(generator_apply(s, Field::Constant(static_cast<Eigen::Index>(s.size()), 3.7))), 1e-12);
  }
}

TEST(Generator, TwoPointHandValue) {
  const Space s = oracle::two_point();
  Field f(2);
  f << 0.0, 1.0;
  const Field lf = generator_apply(s, f);
  EXPECT_DOUBLE_EQ(lf(0), 2.0);
  EXPECT_DOUBLE_EQ(lf(1), -2.0);
  const Field g = carre_du_champ(s, f, f);
  EXPECT_DOUBLE_EQ(g(0), 1.0);
  EXPECT_DOUBLE_EQ(g(1), 1.0);
  EXPECT_DOUBLE_EQ(energy(s, f, f), 1.0);
  EXPECT_DOUBLE_EQ(-inner(lf, f, s.measure()), 1.0);
}

TEST(Generator, CycleSineIsEigenvector) {
  for (int n : {8, 16, 64, 256}) {
    const Space s = make_cycle(n);
    const Field f = oracle::mode(n, 0.0, 1.0, 1, true);
    const double lambda = oracle::cycle_eigenvalue(n, 1);
    EXPECT_LE(sup_norm(generator_apply(s, f) + lambda * f), 1e-9 * lambda) << n;
  }
  EXPECT_NEAR(oracle::cycle_eigenvalue(4096, 1), 4.0 * oracle::kPi * oracle::kPi, 1e-4);
}

TEST(Generator, MatchesDenseOracle) {
  std::mt19937_64 gen(11);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Space s = oracle::random_graph(15 + seed, seed);
    const Field f = oracle::random_field(s.size(), gen);
    EXPECT_LE(sup_norm(generator_apply(s, f) - oracle::generator(s) * f), 1e-12);
    EXPECT_LE((s.generator_matrix() - oracle::generator(s)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CarreDuChamp, ConstantArgumentVanishes) {
  std::mt19937_64 gen(5);
  const Space s = make_gasket(2);
  const Field g = oracle::random_field(s.size(), gen);
  EXPECT_LE(sup_norm(carre_du_champ(s, Field::Constant(static_cast<Eigen::Index>(s.size()), 2.0), g)), 1e-14);
  EXPECT_LE(std::abs(energy(s, Field::Constant(static_cast<Eigen::Index>(s.size()), 2.0), g)), 1e-14);
}

TEST(CarreDuChamp, IntegratesToDoubleSumEnergy) {
  std::mt19937_64 gen(21);
  const Space s = make_cycle(16);
  for (int trial = 0; trial < 20; ++trial) {
    const Field f = oracle::random_field(16, gen);
    const Field g = oracle::random_field(16, gen);
    const double oracle_e = oracle::double_sum_energy(s, f, g);
    EXPECT_NEAR(inner(carre_du_champ(s, f, g), Field::Ones(16), s.measure()), oracle_e, 1e-12);
    EXPECT_NEAR(energy(s, f, g), oracle_e, 1e-12);
    EXPECT_LE(sup_norm(carre_du_champ(s, f, g) - oracle::carre(s, f, g)), 1e-12);
  }
}

TEST(Energy, UnitClampIsMarkovian) {
  std::mt19937_64 gen(8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Space s = oracle::random_graph(30, seed);
    const Field f = oracle::random_field(s.size(), gen, -0.5, 1.5);
    const Field clamped = f.unaryExpr([](double r) { return std::clamp(r, 0.0, 1.0); });
    EXPECT_LE(energy(s, clamped, clamped), energy(s, f, f) + 1e-14);
  }
}

TEST(Metric, CycleEdgesHaveLengthOneOverN) {
  const Space s = make_cycle(10);
  EXPECT_NEAR(s.metric()(0, 1), 0.1, 1e-15);
  EXPECT_NEAR(s.metric()(0, 5), 0.5, 1e-15);
  EXPECT_NEAR(s.metric()(0, 9), 0.1, 1e-15);
}

TEST(Metric, LipschitzOfCoordinateIsOne) {
  const Space s = make_cycle(12);
  Field f = Field::Zero(12);
  for (int x = 0; x <= 6; ++x) f(x) = x / 12.0;
  for (int x = 7; x < 12; ++x) f(x) = (12 - x) / 12.0;
  EXPECT_NEAR(lipschitz_constant(s, f), 1.0, 1e-12);
}

TEST(Transport, IdenticalMeasuresCostNothing) {
  std::mt19937_64 gen(3);
  const Space s = make_cycle(8);
  Field p = oracle::random_field(8, gen, 0.1, 1.0);
  p /= inner(p, Field::Ones(8), s.measure());
  EXPECT_NEAR(wasserstein2(s, p, p), 0.0, 1e-12);
}

TEST(Transport, TwoPointDiracs) {
  const Space s = oracle::two_point();
  Field p(2), q(2);
  p << 2.0, 0.0;
  q << 0.0, 2.0;
  EXPECT_NEAR(wasserstein2(s, p, q), 1.0, 1e-12);
}

TEST(Transport, DiracSplitToNeighbors) {
  const Space s = make_cycle(8);
  Field p = Field::Zero(8), q = Field::Zero(8);
  p(0) = 8.0;
  q(1) = 4.0;
  q(7) = 4.0;
  const double d01 = s.metric()(0, 1);
  EXPECT_NEAR(wasserstein2(s, p, q) * wasserstein2(s, p, q), d01 * d01, 1e-12);
}

TEST(Transport, UniformMeasuresMatchPermutationOracle) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Space s = oracle::random_graph(12, 100 + trial);
    std::vector<std::size_t> all(12);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), gen);
    const std::vector<std::size_t> from(all.begin(), all.begin() + 5);
    std::shuffle(all.begin(), all.end(), gen);
    const std::vector<std::size_t> to(all.begin(), all.begin() + 5);
    Field supply = Field::Zero(12), demand = Field::Zero(12);
    for (auto x : from) supply(static_cast<Eigen::Index>(x)) += 0.2;
    for (auto y : to) demand(static_cast<Eigen::Index>(y)) += 0.2;
    const Matrix cost = s.metric().cwiseProduct(s.metric());
    EXPECT_NEAR(transport_cost(supply, demand, cost), oracle::uniform_w2_squared(s.metric(), from, to), 1e-12);
  }
}
