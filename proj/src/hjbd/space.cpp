#include "hjbd/space.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>
#include <sstream>

namespace hjbd {

using json = nlohmann::json;

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kMassTol = 1e-10;

std::vector<std::string> default_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

}  // namespace

Space::Space(std::vector<std::string> ids, Field measure, Matrix conductance, Matrix metric,
             std::vector<std::vector<double>> coords)
    : ids_(std::move(ids)),
      measure_(std::move(measure)),
      conductance_(std::move(conductance)),
      metric_(std::move(metric)),
      coords_(std::move(coords)) {
  const auto n = ids_.size();
  require(static_cast<std::size_t>(measure_.size()) == n, "measure length differs from point count",
          ErrorCode::parse);
  require(static_cast<std::size_t>(conductance_.rows()) == n &&
              static_cast<std::size_t>(conductance_.cols()) == n,
          "conductance is not n x n", ErrorCode::parse);
  require(static_cast<std::size_t>(metric_.rows()) == n && static_cast<std::size_t>(metric_.cols()) == n,
          "metric is not n x n", ErrorCode::parse);
  require(coords_.empty() || coords_.size() == n, "coords length differs from point count",
          ErrorCode::parse);

  neighbors_.assign(n, {});
  jump_rate_ = Field::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) {
    double total = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      const double c = conductance_(x, y);
      if (y != x && c > 0.0) {
        neighbors_[x].push_back({y, c});
        total += c;
      }
      if (y > x && c > 0.0) edges_.push_back({x, y, c, metric_(x, y)});
    }
    jump_rate_(x) = measure_(x) > 0.0 ? total / (2.0 * measure_(x)) : 0.0;
  }
}

Matrix Space::generator_matrix() const {
  const auto n = static_cast<Eigen::Index>(size());
  Matrix gen = Matrix::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    double total = 0.0;
    for (const auto& nb : neighbors_[x]) {
      gen(x, static_cast<Eigen::Index>(nb.point)) = nb.conductance / measure_(x);
      total += nb.conductance;
    }
    gen(x, x) = -total / measure_(x);
  }
  return gen;
}

SpaceKind parse_space_kind(const std::string& name) {
  if (name == "cycle") return SpaceKind::cycle;
  if (name == "torus2d" || name == "torus") return SpaceKind::torus2d;
  if (name == "gasket") return SpaceKind::gasket;
  if (name == "file") return SpaceKind::file;
  throw Error(ErrorCode::invalid_argument, "unknown space kind '" + name + "'");
}

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::cycle: return "cycle";
    case SpaceKind::torus2d: return "torus2d";
    case SpaceKind::gasket: return "gasket";
    case SpaceKind::file: return "file";
  }
  return "unknown";
}

Matrix shortest_path_metric(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const auto& e : edges) {
    adj[e.a].emplace_back(e.b, e.length);
    adj[e.b].emplace_back(e.a, e.length);
  }
  const double inf = std::numeric_limits<double>::infinity();
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix d = Matrix::Constant(nn, nn, inf);
  using Item = std::pair<double, std::size_t>;
  for (std::size_t src = 0; src < n; ++src) {
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d(src, src) = 0.0;
    pq.emplace(0.0, src);
    while (!pq.empty()) {
      auto [dist, x] = pq.top();
      pq.pop();
      if (dist > d(src, x)) continue;
      for (auto [y, len] : adj[x]) {
        const double cand = dist + len;
        if (cand < d(src, y)) {
          d(src, y) = cand;
          pq.emplace(cand, y);
        }
      }
    }
  }
  return d;
}

Space make_graph_space(Field measure, const std::vector<Edge>& edges, std::vector<std::string> ids,
                       std::vector<std::vector<double>> coords) {
  const auto n = static_cast<std::size_t>(measure.size());
  if (ids.empty()) ids = default_ids(n);
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix c = Matrix::Zero(nn, nn);
  for (const auto& e : edges) {
    require(e.a < n && e.b < n, "edge endpoint out of range", ErrorCode::parse);
    c(e.a, e.b) = e.conductance;
    c(e.b, e.a) = e.conductance;
  }
  Matrix d = shortest_path_metric(n, edges);
  return Space(std::move(ids), std::move(measure), std::move(c), std::move(d), std::move(coords));
}

Space make_cycle(int n, double scaling) {
  require(n >= 3, "cycle needs n >= 3");
  require(scaling > 0.0, "scaling must be positive");
  // c = n with m = 1/n makes Delta_E the three-point second difference on the
  // unit-circumference circle.
  const double c = scaling * n;
  const double len = 1.0 / n;
  std::vector<Edge> edges;
  std::vector<std::vector<double>> coords;
  for (int i = 0; i < n; ++i) {
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>((i + 1) % n);
    edges.push_back({std::min(a, b), std::max(a, b), c, len});
    const double theta = 2.0 * M_PI * i / n;
    coords.push_back({std::cos(theta) / (2.0 * M_PI), std::sin(theta) / (2.0 * M_PI)});
  }
  return make_graph_space(Field::Constant(n, 1.0 / n), edges, {}, std::move(coords));
}

Space make_torus2d(int n, double scaling) {
  require(n >= 3, "torus2d needs n >= 3");
  require(scaling > 0.0, "scaling must be positive");
  const double len = 1.0 / n;
  std::vector<Edge> edges;
  std::vector<std::vector<double>> coords;
  auto index = [n](int a, int b) { return static_cast<std::size_t>(((a + n) % n) * n + ((b + n) % n)); };
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const auto here = index(a, b);
      for (auto other : {index(a + 1, b), index(a, b + 1)}) {
        edges.push_back({std::min(here, other), std::max(here, other), scaling, len});
      }
      coords.push_back({static_cast<double>(a) / n, static_cast<double>(b) / n});
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& l, const Edge& r) { return std::tie(l.a, l.b) < std::tie(r.a, r.b); });
  return make_graph_space(Field::Constant(n * n, 1.0 / (n * n)), edges, {}, std::move(coords));
}

Space make_gasket(int level, double scaling) {
  require(level >= 0, "gasket needs level >= 0");
  require(scaling > 0.0, "scaling must be positive");
  // Integer lattice coordinates in the basis e1 = (1,0), e2 = (1/2, sqrt(3)/2)
  // with the outer triangle of side 2^level.
  std::map<std::pair<long, long>, std::size_t> index;
  std::vector<std::pair<long, long>> lattice;
  std::vector<std::pair<std::size_t, std::size_t>> links;
  auto vertex = [&](long i, long j) {
    auto [it, inserted] = index.try_emplace({i, j}, lattice.size());
    if (inserted) lattice.emplace_back(i, j);
    return it->second;
  };
  auto recurse = [&](auto&& self, long i, long j, long side, int depth) -> void {
    if (depth == 0) {
      const auto p = vertex(i, j);
      const auto q = vertex(i + side, j);
      const auto r = vertex(i, j + side);
      links.emplace_back(p, q);
      links.emplace_back(q, r);
      links.emplace_back(r, p);
      return;
    }
    const long half = side / 2;
    self(self, i, j, half, depth - 1);
    self(self, i + half, j, half, depth - 1);
    self(self, i, j + half, half, depth - 1);
  };
  const long side = 1L << level;
  recurse(recurse, 0, 0, side, level);

  const std::size_t n = lattice.size();
  // Energy renormalization (5/3)^level so that rates scale like 5^level.
  const double c = scaling * std::pow(5.0 / 3.0, level);
  const double len = 1.0 / static_cast<double>(side);
  std::vector<Edge> edges;
  for (auto [p, q] : links) edges.push_back({std::min(p, q), std::max(p, q), c, len});
  std::vector<std::vector<double>> coords;
  for (auto [i, j] : lattice) {
    coords.push_back({(i + 0.5 * j) * len, (std::sqrt(3.0) / 2.0) * j * len});
  }
  return make_graph_space(Field::Constant(static_cast<Eigen::Index>(n), 1.0 / n), edges, {},
                          std::move(coords));
}

Space build_space(const SpaceSpec& spec) {
  auto space = [&]() {
    switch (spec.kind) {
      case SpaceKind::cycle: return make_cycle(spec.size, spec.scaling);
      case SpaceKind::torus2d: return make_torus2d(spec.size, spec.scaling);
      case SpaceKind::gasket: return make_gasket(spec.size, spec.scaling);
      case SpaceKind::file: return load_space_file(spec.path);
    }
    throw Error(ErrorCode::invalid_argument, "unknown space kind");
  }();
  const auto report = validate_space(space);
  if (!report.ok()) {
    std::string msg = "invalid space:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw Error(ErrorCode::invalid_space, msg);
  }
  return space;
}

Space parse_space_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("malformed space document: ") + e.what());
  }
  try {
    require(doc.is_object(), "space document must be an object", ErrorCode::parse);
    require(doc.contains("m") && doc.contains("edges"), "space document needs 'm' and 'edges'",
            ErrorCode::parse);
    const auto& mj = doc.at("m");
    const std::size_t n = mj.size();
    std::vector<std::string> ids;
    if (doc.contains("points")) {
      for (const auto& p : doc.at("points")) ids.push_back(p.is_string() ? p.get<std::string>() : p.dump());
      require(ids.size() == n, "'points' and 'm' differ in length", ErrorCode::parse);
    } else {
      ids = default_ids(n);
    }
    Field m(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) m(i) = mj.at(i).get<double>();

    std::vector<std::vector<double>> coords;
    if (doc.contains("coords")) coords = doc.at("coords").get<std::vector<std::vector<double>>>();
    require(coords.empty() || coords.size() == n, "'coords' length differs from point count",
            ErrorCode::parse);

    const auto nn = static_cast<Eigen::Index>(n);
    Matrix c = Matrix::Zero(nn, nn);
    Matrix seen = Matrix::Zero(nn, nn);
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      require(e.is_array() && (e.size() == 3 || e.size() == 4), "edge entries are [i, j, c] or [i, j, c, length]",
              ErrorCode::parse);
      const auto i = e.at(0).get<std::size_t>();
      const auto j = e.at(1).get<std::size_t>();
      const double cij = e.at(2).get<double>();
      require(i < n && j < n, "edge endpoint out of range", ErrorCode::parse);
      double len = 1.0;
      if (e.size() == 4) {
        len = e.at(3).get<double>();
      } else if (!coords.empty()) {
        double s = 0.0;
        for (std::size_t k = 0; k < coords[i].size() && k < coords[j].size(); ++k) {
          s += (coords[i][k] - coords[j][k]) * (coords[i][k] - coords[j][k]);
        }
        len = std::sqrt(s);
      }
      // A listed pair sets both directions unless the reverse is listed explicitly.
      c(i, j) = cij;
      seen(i, j) = 1.0;
      if (seen(j, i) == 0.0) c(j, i) = cij;
      if (i != j && cij > 0.0) edges.push_back({std::min(i, j), std::max(i, j), cij, len});
    }
    Matrix d;
    if (doc.contains("metric")) {
      const auto rows = doc.at("metric").get<std::vector<std::vector<double>>>();
      require(rows.size() == n, "'metric' must be n x n", ErrorCode::parse);
      d.resize(nn, nn);
      for (std::size_t i = 0; i < n; ++i) {
        require(rows[i].size() == n, "'metric' must be n x n", ErrorCode::parse);
        for (std::size_t j = 0; j < n; ++j) d(i, j) = rows[i][j];
      }
    } else {
      d = shortest_path_metric(n, edges);
    }
    return Space(std::move(ids), std::move(m), std::move(c), std::move(d), std::move(coords));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("malformed space document: ") + e.what());
  }
}

Space load_space_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open space file '" + path + "'", ErrorCode::io);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_space_json(buf.str());
}

std::string space_to_json(const Space& space) {
  json doc;
  doc["points"] = space.ids();
  std::vector<double> m(space.measure().data(), space.measure().data() + space.measure().size());
  doc["m"] = m;
  json edges = json::array();
  const auto n = space.size();
  // Emit every ordered pair that breaks symmetry so asymmetric inputs survive a round trip.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double cij = space.conductance()(i, j);
      const double cji = space.conductance()(j, i);
      if (cij == 0.0 && cji == 0.0) continue;
      edges.push_back({i, j, cij, space.metric()(i, j)});
      if (cji != cij) edges.push_back({j, i, cji, space.metric()(j, i)});
    }
  }
  doc["edges"] = edges;
  if (!space.coords().empty()) doc["coords"] = space.coords();
  return doc.dump(1);
}

void save_space_file(const Space& space, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write space file '" + path + "'", ErrorCode::io);
  out << space_to_json(space) << '\n';
}

bool ValidationReport::contains(const std::string& needle) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const std::string& v) { return v.find(needle) != std::string::npos; });
}

ValidationReport validate_space(const Space& space) {
  ValidationReport report;
  auto add = [&](const std::string& v) { report.violations.push_back(v); };
  const auto n = space.size();
  const auto& m = space.measure();
  const auto& c = space.conductance();
  const auto& d = space.metric();

  if (n < 2) add("fewer than two points");
  if (!m.allFinite() || !all_finite(c)) {
    add("non-finite entries");
    return report;
  }
  if ((m.array() <= 0.0).any()) add("measure not positive");
  if (std::abs(m.sum() - 1.0) > kMassTol) add("measure not normalized");

  bool asym = false, negative = false, diag = false;
  for (std::size_t x = 0; x < n; ++x) {
    if (c(x, x) != 0.0) diag = true;
    for (std::size_t y = 0; y < n; ++y) {
      if (c(x, y) < 0.0) negative = true;
      const double scale = std::max({1.0, std::abs(c(x, y)), std::abs(c(y, x))});
      if (std::abs(c(x, y) - c(y, x)) > kSymmetryTol * scale) asym = true;
    }
  }
  if (asym) add("conductance not symmetric");
  if (negative) add("conductance negative");
  if (diag) add("conductance diagonal nonzero");

  if (n > 0) {
    std::vector<char> visited(n, 0);
    std::vector<std::size_t> stack{0};
    visited[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      for (std::size_t y = 0; y < n; ++y) {
        if (!visited[y] && (c(x, y) > 0.0 || c(y, x) > 0.0)) {
          visited[y] = 1;
          ++count;
          stack.push_back(y);
        }
      }
    }
    if (count != n) add("graph not connected");
  }

  if (!all_finite(d)) {
    add("metric not finite");
    return report;
  }
  bool dsym = false, dneg = false, ddiag = false, dzero = false, triangle = false;
  for (std::size_t x = 0; x < n; ++x) {
    if (d(x, x) != 0.0) ddiag = true;
    for (std::size_t y = 0; y < n; ++y) {
      if (d(x, y) < 0.0) dneg = true;
      if (std::abs(d(x, y) - d(y, x)) > kSymmetryTol * std::max(1.0, std::abs(d(x, y)))) dsym = true;
      if (x != y && d(x, y) <= 0.0) dzero = true;
    }
  }
  for (std::size_t x = 0; x < n && !triangle; ++x) {
    for (std::size_t y = 0; y < n && !triangle; ++y) {
      const double dxy = d(x, y);
      for (std::size_t z = 0; z < n; ++z) {
        if (d(x, z) > dxy + d(y, z) + 1e-12 * (1.0 + d(x, z))) {
          triangle = true;
          break;
        }
      }
    }
  }
  if (dsym) add("metric not symmetric");
  if (dneg) add("metric negative");
  if (ddiag) add("metric diagonal nonzero");
  if (dzero) add("metric vanishes between distinct points");
  if (triangle) add("metric violates triangle inequality");
  return report;
}

Field generator_apply(const Space& space, const Field& f) {
  const auto n = space.size();
  Field out(static_cast<Eigen::Index>(n));
  const auto& m = space.measure();
  for (std::size_t x = 0; x < n; ++x) {
    double acc = 0.0;
    for (const auto& nb : space.neighbors(x)) acc += nb.conductance * (f(nb.point) - f(x));
    out(x) = acc / m(x);
  }
  return out;
}

Field carre_du_champ(const Space& space, const Field& f, const Field& g) {
  const auto n = space.size();
  Field out(static_cast<Eigen::Index>(n));
  const auto& m = space.measure();
  for (std::size_t x = 0; x < n; ++x) {
    double acc = 0.0;
    for (const auto& nb : space.neighbors(x)) {
      acc += nb.conductance * (f(x) - f(nb.point)) * (g(x) - g(nb.point));
    }
    out(x) = acc / (2.0 * m(x));
  }
  return out;
}

double energy(const Space& space, const Field& f, const Field& g) {
  double acc = 0.0;
  for (const auto& e : space.edges()) acc += e.conductance * (f(e.a) - f(e.b)) * (g(e.a) - g(e.b));
  return acc;
}

double lipschitz_constant(const Space& space, const Field& f) {
  double lip = 0.0;
  for (const auto& e : space.edges()) {
    lip = std::max(lip, std::abs(f(e.a) - f(e.b)) / space.metric()(e.a, e.b));
  }
  return lip;
}

}  // namespace hjbd
