#pragma once

#include "hjbd/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hjbd {

/// One undirected conductance edge, a < b.
struct Edge {
  std::size_t a = 0;
  std::size_t b = 0;
  double conductance = 0.0;
  double length = 1.0;
};

/// Finite metric measure space carrying the graph Dirichlet form
///   E(f,g) = 1/2 sum_{x,y} c(x,y) (f(x)-f(y)) (g(x)-g(y)).
///
/// A Space may be constructed from arbitrary data so that validate_space can
/// report on it; every numerical operation assumes a valid space.
class Space {
 public:
  Space(std::vector<std::string> ids, Field measure, Matrix conductance, Matrix metric,
        std::vector<std::vector<double>> coords = {});

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Field& measure() const { return measure_; }
  const Matrix& conductance() const { return conductance_; }
  const Matrix& metric() const { return metric_; }
  const std::vector<std::vector<double>>& coords() const { return coords_; }

  /// Edges with c(a,b) > 0 taken from the upper triangle.
  const std::vector<Edge>& edges() const { return edges_; }

  /// Neighbors of x with c(x,y) > 0, read from row x of the conductance.
  struct Neighbor {
    std::size_t point;
    double conductance;
  };
  const std::vector<Neighbor>& neighbors(std::size_t x) const { return neighbors_[x]; }

  /// Total jump rate of the process generated by (1/2) Delta_E at each point,
  /// r(x) = sum_y c(x,y) / (2 m(x)).
  const Field& jump_rate() const { return jump_rate_; }

  /// Dense matrix of Delta_E.
  Matrix generator_matrix() const;

 private:
  std::vector<std::string> ids_;
  Field measure_;
  Matrix conductance_;
  Matrix metric_;
  std::vector<std::vector<double>> coords_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> neighbors_;
  Field jump_rate_;
};

enum class SpaceKind { cycle, torus2d, gasket, file };

struct SpaceSpec {
  SpaceKind kind = SpaceKind::cycle;
  int size = 8;  // n for cycle/torus2d, level for gasket
  double scaling = 1.0;
  std::string path;  // for SpaceKind::file
};

SpaceKind parse_space_kind(const std::string& name);
std::string to_string(SpaceKind kind);

/// Builds and validates a space; throws Error(invalid_space) listing violations.
Space build_space(const SpaceSpec& spec);

Space make_cycle(int n, double scaling = 1.0);
Space make_torus2d(int n, double scaling = 1.0);
Space make_gasket(int level, double scaling = 1.0);

/// Space from an explicit measure and undirected edge list; the metric is the
/// shortest-path distance over the edge lengths.
Space make_graph_space(Field measure, const std::vector<Edge>& edges,
                       std::vector<std::string> ids = {},
                       std::vector<std::vector<double>> coords = {});

/// Reads a space document without validating it.
Space load_space_file(const std::string& path);
Space parse_space_json(const std::string& text);
void save_space_file(const Space& space, const std::string& path);
std::string space_to_json(const Space& space);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  bool contains(const std::string& needle) const;
};

ValidationReport validate_space(const Space& space);

/// Shortest-path distances over edges weighted by their length.
Matrix shortest_path_metric(std::size_t n, const std::vector<Edge>& edges);

// Dirichlet-form calculus. All of these are exact algebraic identities of the
// graph form; none of them assumes strong locality.

Field generator_apply(const Space& space, const Field& f);
Field carre_du_champ(const Space& space, const Field& f, const Field& g);
double energy(const Space& space, const Field& f, const Field& g);

/// max over conductance edges of |f(x)-f(y)| / d(x,y)
double lipschitz_constant(const Space& space, const Field& f);

}  // namespace hjbd
