#include "hjbd/transport.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <vector>

namespace hjbd {

namespace {

class MinCostFlow {
 public:
  explicit MinCostFlow(std::size_t nodes) : graph_(nodes), potential_(nodes, 0.0) {}

  void add_arc(std::size_t from, std::size_t to, double cap, double cost) {
    graph_[from].push_back({to, graph_[to].size(), cap, cost});
    graph_[to].push_back({from, graph_[from].size() - 1, 0.0, -cost});
  }

  // Successive shortest paths with Dijkstra on reduced costs.
  double run(std::size_t source, std::size_t sink, double amount, double cap_eps) {
    const std::size_t n = graph_.size();
    const double inf = std::numeric_limits<double>::infinity();
    double remaining = amount;
    double total_cost = 0.0;
    std::vector<double> dist(n);
    std::vector<std::size_t> prev_node(n), prev_arc(n);
    using Item = std::pair<double, std::size_t>;
    while (remaining > cap_eps) {
      std::fill(dist.begin(), dist.end(), inf);
      dist[source] = 0.0;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      pq.emplace(0.0, source);
      while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        for (std::size_t k = 0; k < graph_[v].size(); ++k) {
          const auto& arc = graph_[v][k];
          if (arc.cap <= cap_eps) continue;
          // Reduced costs are nonnegative in exact arithmetic.
          const double reduced = std::max(0.0, arc.cost + potential_[v] - potential_[arc.to]);
          if (d + reduced < dist[arc.to]) {
            dist[arc.to] = d + reduced;
            prev_node[arc.to] = v;
            prev_arc[arc.to] = k;
            pq.emplace(dist[arc.to], arc.to);
          }
        }
      }
      if (dist[sink] == inf) break;
      for (std::size_t v = 0; v < n; ++v) {
        if (dist[v] < inf) potential_[v] += dist[v];
      }
      double push = remaining;
      for (std::size_t v = sink; v != source; v = prev_node[v]) {
        push = std::min(push, graph_[prev_node[v]][prev_arc[v]].cap);
      }
      for (std::size_t v = sink; v != source; v = prev_node[v]) {
        auto& arc = graph_[prev_node[v]][prev_arc[v]];
        arc.cap -= push;
        graph_[v][arc.rev].cap += push;
        total_cost += push * arc.cost;
      }
      remaining -= push;
    }
    require(remaining <= 1e-9 * std::max(1.0, amount), "transport problem infeasible", ErrorCode::numerical);
    return total_cost;
  }

 private:
  struct Arc {
    std::size_t to;
    std::size_t rev;
    double cap;
    double cost;
  };
  std::vector<std::vector<Arc>> graph_;
  std::vector<double> potential_;
};

}  // namespace

double transport_cost(const Field& supply, const Field& demand, const Matrix& cost) {
  require(supply.size() == cost.rows() && demand.size() == cost.cols(), "transport dimensions differ");
  const double total = supply.sum();
  require(std::abs(total - demand.sum()) <= 1e-9 * std::max(1.0, std::abs(total)),
          "transport marginals have different mass");
  std::vector<Eigen::Index> src, dst;
  for (Eigen::Index i = 0; i < supply.size(); ++i) {
    if (supply(i) > 0.0) src.push_back(i);
  }
  for (Eigen::Index j = 0; j < demand.size(); ++j) {
    if (demand(j) > 0.0) dst.push_back(j);
  }
  const std::size_t s = 0, t = 1 + src.size() + dst.size();
  MinCostFlow flow(t + 1);
  const double big = std::numeric_limits<double>::max();
  for (std::size_t a = 0; a < src.size(); ++a) flow.add_arc(s, 1 + a, supply(src[a]), 0.0);
  for (std::size_t b = 0; b < dst.size(); ++b) flow.add_arc(1 + src.size() + b, t, demand(dst[b]), 0.0);
  for (std::size_t a = 0; a < src.size(); ++a) {
    for (std::size_t b = 0; b < dst.size(); ++b) {
      flow.add_arc(1 + a, 1 + src.size() + b, big, cost(src[a], dst[b]));
    }
  }
  const double amount = std::min(supply.sum(), demand.sum());
  return flow.run(s, t, amount, 1e-15 * std::max(1.0, amount));
}

double wasserstein2(const Space& space, const Field& p, const Field& q) {
  const auto& m = space.measure();
  require(p.size() == m.size() && q.size() == m.size(), "density length differs from point count");
  require((p.array() >= 0.0).all() && (q.array() >= 0.0).all(), "densities must be nonnegative");
  const Field a = p.cwiseProduct(m);
  const Field b = q.cwiseProduct(m);
  require(std::abs(a.sum() - 1.0) <= 1e-9 && std::abs(b.sum() - 1.0) <= 1e-9,
          "marginals are not normalized");
  const Matrix cost = space.metric().cwiseProduct(space.metric());
  return std::sqrt(std::max(0.0, transport_cost(a, b, cost)));
}

}  // namespace hjbd
