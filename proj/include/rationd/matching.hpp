#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rationd/error.hpp"
#include "rationd/rational.hpp"

namespace rationd {

struct MatchingEdge {
  std::size_t left = 0;
  std::size_t right = 0;
  Integer weight;  // objective coefficient times MatchingProblem::scale
};

/// Bipartite b-matching / transportation problem. Left nodes have supplies,
/// right nodes capacities; unmatched supply is free (an implicit sink).
/// The objective is sum(weight * flow) / scale.
struct MatchingProblem {
  std::vector<Rational> supplies;
  std::vector<Rational> capacities;
  std::vector<MatchingEdge> edges;
  Integer scale = 1;
};

struct MatchingSolution {
  std::vector<Rational> flow;  // per edge, in input order
  Rational objective = 0;
  Rational size = 0;
  // Node potentials, ordered source, left nodes, right nodes, sink. Every
  // residual arc (including the free return arc sink -> source) has
  // nonnegative reduced cost cost(u,v) + pi(u) - pi(v).
  std::vector<Integer> potentials;
};

namespace detail {

// Residual network of the min-cost-flow form: source -> left (supply),
// left -> right (cost -weight), right -> sink (capacity). Arc 2k is forward,
// arc 2k+1 its reverse.
class FlowNetwork {
 public:
  struct Arc {
    std::size_t to;
    Rational residual;
    Integer cost;
  };

  explicit FlowNetwork(const MatchingProblem& p)
      : left_(p.supplies.size()), right_(p.capacities.size()) {
    nodes_ = left_ + right_ + 2;
    out_.resize(nodes_);
    for (std::size_t i = 0; i < left_; ++i) {
      if (p.supplies[i] < 0)
        fail(ErrorKind::InvalidArgument, "negative supply");
      add_arc(source(), left(i), p.supplies[i], Integer(0));
    }
    for (const auto& e : p.edges) {
      if (e.left >= left_ || e.right >= right_)
        fail(ErrorKind::InvalidArgument, "edge references an undeclared node");
      edge_arcs_.push_back(arcs_.size());
      add_arc(left(e.left), right(e.right), p.supplies[e.left], Integer(-e.weight));
    }
    for (std::size_t j = 0; j < right_; ++j) {
      if (p.capacities[j] < 0)
        fail(ErrorKind::InvalidArgument, "negative capacity");
      add_arc(right(j), sink(), p.capacities[j], Integer(0));
    }
  }

  std::size_t source() const { return 0; }
  std::size_t sink() const { return nodes_ - 1; }
  std::size_t left(std::size_t i) const { return 1 + i; }
  std::size_t right(std::size_t j) const { return 1 + left_ + j; }
  std::size_t nodes() const { return nodes_; }

  std::vector<Arc>& arcs() { return arcs_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<std::size_t>& out(std::size_t v) const { return out_[v]; }
  const std::vector<std::size_t>& edge_arcs() const { return edge_arcs_; }
  std::size_t tail(std::size_t arc) const { return arcs_[arc ^ 1].to; }

  void push(std::size_t arc, const Rational& amount) {
    arcs_[arc].residual -= amount;
    arcs_[arc ^ 1].residual += amount;
  }

  // Flow currently on the forward arc `arc` (even index).
  const Rational& flow(std::size_t arc) const { return arcs_[arc ^ 1].residual; }

 private:
  void add_arc(std::size_t from, std::size_t to, const Rational& cap,
               const Integer& cost) {
    out_[from].push_back(arcs_.size());
    arcs_.push_back({to, cap, cost});
    out_[to].push_back(arcs_.size());
    arcs_.push_back({from, Rational(0), Integer(-cost)});
  }

  std::size_t left_;
  std::size_t right_;
  std::size_t nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::size_t> edge_arcs_;
};

// Potentials certifying that no residual cycle (with the free return arc
// sink -> source) has negative cost, or nullopt if one exists.
inline std::optional<std::vector<Integer>> circulation_potentials(
    const FlowNetwork& net) {
  const std::size_t n = net.nodes();
  std::vector<Integer> dist(n, Integer(0));  // virtual root at distance 0
  Rational total = 0;
  for (std::size_t arc : net.out(net.source()))
    if (arc % 2 == 0) total += net.flow(arc);
  for (std::size_t round = 0; round <= n; ++round) {
    bool changed = false;
    auto relax = [&](std::size_t u, std::size_t v, const Integer& cost) {
      Integer cand = dist[u] + cost;
      if (cand < dist[v]) {
        dist[v] = cand;
        changed = true;
      }
    };
    for (std::size_t arc = 0; arc < net.arcs().size(); ++arc) {
      const auto& a = net.arcs()[arc];
      if (a.residual > 0) relax(net.tail(arc), a.to, a.cost);
    }
    relax(net.sink(), net.source(), Integer(0));
    if (total > 0) relax(net.source(), net.sink(), Integer(0));
    if (!changed) return dist;
  }
  return std::nullopt;
}

}  // namespace detail

/// Checks feasibility and the potential certificate of `solution`, and that
/// the reported objective and size match the flows exactly.
inline bool verify_optimality(const MatchingProblem& problem,
                              const MatchingSolution& solution) {
  if (solution.flow.size() != problem.edges.size()) return false;
  std::vector<Rational> out(problem.supplies.size(), Rational(0));
  std::vector<Rational> in(problem.capacities.size(), Rational(0));
  Rational objective = 0;
  Rational size = 0;
  detail::FlowNetwork net(problem);
  for (std::size_t e = 0; e < problem.edges.size(); ++e) {
    const auto& f = solution.flow[e];
    if (f < 0) return false;
    out[problem.edges[e].left] += f;
    in[problem.edges[e].right] += f;
    objective += f * Rational(problem.edges[e].weight);
    size += f;
    net.push(net.edge_arcs()[e], f);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] > problem.supplies[i]) return false;
    net.push(net.out(net.left(i)).front() ^ 1, out[i]);  // source -> left
  }
  for (std::size_t j = 0; j < in.size(); ++j) {
    if (in[j] > problem.capacities[j]) return false;
    net.push(net.out(net.right(j)).back(), in[j]);  // right -> sink
  }
  objective /= Rational(problem.scale);
  if (objective != solution.objective || size != solution.size) return false;

  const auto& pi = solution.potentials;
  if (pi.size() != net.nodes()) return false;
  for (std::size_t arc = 0; arc < net.arcs().size(); ++arc) {
    const auto& a = net.arcs()[arc];
    if (a.residual > 0 && a.cost + pi[net.tail(arc)] - pi[a.to] < 0) return false;
  }
  if (pi[net.sink()] - pi[net.source()] < 0) return false;
  if (size > 0 && pi[net.source()] - pi[net.sink()] < 0) return false;
  return true;
}

/// Exact maximum-weight transportation solve by successive shortest paths
/// with node potentials. Supplies and capacities may be any nonnegative
/// rationals; augmentation stops once no path has positive gain.
inline MatchingSolution solve_transportation(const MatchingProblem& problem) {
  detail::FlowNetwork net(problem);
  const std::size_t n = net.nodes();
  auto& arcs = net.arcs();

  // Bellman-Ford from the source over the initial (acyclic) residual graph.
  std::vector<std::optional<Integer>> init(n);
  init[net.source()] = Integer(0);
  for (std::size_t round = 0; round < n; ++round) {
    bool changed = false;
    for (std::size_t arc = 0; arc < arcs.size(); ++arc) {
      const auto& a = arcs[arc];
      const auto u = net.tail(arc);
      if (!(a.residual > 0) || !init[u]) continue;
      Integer cand = *init[u] + a.cost;
      if (!init[a.to] || cand < *init[a.to]) {
        init[a.to] = cand;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::vector<Integer> pi(n, Integer(0));
  for (std::size_t v = 0; v < n; ++v)
    if (init[v]) pi[v] = *init[v];

  std::vector<std::optional<Integer>> dist(n);
  std::vector<std::size_t> via(n);
  std::vector<bool> done(n);
  while (true) {
    // Dijkstra on reduced costs; ties go to the lowest node index.
    std::fill(dist.begin(), dist.end(), std::nullopt);
    std::fill(done.begin(), done.end(), false);
    dist[net.source()] = Integer(0);
    while (true) {
      std::size_t best = n;
      for (std::size_t v = 0; v < n; ++v)
        if (!done[v] && dist[v] && (best == n || *dist[v] < *dist[best])) best = v;
      if (best == n) break;
      done[best] = true;
      for (std::size_t arc : net.out(best)) {
        const auto& a = arcs[arc];
        if (!(a.residual > 0) || done[a.to]) continue;
        Integer cand = *dist[best] + a.cost + pi[best] - pi[a.to];
        if (!dist[a.to] || cand < *dist[a.to]) {
          dist[a.to] = cand;
          via[a.to] = arc;
        }
      }
    }
    const auto t = net.sink();
    if (!dist[t]) break;
    // Unreachable nodes move by the largest finite distance so that arcs
    // leaving them keep nonnegative reduced cost.
    Integer far = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (dist[v] && *dist[v] > far) far = *dist[v];
    for (std::size_t v = 0; v < n; ++v) pi[v] += dist[v] ? *dist[v] : far;
    if (pi[t] - pi[net.source()] >= 0) break;  // no positive-gain path left

    Rational bottleneck;
    bool first = true;
    for (std::size_t v = t; v != net.source(); v = net.tail(via[v])) {
      const auto& r = arcs[via[v]].residual;
      if (first || r < bottleneck) bottleneck = r;
      first = false;
    }
    for (std::size_t v = t; v != net.source(); v = net.tail(via[v]))
      net.push(via[v], bottleneck);
  }

  MatchingSolution sol;
  sol.flow.reserve(problem.edges.size());
  for (std::size_t e = 0; e < problem.edges.size(); ++e) {
    const auto& f = net.flow(net.edge_arcs()[e]);
    sol.flow.push_back(f);
    sol.size += f;
    sol.objective += f * Rational(problem.edges[e].weight);
  }
  sol.objective /= Rational(problem.scale);
  auto cert = detail::circulation_potentials(net);
  if (!cert) fail(ErrorKind::Internal, "solver terminated at a non-optimal flow");
  sol.potentials = std::move(*cert);
#ifdef RATIOND_VERIFY_SOLVES
  if (!verify_optimality(problem, sol))
    fail(ErrorKind::Internal, "optimality certificate rejected");
#endif
  return sol;
}

/// Integral maximum-weight b-matching. Requires integer supplies and
/// capacities, and then every returned flow is an integer.
inline MatchingSolution max_weight_b_matching(const MatchingProblem& problem) {
  for (const auto& s : problem.supplies)
    if (s.get_den() != 1) fail(ErrorKind::InvalidArgument, "non-integer supply");
  for (const auto& c : problem.capacities)
    if (c.get_den() != 1) fail(ErrorKind::InvalidArgument, "non-integer capacity");
  return solve_transportation(problem);
}

/// Maximum cardinality V*, ignoring the weights.
inline std::int64_t max_size(const MatchingProblem& problem) {
  MatchingProblem unit = problem;
  unit.scale = 1;
  for (auto& e : unit.edges) e.weight = 1;
  const auto sol = max_weight_b_matching(unit);
  return sol.size.get_num().get_si();
}

}  // namespace rationd
