#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "rationd/instance.hpp"
#include "rationd/validity.hpp"

namespace rationd {

struct WeightedAllocation {
  Rational weight;
  IntegralAllocation allocation;
  friend bool operator==(const WeightedAllocation&, const WeightedAllocation&) = default;
};

using ConvexCombination = std::vector<WeightedAllocation>;

/// Entrywise sum of weight * component.
inline FractionalAllocation combine(const ConvexCombination& parts,
                                    std::size_t num_agents, std::size_t num_categories) {
  Grid<Rational> g(num_agents, num_categories, Rational(0));
  for (const auto& [w, x] : parts)
    for (std::size_t a = 0; a < num_agents; ++a)
      if (x.assigned(a)) g(a, static_cast<std::size_t>(x.category_of[a])) += w;
  return FractionalAllocation(std::move(g));
}

namespace detail {

using Cells = std::vector<Rational>;  // row-major agent x category

struct Split {
  Cells plus;   // x + eps * dir
  Cells minus;  // x - eps' * dir
  Rational w_plus;
  Rational w_minus;
};

// Largest step t >= 0 keeping every cell and every listed total inside its
// bounds when moving along `dir`.
class StepLimit {
 public:
  void cell(const Rational& value, int coef) {
    if (coef > 0) bound((1 - value) / coef);
    if (coef < 0) bound(value / -coef);
  }
  void total(const Rational& value, int coef, const Rational& lo, const Rational& hi) {
    if (coef > 0) bound((hi - value) / coef);
    if (coef < 0) bound((value - lo) / -coef);
  }
  const Rational& value() const { return *limit_; }

 private:
  void bound(const Rational& t) {
    if (!limit_ || t < *limit_) limit_ = t;
  }
  std::optional<Rational> limit_;
};

// Moves x both ways along dir as far as the bounds allow and records the
// weights that average back to x.
inline Split split_along(const Cells& x, const std::vector<int>& dir,
                         std::size_t na, std::size_t nc,
                         const std::vector<std::pair<Rational, Rational>>& agent_bounds,
                         const std::vector<std::pair<Rational, Rational>>& category_bounds) {
  std::vector<int> agent_coef(na, 0), category_coef(nc, 0);
  std::vector<Rational> agent_total(na, Rational(0)), category_total(nc, Rational(0));
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t c = 0; c < nc; ++c) {
      agent_coef[a] += dir[a * nc + c];
      category_coef[c] += dir[a * nc + c];
      agent_total[a] += x[a * nc + c];
      category_total[c] += x[a * nc + c];
    }
  StepLimit up, down;
  for (std::size_t i = 0; i < x.size(); ++i) {
    up.cell(x[i], dir[i]);
    down.cell(x[i], -dir[i]);
  }
  for (std::size_t a = 0; a < na; ++a) {
    up.total(agent_total[a], agent_coef[a], agent_bounds[a].first, agent_bounds[a].second);
    down.total(agent_total[a], -agent_coef[a], agent_bounds[a].first, agent_bounds[a].second);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    up.total(category_total[c], category_coef[c], category_bounds[c].first,
             category_bounds[c].second);
    down.total(category_total[c], -category_coef[c], category_bounds[c].first,
               category_bounds[c].second);
  }
  const Rational eps = up.value();
  const Rational eps2 = down.value();
  if (!(eps > 0) || !(eps2 > 0)) fail(ErrorKind::Internal, "degenerate decomposition step");
  Split s{x, x, eps2 / (eps + eps2), eps / (eps + eps2)};
  for (std::size_t i = 0; i < x.size(); ++i) {
    s.plus[i] += eps * dir[i];
    s.minus[i] -= eps2 * dir[i];
  }
  return s;
}

inline bool fractional(const Rational& v) { return v > 0 && v < 1; }

// Red/white pair graph step: moves mass between two partly allocated agents
// along an alternating path (shared category, then shared agent, ...).
inline std::optional<Split> split_partial_agents(const Cells& x, std::size_t na,
                                                 std::size_t nc) {
  std::vector<Rational> agent_total(na, Rational(0));
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t c = 0; c < nc; ++c) agent_total[a] += x[a * nc + c];
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (fractional(x[i])) nodes.push_back(i);
  auto red = [&](std::size_t cell) { return agent_total[cell / nc] < 1; };
  std::optional<std::size_t> start;
  for (std::size_t cell : nodes)
    if (red(cell)) {
      start = cell;
      break;
    }
  if (!start) return std::nullopt;

  // BFS over (cell, next move): 0 = move within category, 1 = within agent.
  const std::size_t n = x.size();
  std::vector<std::optional<std::pair<std::size_t, int>>> parent(2 * n);
  std::vector<bool> seen(2 * n, false);
  std::deque<std::pair<std::size_t, int>> queue{{*start, 0}};
  seen[*start * 2] = true;
  std::optional<std::size_t> goal;
  while (!queue.empty() && !goal) {
    const auto [u, move] = queue.front();
    queue.pop_front();
    for (std::size_t v : nodes) {
      if (v == u) continue;
      const bool linked = move == 0 ? v % nc == u % nc
                                    : v / nc == u / nc && !red(v);
      if (!linked) continue;
      const int next = 1 - move;
      if (seen[v * 2 + next]) continue;
      seen[v * 2 + next] = true;
      parent[v * 2 + next] = std::pair{u, move};
      if (move == 0 && red(v)) {
        goal = v;
        break;
      }
      queue.push_back({v, next});
    }
  }
  if (!goal) fail(ErrorKind::Internal, "partly allocated agent has no partner path");

  // Walk back: the goal gains, then signs alternate to the start, which loses.
  std::vector<int> dir(n, 0);
  std::size_t cell = *goal;
  int state = 1;
  int sign = 1;
  while (true) {
    dir[cell] += sign;
    const auto& p = parent[cell * 2 + state];
    if (!p) break;
    cell = p->first;
    state = p->second;
    sign = -sign;
  }
  std::vector<std::pair<Rational, Rational>> agent_bounds(na, {Rational(0), Rational(1)});
  std::vector<std::pair<Rational, Rational>> category_bounds(nc, {Rational(0), Rational(0)});
  for (std::size_t c = 0; c < nc; ++c) {
    Rational t = 0;
    for (std::size_t a = 0; a < na; ++a) t += x[a * nc + c];
    category_bounds[c] = {t, t};
  }
  return split_along(x, dir, na, nc, agent_bounds, category_bounds);
}

// Cycle or leaf-to-leaf path in the graph of fractional cells, for an
// allocation where every agent total is 0 or 1.
inline std::optional<Split> split_integral_agents(const Cells& x, std::size_t na,
                                                  std::size_t nc) {
  // Bipartite graph: agent a is node a, category c is node na + c.
  std::vector<std::vector<std::size_t>> adj(na + nc);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t c = 0; c < nc; ++c)
      if (fractional(x[a * nc + c])) {
        adj[a].push_back(na + c);
        adj[na + c].push_back(a);
      }
  std::optional<std::size_t> first;
  for (std::size_t v = 0; v < adj.size() && !first; ++v)
    if (!adj[v].empty()) first = v;
  if (!first) return std::nullopt;

  // Walk without stepping straight back; a dead end restarts the walk from
  // that leaf, which then ends in a cycle or a second leaf.
  auto walk = [&](std::size_t from) {
    std::vector<std::size_t> path{from};
    std::vector<std::optional<std::size_t>> pos(adj.size());
    pos[from] = 0;
    std::optional<std::size_t> prev;
    std::size_t cur = from;
    while (true) {
      std::optional<std::size_t> next;
      for (std::size_t w : adj[cur])
        if (!prev || w != *prev) {
          next = w;
          break;
        }
      if (!next) return std::pair{path, std::size_t{0}};  // leaf reached
      if (pos[*next]) {
        std::vector<std::size_t> cycle(path.begin() + static_cast<std::ptrdiff_t>(*pos[*next]),
                                       path.end());
        cycle.push_back(*next);
        return std::pair{cycle, std::size_t{1}};
      }
      pos[*next] = path.size();
      path.push_back(*next);
      prev = cur;
      cur = *next;
    }
  };
  auto [route, closed] = walk(*first);
  if (!closed) std::tie(route, closed) = walk(route.back());

  std::vector<int> dir(x.size(), 0);
  int sign = 1;
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    const std::size_t u = route[i], v = route[i + 1];
    const std::size_t a = u < na ? u : v;
    const std::size_t c = (u < na ? v : u) - na;
    dir[a * nc + c] += sign;
    sign = -sign;
  }
  std::vector<std::pair<Rational, Rational>> agent_bounds(na);
  for (std::size_t a = 0; a < na; ++a) {
    Rational t = 0;
    for (std::size_t c = 0; c < nc; ++c) t += x[a * nc + c];
    agent_bounds[a] = {t, t};
  }
  std::vector<std::pair<Rational, Rational>> category_bounds(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    Rational t = 0;
    for (std::size_t a = 0; a < na; ++a) t += x[a * nc + c];
    const Integer lo = t.get_num() / t.get_den();  // t >= 0, so this floors
    category_bounds[c] = {Rational(lo), t.get_den() == 1 ? Rational(lo) : Rational(lo + 1)};
  }
  return split_along(x, dir, na, nc, agent_bounds, category_bounds);
}

}  // namespace detail

/// Writes a valid fractional allocation as a convex combination of valid
/// integral allocations. Components come out sorted by allocation.
inline ConvexCombination decompose(const Instance& instance, const FractionalAllocation& x,
                                   std::int64_t v_star) {
  if (!validate(instance, x, v_star).valid())
    fail(ErrorKind::NotValid, "allocation is not valid");
  const std::size_t na = instance.num_agents();
  const std::size_t nc = instance.num_categories();

  std::map<detail::Cells, Rational> work;
  std::map<IntegralAllocation, Rational> done;
  work[x.entries().cells()] = 1;
  while (!work.empty()) {
    auto node = work.extract(work.begin());
    const auto& cells = node.key();
    const Rational& weight = node.mapped();
    auto split = detail::split_partial_agents(cells, na, nc);
    if (!split) split = detail::split_integral_agents(cells, na, nc);
    if (!split) {
      Grid<Rational> g(na, nc);
      for (std::size_t a = 0; a < na; ++a)
        for (std::size_t c = 0; c < nc; ++c) g(a, c) = cells[a * nc + c];
      done[FractionalAllocation(std::move(g)).to_integral()] += weight;
      continue;
    }
    work[split->plus] += weight * split->w_plus;
    work[split->minus] += weight * split->w_minus;
  }

  ConvexCombination out;
  for (auto& [alloc, w] : done) {
    if (!validate(instance, alloc, v_star).valid())
      fail(ErrorKind::Internal, "decomposition produced an invalid component");
    out.push_back({w, alloc});
  }
  return out;
}

}  // namespace rationd
