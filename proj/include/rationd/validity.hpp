#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "rationd/instance.hpp"

namespace rationd {

enum class Verdict { Pass, Fail, NotApplicable };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::NotApplicable: return "NOT-APPLICABLE";
  }
  return "?";
}

struct AgentCategory {
  std::size_t agent = 0;
  std::size_t category = 0;
  friend auto operator<=>(const AgentCategory&, const AgentCategory&) = default;
};

/// `higher` is not fully allocated although `category` gives to `lower`,
/// whom it ranks strictly below `higher`.
struct PriorityWitness {
  std::size_t higher = 0;
  std::size_t category = 0;
  std::size_t lower = 0;
  friend bool operator==(const PriorityWitness&, const PriorityWitness&) = default;
};

struct ValidityReport {
  Verdict qr = Verdict::Pass;
  Verdict er = Verdict::Pass;
  Verdict pr = Verdict::Pass;
  Verdict pe = Verdict::Pass;
  Verdict cs = Verdict::Pass;

  std::optional<std::size_t> qr_category;
  std::optional<AgentCategory> er_pair;
  std::optional<PriorityWitness> pr_witness;
  Rational size = 0;           // V(x), the PE witness
  std::int64_t v_star = 0;
  // Closed trade: the category of entry i takes over the agent of entry i+1.
  std::vector<AgentCategory> cs_cycle;

  bool valid() const {
    return qr == Verdict::Pass && er == Verdict::Pass && pr == Verdict::Pass &&
           pe == Verdict::Pass;
  }
  bool fully_valid() const { return valid() && cs != Verdict::Fail; }

  friend bool operator==(const ValidityReport&, const ValidityReport&) = default;
};

namespace detail {

// Trade graph over allocated pairs: (a,c) -> (a',c') when a' is weakly
// preferred by c to a. Tie edges cost 0, strict edges cost -1, so a trade
// violating category stability is a negative cycle; with these costs that is
// exactly a strict edge u->v closed by a path v ~> u.
inline std::vector<AgentCategory> find_trade_cycle(
    const Instance& instance, const std::vector<AgentCategory>& held) {
  const std::size_t n = held.size();
  auto edge = [&](std::size_t u, std::size_t v) -> int {
    const auto& [a, c] = held[u];
    const auto b = held[v].agent;
    const int rb = instance.rank(c, b);
    if (rb == 0) return 0;
    const int ra = instance.rank(c, a);
    if (rb < ra) return 2;        // strict
    if (rb == ra) return 1;       // tie
    return 0;
  };
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (edge(u, v) != 2) continue;
      // Shortest path v ~> u by BFS, lowest index first.
      std::vector<std::ptrdiff_t> parent(n, -1);
      std::vector<bool> seen(n, false);
      std::deque<std::size_t> queue{v};
      seen[v] = true;
      while (!queue.empty() && !seen[u]) {
        const auto w = queue.front();
        queue.pop_front();
        for (std::size_t z = 0; z < n; ++z) {
          if (seen[z] || edge(w, z) == 0) continue;
          seen[z] = true;
          parent[z] = static_cast<std::ptrdiff_t>(w);
          queue.push_back(z);
        }
      }
      if (!seen[u]) continue;
      std::vector<std::size_t> path;
      for (std::size_t w = u; w != v; w = static_cast<std::size_t>(parent[w]))
        path.push_back(w);
      path.push_back(v);
      // path is u, ..., v reversed; the cycle reads u -> v -> ... -> u.
      std::vector<AgentCategory> cycle{held[u]};
      for (auto it = path.rbegin(); it != path.rend(); ++it)
        if (*it != u) cycle.push_back(held[*it]);
      return cycle;
    }
  }
  return {};
}

}  // namespace detail

/// Checks QR, ER, PR, PE and (for integral input) CS. `v_star` must be the
/// maximum achievable size of the instance.
inline ValidityReport validate(const Instance& instance,
                               const FractionalAllocation& x,
                               std::int64_t v_star) {
  if (x.num_agents() != instance.num_agents() ||
      x.num_categories() != instance.num_categories())
    fail(ErrorKind::DimensionMismatch, "allocation shape does not match instance");
  const std::size_t na = instance.num_agents();
  const std::size_t nc = instance.num_categories();

  ValidityReport report;
  report.v_star = v_star;
  report.size = x.size();

  for (std::size_t c = 0; c < nc && report.qr == Verdict::Pass; ++c) {
    if (x.category_total(c) > instance.quota(c)) {
      report.qr = Verdict::Fail;
      report.qr_category = c;
    }
  }
  for (std::size_t a = 0; a < na && report.er == Verdict::Pass; ++a) {
    for (std::size_t c = 0; c < nc; ++c) {
      if (x(a, c) > 0 && !instance.eligible(c, a)) {
        report.er = Verdict::Fail;
        report.er_pair = AgentCategory{a, c};
        break;
      }
    }
  }
  std::vector<bool> full(na);
  for (std::size_t a = 0; a < na; ++a) full[a] = x.agent_total(a) == 1;
  for (std::size_t c = 0; c < nc && !report.pr_witness; ++c) {
    for (std::size_t lower = 0; lower < na && !report.pr_witness; ++lower) {
      if (!(x(lower, c) > 0)) continue;
      const int rl = instance.rank(c, lower);
      if (rl == 0) continue;
      for (std::size_t higher = 0; higher < na; ++higher) {
        const int rh = instance.rank(c, higher);
        if (rh != 0 && rh < rl && !full[higher]) {
          report.pr_witness = PriorityWitness{higher, c, lower};
          break;
        }
      }
    }
  }
  if (report.pr_witness) report.pr = Verdict::Fail;

  const bool feasible = report.qr == Verdict::Pass &&
                        report.er == Verdict::Pass && report.pr == Verdict::Pass;
  report.pe = feasible && report.size == v_star ? Verdict::Pass : Verdict::Fail;

  if (!x.is_integral()) {
    report.cs = Verdict::NotApplicable;
  } else {
    std::vector<AgentCategory> held;
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t c = 0; c < nc; ++c)
        if (x(a, c) == 1) held.push_back({a, c});
    report.cs_cycle = detail::find_trade_cycle(instance, held);
    report.cs = report.cs_cycle.empty() ? Verdict::Pass : Verdict::Fail;
  }
  return report;
}

inline ValidityReport validate(const Instance& instance,
                               const IntegralAllocation& x,
                               std::int64_t v_star) {
  if (x.num_agents() != instance.num_agents())
    fail(ErrorKind::DimensionMismatch, "allocation shape does not match instance");
  return validate(instance,
                  FractionalAllocation::from_integral(x, instance.num_categories()),
                  v_star);
}

/// QR, ER and PR only, on integer data. This is the hot path of exhaustive
/// enumeration.
inline bool respects_quota_eligibility_priority(const Instance& instance,
                                                const IntegralAllocation& x) {
  const std::size_t nc = instance.num_categories();
  std::vector<std::int64_t> used(nc, 0);
  for (std::size_t a = 0; a < x.num_agents(); ++a) {
    const int c = x.category_of[a];
    if (c == kUnassigned) continue;
    if (!instance.eligible(static_cast<std::size_t>(c), a)) return false;
    if (++used[static_cast<std::size_t>(c)] > instance.quota(static_cast<std::size_t>(c)))
      return false;
  }
  for (std::size_t c = 0; c < nc; ++c) {
    // Worst rank served must not be strictly below the best unserved rank.
    int worst_served = 0;
    int best_unserved = instance.tier_count(c) + 1;
    for (std::size_t a : instance.eligible_agents(c)) {
      const int r = instance.rank(c, a);
      if (x.category_of[a] == static_cast<int>(c))
        worst_served = std::max(worst_served, r);
      else if (x.category_of[a] == kUnassigned)
        best_unserved = std::min(best_unserved, r);
    }
    if (worst_served > best_unserved) return false;
  }
  return true;
}

struct Thresholds {
  std::vector<int> inner;  // 0 for a category that serves nobody
  std::vector<int> outer;

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

inline Thresholds thresholds(const Instance& instance, const IntegralAllocation& x) {
  if (x.num_agents() != instance.num_agents())
    fail(ErrorKind::DimensionMismatch, "allocation shape does not match instance");
  const std::size_t nc = instance.num_categories();
  Thresholds t{std::vector<int>(nc, 0), std::vector<int>(nc, 0)};
  for (std::size_t a = 0; a < x.num_agents(); ++a) {
    const int c = x.category_of[a];
    if (c == kUnassigned) continue;
    if (c < 0 || static_cast<std::size_t>(c) >= nc)
      fail(ErrorKind::DimensionMismatch, "category index out of range");
    const int r = instance.rank(static_cast<std::size_t>(c), a);
    if (r == 0)
      fail(ErrorKind::IneligibleAssignment,
           "agent \"" + instance.agent(a) + "\" is not eligible in \"" +
               instance.category(static_cast<std::size_t>(c)).name + "\"");
    t.inner[static_cast<std::size_t>(c)] =
        std::max(t.inner[static_cast<std::size_t>(c)], r);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    int outer = instance.tier_count(c) + 1;
    for (std::size_t a : instance.eligible_agents(c))
      if (x.category_of[a] == kUnassigned) outer = std::min(outer, instance.rank(c, a));
    t.outer[c] = outer;
  }
  return t;
}

}  // namespace rationd
