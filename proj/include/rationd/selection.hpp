#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rationd/budget.hpp"
#include "rationd/oracle.hpp"
#include "rationd/perturbation.hpp"

namespace rationd {

struct AgentQueryResult {
  bool verdict = false;
  std::optional<IntegralAllocation> witness;
};

/// u_a(c) in (0,1], set on eligible pairs.
class UtilityProfile {
 public:
  UtilityProfile() = default;
  UtilityProfile(std::size_t num_agents, std::size_t num_categories)
      : entries_(num_agents, num_categories) {}

  std::size_t num_agents() const noexcept { return entries_.rows(); }
  std::size_t num_categories() const noexcept { return entries_.cols(); }
  std::optional<Rational>& operator()(std::size_t a, std::size_t c) { return entries_(a, c); }
  const std::optional<Rational>& operator()(std::size_t a, std::size_t c) const {
    return entries_(a, c);
  }

  /// Realized utility of agent a.
  Rational realized(const IntegralAllocation& x, std::size_t a) const {
    if (!x.assigned(a)) return 0;
    return *entries_(a, static_cast<std::size_t>(x.category_of[a]));
  }

  void check(const Instance& instance) const {
    if (num_agents() != instance.num_agents() || num_categories() != instance.num_categories())
      fail(ErrorKind::DimensionMismatch, "utility shape does not match instance");
    for (std::size_t a = 0; a < num_agents(); ++a)
      for (std::size_t c = 0; c < num_categories(); ++c) {
        if (!instance.eligible(c, a)) continue;
        const auto& u = entries_(a, c);
        if (!u)
          fail(ErrorKind::MissingUtility, "no utility for (" + instance.agent(a) + ", " +
                                              instance.category(c).name + ")");
        if (*u <= 0 || *u > 1)
          fail(ErrorKind::InvalidArgument, "utility outside (0,1] for (" + instance.agent(a) +
                                               ", " + instance.category(c).name + ")");
      }
  }

 private:
  Grid<std::optional<Rational>> entries_;
};

inline AgentQueryResult is_unanimous(const Instance& instance, std::size_t agent) {
  if (agent >= instance.num_agents()) fail(ErrorKind::UnknownAgent, "agent index out of range");
  const std::int64_t v_star = max_size(instance);
  const std::vector<std::size_t> removed{agent};
  const Instance without = restrict(instance, std::span<const std::size_t>(removed));
  if (v_star > max_size(without)) return {true, std::nullopt};
  auto witness = solve_valid(without);
  if (!validate(instance, witness, v_star).valid())
    fail(ErrorKind::Internal, "restricted solve is not valid in the original instance");
  return {false, std::move(witness)};
}

namespace detail {

// Depth-first search over serial-dictatorship pick sequences, memoized on
// (allocated set, remaining quotas). Calls visit(x) on every terminal state
// of size V*; visit returns true to stop. prune(x, remaining) may cut a
// branch early.
template <typename Visit, typename Prune>
void search_maximal_outcomes(const Instance& instance, const Budget& budget,
                             std::string_view what, Visit&& visit, Prune&& prune) {
  budget.check(instance, what);
  const std::size_t na = instance.num_agents();
  const std::size_t nc = instance.num_categories();
  const std::int64_t v_star = max_size(instance);
  std::vector<std::int64_t> remaining(nc);
  for (std::size_t c = 0; c < nc; ++c) remaining[c] = instance.quota(c);
  IntegralAllocation x(na);
  std::set<std::pair<std::uint64_t, std::vector<std::int64_t>>> seen;
  StateCounter counter(budget, what);
  std::int64_t count = 0;
  bool stop = false;

  auto bound = [&]() {
    // Units that could still be handed out, ignoring priorities.
    std::int64_t quota = 0;
    std::int64_t agents = 0;
    for (std::size_t c = 0; c < nc; ++c) {
      if (remaining[c] == 0) continue;
      for (std::size_t a : instance.eligible_agents(c))
        if (!x.assigned(a)) {
          quota += remaining[c];
          break;
        }
    }
    for (std::size_t a = 0; a < na; ++a) {
      if (x.assigned(a)) continue;
      for (std::size_t c = 0; c < nc; ++c)
        if (remaining[c] > 0 && instance.eligible(c, a)) {
          ++agents;
          break;
        }
    }
    return count + std::min(quota, agents);
  };

  auto dfs = [&](auto&& self) -> void {
    if (stop) return;
    if (!seen.insert({x.allocated_mask(), remaining}).second) return;
    counter.tick();
    if (bound() < v_star || prune(static_cast<const IntegralAllocation&>(x), remaining)) return;
    bool moved = false;
    for (std::size_t c = 0; c < nc && !stop; ++c) {
      if (remaining[c] == 0) continue;
      int top = 0;
      for (std::size_t a : instance.eligible_agents(c)) {
        if (x.assigned(a)) continue;
        const int r = instance.rank(c, a);
        if (top != 0 && r != top) break;
        top = r;
        moved = true;
        x.category_of[a] = static_cast<int>(c);
        --remaining[c];
        ++count;
        self(self);
        --count;
        ++remaining[c];
        x.category_of[a] = kUnassigned;
        if (stop) return;
      }
    }
    if (!moved && count == v_star && visit(static_cast<const IntegralAllocation&>(x)))
      stop = true;
  };
  dfs(dfs);
}

}  // namespace detail

/// Whether some valid allocation serves the agent, by exhaustive search.
inline AgentQueryResult is_serviceable(const Instance& instance, std::size_t agent,
                                       const Budget& budget = search_budget()) {
  if (agent >= instance.num_agents()) fail(ErrorKind::UnknownAgent, "agent index out of range");
  bool anywhere = false;
  for (std::size_t c = 0; c < instance.num_categories(); ++c)
    anywhere = anywhere || (instance.eligible(c, agent) && instance.quota(c) > 0);
  if (!anywhere) return {false, std::nullopt};

  AgentQueryResult result;
  detail::search_maximal_outcomes(
      instance, budget, "serviceability search",
      [&](const IntegralAllocation& x) {
        if (!x.assigned(agent)) return false;
        result = {true, x};
        return true;
      },
      [&](const IntegralAllocation& x, const std::vector<std::int64_t>& remaining) {
        if (x.assigned(agent)) return false;
        for (std::size_t c = 0; c < instance.num_categories(); ++c)
          if (remaining[c] > 0 && instance.eligible(c, agent)) return false;
        return true;
      });
  return result;
}

/// Two-stage selection: fix the served agents with a valid solve, then
/// assign them to maximize utility on the restricted instance.
inline IntegralAllocation allocate_with_preferences(const Instance& instance,
                                                    const UtilityProfile& utilities) {
  utilities.check(instance);
  const std::size_t na = instance.num_agents();
  const std::size_t nc = instance.num_categories();
  if (instance.num_eligible_pairs() == 0) return IntegralAllocation(na);

  const auto first = solve_valid(instance, PerturbationScheme::RankSum);
  std::vector<std::size_t> unserved;
  for (std::size_t a = 0; a < na; ++a)
    if (!first.assigned(a)) unserved.push_back(a);
  const Instance restricted = restrict(instance, std::span<const std::size_t>(unserved));
  if (restricted.num_eligible_pairs() == 0) return first;

  Rational top = 0;
  Integer den = 1;
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t c = 0; c < nc; ++c)
      if (instance.eligible(c, a)) {
        top = std::max(top, *utilities(a, c));
        den = lcm(den, utilities(a, c)->get_den());
      }
  const Integer A(static_cast<unsigned long>(na));
  const Integer C(static_cast<unsigned long>(nc));
  const Rational base(Integer(1), 2 * A * C);
  // Rank term: breaks utility ties toward priority, and is too small to
  // overturn any utility gap (gaps are multiples of 1/den).
  const Rational eta(Integer(1), 4 * A * A * A * C * den);
  Perturbation delta(na, nc);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t a : restricted.eligible_agents(c))
      delta(a, c) = (top - *utilities(a, c)) * base + Rational(restricted.rank(c, a)) * eta;

  const auto p = perturbed_problem(restricted, delta);
  auto y = allocation_from_flow(p, max_weight_b_matching(p), na);
  if (y.size() != first.size())
    fail(ErrorKind::Internal, "second stage changed the number of served agents");
  return y;
}

enum class Welfare { Sum, Nash, Min };

/// Sum, product or minimum of realized utilities over served agents. Every
/// valid allocation serves V* agents, so the product and minimum over
/// served agents compare like-for-like.
inline Rational welfare(const UtilityProfile& u, const IntegralAllocation& x, Welfare kind) {
  std::optional<Rational> acc;
  for (std::size_t a = 0; a < x.num_agents(); ++a) {
    if (!x.assigned(a)) continue;
    const Rational v = u.realized(x, a);
    if (!acc) acc = v;
    else if (kind == Welfare::Sum) *acc += v;
    else if (kind == Welfare::Nash) *acc *= v;
    else *acc = std::min(*acc, v);
  }
  if (!acc) return kind == Welfare::Sum ? Rational(0) : Rational(kind == Welfare::Nash ? 1 : 0);
  return *acc;
}

/// Exact argmax of the welfare over all valid allocations; ties keep the
/// first in enumeration order.
inline IntegralAllocation brute_force_welfare(const Instance& instance,
                                              const UtilityProfile& utilities, Welfare kind,
                                              const Budget& budget = enumeration_budget()) {
  utilities.check(instance);
  const auto all = enumerate_all(instance, budget);
  std::optional<IntegralAllocation> best;
  Rational best_value;
  for (const auto& x : all.valid) {
    const Rational v = welfare(utilities, x, kind);
    if (!best || v > best_value) {
      best = x;
      best_value = v;
    }
  }
  if (!best) fail(ErrorKind::Internal, "instance has no valid allocation");
  return *best;
}

enum class InnerMode { Sum, MinMax };

inline IntegralAllocation optimize_inner(const Instance& instance, InnerMode mode) {
  return solve_valid(instance, mode == InnerMode::Sum ? PerturbationScheme::RankSum
                                                      : PerturbationScheme::RankMinMax);
}

enum class OuterMode { MaxMin, Sum };

struct OuterResult {
  IntegralAllocation allocation;
  Thresholds thresholds;
};

inline std::int64_t outer_score(const Thresholds& t, OuterMode mode) {
  if (t.outer.empty()) return 0;
  if (mode == OuterMode::MaxMin) return *std::min_element(t.outer.begin(), t.outer.end());
  std::int64_t s = 0;
  for (int v : t.outer) s += v;
  return s;
}

/// Exhaustive search for the valid allocation with the best outer
/// thresholds; ties keep the first allocation found.
inline OuterResult optimize_outer(const Instance& instance, OuterMode mode,
                                  const Budget& budget = search_budget()) {
  std::optional<OuterResult> best;
  std::int64_t best_score = 0;
  detail::search_maximal_outcomes(
      instance, budget, "outer threshold search",
      [&](const IntegralAllocation& x) {
        auto t = thresholds(instance, x);
        const auto s = outer_score(t, mode);
        if (!best || s > best_score) {
          best = OuterResult{x, std::move(t)};
          best_score = s;
        }
        return false;
      },
      [](const IntegralAllocation&, const std::vector<std::int64_t>&) { return false; });
  if (!best) {
    IntegralAllocation empty(instance.num_agents());
    return {empty, thresholds(instance, empty)};
  }
  return *best;
}

}  // namespace rationd
