#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "rationd/budget.hpp"
#include "rationd/perturbation.hpp"

namespace rationd {

/// Category indices; category c appears exactly quota(c) times.
using ChoiceOrder = std::vector<std::size_t>;

/// Per category, its eligible agents in pick order. Must list tiers best
/// first; only the order inside a tier is free.
using TieBreak = std::vector<std::vector<std::size_t>>;

inline ChoiceOrder choice_order(const Instance& instance,
                                const std::vector<std::string>& names) {
  ChoiceOrder out;
  for (const auto& n : names) out.push_back(instance.category_index(n));
  return out;
}

/// Tiers in order, ties broken lexicographically by agent identifier.
inline TieBreak lexicographic_tie_break(const Instance& instance) {
  TieBreak tb(instance.num_categories());
  for (std::size_t c = 0; c < instance.num_categories(); ++c) {
    tb[c] = instance.eligible_agents(c);
    std::stable_sort(tb[c].begin(), tb[c].end(), [&](std::size_t x, std::size_t y) {
      const int rx = instance.rank(c, x), ry = instance.rank(c, y);
      if (rx != ry) return rx < ry;
      return instance.agent(x) < instance.agent(y);
    });
  }
  return tb;
}

namespace detail {

inline void check_choice_order(const Instance& instance, const ChoiceOrder& order) {
  std::vector<std::int64_t> seen(instance.num_categories(), 0);
  for (std::size_t c : order) {
    if (c >= instance.num_categories())
      fail(ErrorKind::MalformedChoiceOrder, "choice order names an unknown category");
    ++seen[c];
  }
  for (std::size_t c = 0; c < instance.num_categories(); ++c)
    if (seen[c] != instance.quota(c))
      fail(ErrorKind::MalformedChoiceOrder,
           "category \"" + instance.category(c).name + "\" appears " +
               std::to_string(seen[c]) + " times, quota is " +
               std::to_string(instance.quota(c)));
}

inline void check_tie_break(const Instance& instance, const TieBreak& tb) {
  if (tb.size() != instance.num_categories())
    fail(ErrorKind::MalformedChoiceOrder, "tie-break table has wrong category count");
  for (std::size_t c = 0; c < tb.size(); ++c) {
    auto sorted = tb[c];
    std::sort(sorted.begin(), sorted.end());
    auto expected = instance.eligible_agents(c);
    std::sort(expected.begin(), expected.end());
    if (sorted != expected)
      fail(ErrorKind::MalformedChoiceOrder,
           "tie-break for \"" + instance.category(c).name + "\" is not its eligible set");
    for (std::size_t i = 1; i < tb[c].size(); ++i)
      if (instance.rank(c, tb[c][i - 1]) > instance.rank(c, tb[c][i]))
        fail(ErrorKind::MalformedChoiceOrder,
             "tie-break for \"" + instance.category(c).name + "\" reorders tiers");
  }
}

}  // namespace detail

inline IntegralAllocation serial_dictatorship(const Instance& instance,
                                              const ChoiceOrder& order,
                                              const TieBreak& tie_break) {
  detail::check_choice_order(instance, order);
  detail::check_tie_break(instance, tie_break);
  IntegralAllocation x(instance.num_agents());
  for (std::size_t c : order) {
    for (std::size_t a : tie_break[c]) {
      if (!x.assigned(a)) {
        x.category_of[a] = static_cast<int>(c);
        break;
      }
    }
  }
  return x;
}

inline IntegralAllocation serial_dictatorship(const Instance& instance,
                                              const ChoiceOrder& order) {
  return serial_dictatorship(instance, order, lexicographic_tie_break(instance));
}

/// Every outcome of serial dictatorship over all choice orders and all
/// tie-breaks, deduplicated and sorted.
inline std::vector<IntegralAllocation> serial_dictatorship_outcomes(
    const Instance& instance, const Budget& budget = enumeration_budget()) {
  budget.check(instance, "serial dictatorship enumeration");
  const std::size_t nc = instance.num_categories();
  std::set<IntegralAllocation> outcomes;
  std::set<std::vector<int>> visited;
  StateCounter counter(budget, "serial dictatorship enumeration");
  std::vector<std::int64_t> used(nc, 0);
  IntegralAllocation x(instance.num_agents());

  auto dfs = [&](auto&& self) -> void {
    if (!visited.insert(x.category_of).second) return;
    counter.tick();
    bool moved = false;
    for (std::size_t c = 0; c < nc; ++c) {
      if (used[c] >= instance.quota(c)) continue;
      int top = 0;
      for (std::size_t a : instance.eligible_agents(c)) {
        if (x.assigned(a)) continue;
        const int r = instance.rank(c, a);
        if (top != 0 && r != top) break;
        top = r;
        moved = true;
        x.category_of[a] = static_cast<int>(c);
        ++used[c];
        self(self);
        --used[c];
        x.category_of[a] = kUnassigned;
      }
    }
    if (!moved) outcomes.insert(x);
  };
  dfs(dfs);
  return {outcomes.begin(), outcomes.end()};
}

struct ChoiceRealization {
  ChoiceOrder order;
  TieBreak tie_break;
  std::size_t picks = 0;  // the first `picks` entries of order allocate
};

namespace detail {

inline void require_valid_cs(const Instance& instance, const IntegralAllocation& x) {
  if (x.num_agents() != instance.num_agents())
    fail(ErrorKind::DimensionMismatch, "allocation shape does not match instance");
  const auto report = validate(instance, x, max_size(instance));
  if (!report.valid() || report.cs != Verdict::Pass)
    fail(ErrorKind::NotValidOrNotCS, "allocation is not valid and category-stable");
}

}  // namespace detail

/// A choice order and tie-break whose serial dictatorship reproduces x.
inline ChoiceRealization realize_as_choice_order(const Instance& instance,
                                                 const IntegralAllocation& x) {
  detail::require_valid_cs(instance, x);
  const std::size_t nc = instance.num_categories();
  const std::size_t na = instance.num_agents();
  std::vector<bool> taken(na, false);
  std::vector<std::vector<std::size_t>> picked(nc);
  ChoiceRealization out;
  const std::size_t total = x.size();
  // A pick is safe when no untaken agent tied with it in c is held elsewhere.
  // Taking unsafe picks first lets the perturbation pull that agent into c.
  while (out.picks < total) {
    std::optional<std::pair<std::size_t, std::size_t>> fallback, safe;
    for (std::size_t c = 0; c < nc && !safe; ++c) {
      int top = 0;
      std::optional<std::size_t> choice;
      bool clean = true;
      for (std::size_t a : instance.eligible_agents(c)) {
        if (taken[a]) continue;
        const int r = instance.rank(c, a);
        if (top != 0 && r != top) break;
        top = r;
        const int held = x.category_of[a];
        if (held == static_cast<int>(c)) {
          if (!choice || instance.agent(a) < instance.agent(*choice)) choice = a;
        } else if (held >= 0) {
          clean = false;
        }
      }
      if (!choice) continue;
      if (clean) safe = {c, *choice};
      else if (!fallback) fallback = {c, *choice};
    }
    const auto pick = safe ? safe : fallback;
    if (!pick)
      fail(ErrorKind::NotValidOrNotCS, "allocation admits no serial dictatorship order");
    taken[pick->second] = true;
    picked[pick->first].push_back(pick->second);
    out.order.push_back(pick->first);
    ++out.picks;
  }
  for (std::size_t c = 0; c < nc; ++c)
    for (auto k = static_cast<std::int64_t>(picked[c].size()); k < instance.quota(c); ++k)
      out.order.push_back(c);

  const auto lex = lexicographic_tie_break(instance);
  out.tie_break.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    for (int tier = 1; tier <= instance.tier_count(c); ++tier) {
      for (std::size_t a : picked[c])
        if (instance.rank(c, a) == tier) out.tie_break[c].push_back(a);
      for (std::size_t a : lex[c])
        if (instance.rank(c, a) == tier &&
            std::find(picked[c].begin(), picked[c].end(), a) == picked[c].end())
          out.tie_break[c].push_back(a);
    }
  }
  return out;
}

namespace detail {

struct StagedPick {
  std::size_t category = 0;
  std::size_t agent = 0;
  bool joins_previous = false;  // shares the previous pick's stage
};

// Stage weights for a pick sequence: stage i gets base
// rho_max / (|A|+1)^(i-1), so each stage dominates all later ones.
inline Perturbation staged_perturbation(const Instance& instance,
                                        const std::vector<StagedPick>& picks) {
  const std::size_t na = instance.num_agents();
  const std::size_t nc = instance.num_categories();
  Perturbation delta(na, nc);
  const Integer A(static_cast<unsigned long>(na));
  const Integer C(static_cast<unsigned long>(nc));
  const Rational rho_max(Integer(1), 2 * C * A);
  const Rational eps = rho_max / Rational(pow(A + 1, na + 1));
  int max_tiers = 0;
  for (std::size_t c = 0; c < nc; ++c) max_tiers = std::max(max_tiers, instance.tier_count(c));
  const int R = max_tiers + 1;

  // rho per (category, tier); tiers never reached stay near zero.
  std::vector<std::vector<Rational>> rho(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    rho[c].resize(static_cast<std::size_t>(instance.tier_count(c)) + 1);
    for (int j = 1; j <= instance.tier_count(c); ++j) rho[c][j] = Rational(R - j) * eps;
  }
  std::vector<int> last_tier(nc, 0);
  Rational base = rho_max * Rational(A + 1);
  for (const auto& [c, agent, joins] : picks) {
    if (!joins) base /= Rational(A + 1);
    const int r = instance.rank(c, agent);
    for (int j = last_tier[c] + 1; j <= r; ++j) rho[c][j] = base + Rational(r - j) * eps;
    last_tier[c] = r;
  }

  // Positivity: the top pair of the first stage has rho = rho_max, so every
  // entry is lifted by tau; the sum still stays within 1/2.
  const Rational tau = rho_max / (2 * Rational(C * A) * (1 + rho_max));
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t a : instance.eligible_agents(c))
      delta(a, c) = (rho_max - rho[c][instance.rank(c, a)]) / (1 + rho_max) + tau;
  return delta;
}

inline bool maximizes(const Instance& instance, const Perturbation& delta,
                      const IntegralAllocation& x) {
  return max_weight_b_matching(perturbed_problem(instance, delta)).objective ==
         perturbed_value(delta, x);
}

// Per-(category, tier) counts of x minus those of y, as suffix sums over
// tiers. If every suffix sum is >= 0 and one is > 0, then x pays strictly
// more penalty than y under every tier-consistent, tier-increasing delta.
inline bool dominated_by(const Instance& instance, const IntegralAllocation& x,
                         const Perturbation& probe) {
  const auto p = perturbed_problem(instance, probe);
  const auto y = allocation_from_flow(p, max_weight_b_matching(p), instance.num_agents());
  bool strict = false;
  for (std::size_t c = 0; c < instance.num_categories(); ++c) {
    std::vector<std::int64_t> diff(static_cast<std::size_t>(instance.tier_count(c)) + 2, 0);
    for (std::size_t a = 0; a < instance.num_agents(); ++a) {
      if (x.category_of[a] == static_cast<int>(c)) ++diff[instance.rank(c, a)];
      if (y.category_of[a] == static_cast<int>(c)) --diff[instance.rank(c, a)];
    }
    std::int64_t suffix = 0;
    for (int j = instance.tier_count(c); j >= 1; --j) {
      suffix += diff[j];
      if (suffix < 0) return false;
      if (suffix > 0) strict = true;
    }
  }
  return strict;
}

}  // namespace detail

/// A valid perturbation under which x maximizes V_delta. Built stage by stage
/// from a choice order realizing x. With ties the first order may not work,
/// so alternative orders are tried (bounded), where a pick made while tied
/// agents are held elsewhere may share its stage with the next pick. Each
/// candidate is checked by an exact re-solve. Throws NotRealizable when the optimum of some tried perturbation
/// beats x under every valid perturbation, and BudgetExceeded when the
/// search gives up without such a certificate.
inline Perturbation realize_perturbation(const Instance& instance,
                                         const IntegralAllocation& x,
                                         std::size_t max_orders = 4096) {
  detail::require_valid_cs(instance, x);
  const std::size_t na = instance.num_agents();
  const std::size_t nc = instance.num_categories();
  if (instance.num_eligible_pairs() == 0) return Perturbation(na, nc);
  const std::size_t total = x.size();

  std::vector<bool> taken(na, false);
  std::vector<detail::StagedPick> picks;
  std::vector<bool> unsafe_pick;
  std::optional<Perturbation> found;
  bool certified = false;
  std::size_t tried = 0;

  // Candidates: each category whose top untaken tier holds one of its own
  // agents in x. Safe picks first (see realize_as_choice_order).
  auto candidates = [&] {
    std::vector<std::pair<std::size_t, std::size_t>> safe, unsafe;
    for (std::size_t c = 0; c < nc; ++c) {
      int top = 0;
      std::optional<std::size_t> choice;
      bool clean = true;
      for (std::size_t a : instance.eligible_agents(c)) {
        if (taken[a]) continue;
        const int r = instance.rank(c, a);
        if (top != 0 && r != top) break;
        top = r;
        const int held = x.category_of[a];
        if (held == static_cast<int>(c)) {
          if (!choice || instance.agent(a) < instance.agent(*choice)) choice = a;
        } else if (held >= 0) {
          clean = false;
        }
      }
      if (choice) (clean ? safe : unsafe).emplace_back(c, *choice);
    }
    std::vector<std::pair<detail::StagedPick, bool>> out;
    for (auto [c, a] : safe) out.push_back({{c, a, false}, false});
    for (auto [c, a] : unsafe) out.push_back({{c, a, false}, true});
    return out;
  };

  auto search = [&](auto&& self) -> void {
    if (found || certified || tried >= max_orders) return;
    if (picks.size() == total) {
      ++tried;
      auto delta = detail::staged_perturbation(instance, picks);
      if (!is_valid_perturbation(instance, delta).valid)
        fail(ErrorKind::Internal, "constructed perturbation is not valid");
      if (detail::maximizes(instance, delta, x)) found = std::move(delta);
      else if (detail::dominated_by(instance, x, delta)) certified = true;
      return;
    }
    const bool may_join = !unsafe_pick.empty() && unsafe_pick.back();
    for (auto [pick, unsafe] : candidates()) {
      for (int join = 0; join <= (may_join ? 1 : 0); ++join) {
        pick.joins_previous = join == 1;
        taken[pick.agent] = true;
        picks.push_back(pick);
        unsafe_pick.push_back(unsafe);
        self(self);
        unsafe_pick.pop_back();
        picks.pop_back();
        taken[pick.agent] = false;
        if (found || certified) return;
      }
    }
  };
  search(search);

  if (found) return *found;
  if (certified)
    fail(ErrorKind::NotRealizable,
         "another valid allocation beats x under every valid perturbation");
  fail(ErrorKind::BudgetExceeded, "no realizing perturbation found within the order budget");
}

}  // namespace rationd
