#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rationd/budget.hpp"
#include "rationd/validity.hpp"

namespace rationd {

struct EnumerationResult {
  std::vector<IntegralAllocation> feasible;  // QR, ER and PR
  std::vector<IntegralAllocation> valid;     // additionally PE
  std::vector<IntegralAllocation> valid_cs;  // additionally CS
  std::int64_t v_star = 0;
};

/// Calls f on every assignment map respecting ER and QR, in canonical order:
/// agents in input order, each trying categories in input order and then
/// staying unassigned.
template <typename F>
void for_each_assignment(const Instance& instance, const Budget& budget, F&& f) {
  budget.check(instance, "enumeration");
  const std::size_t na = instance.num_agents();
  const std::size_t nc = instance.num_categories();
  std::vector<std::int64_t> used(nc, 0);
  IntegralAllocation x(na);
  StateCounter counter(budget, "enumeration");
  auto rec = [&](auto&& self, std::size_t a) -> void {
    counter.tick();
    if (a == na) {
      f(static_cast<const IntegralAllocation&>(x));
      return;
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (!instance.eligible(c, a) || used[c] >= instance.quota(c)) continue;
      ++used[c];
      x.category_of[a] = static_cast<int>(c);
      self(self, a + 1);
      x.category_of[a] = kUnassigned;
      --used[c];
    }
    self(self, a + 1);
  };
  rec(rec, 0);
}

inline EnumerationResult enumerate_all(const Instance& instance,
                                       const Budget& budget = enumeration_budget()) {
  EnumerationResult out;
  std::int64_t best = 0;
  for_each_assignment(instance, budget, [&](const IntegralAllocation& x) {
    best = std::max(best, static_cast<std::int64_t>(x.size()));
    if (respects_quota_eligibility_priority(instance, x)) out.feasible.push_back(x);
  });
  out.v_star = best;
  for (const auto& x : out.feasible) {
    if (static_cast<std::int64_t>(x.size()) != best) continue;
    const auto report = validate(instance, x, best);
    if (!report.valid()) continue;
    out.valid.push_back(x);
    if (report.cs == Verdict::Pass) out.valid_cs.push_back(x);
  }
  return out;
}

}  // namespace rationd
