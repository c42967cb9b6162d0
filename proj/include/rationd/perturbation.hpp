#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "rationd/instance.hpp"
#include "rationd/matching.hpp"
#include "rationd/validity.hpp"

namespace rationd {

/// Per-pair penalties delta(a, c), set exactly on eligible pairs.
class Perturbation {
 public:
  Perturbation() = default;
  Perturbation(std::size_t num_agents, std::size_t num_categories)
      : entries_(num_agents, num_categories) {}

  std::size_t num_agents() const noexcept { return entries_.rows(); }
  std::size_t num_categories() const noexcept { return entries_.cols(); }

  std::optional<Rational>& operator()(std::size_t a, std::size_t c) {
    return entries_(a, c);
  }
  const std::optional<Rational>& operator()(std::size_t a, std::size_t c) const {
    return entries_(a, c);
  }

  friend bool operator==(const Perturbation&, const Perturbation&) = default;

 private:
  Grid<std::optional<Rational>> entries_;
};

enum class PerturbationScheme { RankSum, RankMinMax, UniformTiered };

enum class PerturbationProperty { Positivity, SmallEffect, Consistency };

inline std::string_view to_string(PerturbationProperty p) {
  switch (p) {
    case PerturbationProperty::Positivity: return "Positivity";
    case PerturbationProperty::SmallEffect: return "SmallEffect";
    case PerturbationProperty::Consistency: return "Consistency";
  }
  return "?";
}

struct PerturbationCheck {
  bool valid = true;
  std::optional<PerturbationProperty> violated;
  std::optional<AgentCategory> witness;  // absent for SmallEffect

  explicit operator bool() const { return valid; }
};

inline PerturbationCheck is_valid_perturbation(const Instance& instance,
                                               const Perturbation& delta) {
  if (delta.num_agents() != instance.num_agents() ||
      delta.num_categories() != instance.num_categories())
    fail(ErrorKind::DimensionMismatch, "perturbation shape does not match instance");
  const std::size_t na = instance.num_agents();
  const std::size_t nc = instance.num_categories();
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t c = 0; c < nc; ++c)
      if (delta(a, c) && !instance.eligible(c, a))
        fail(ErrorKind::EntryOnIneligiblePair,
             "perturbation set on ineligible pair (" + instance.agent(a) + ", " +
                 instance.category(c).name + ")");

  auto failed = [](PerturbationProperty p, std::optional<AgentCategory> w) {
    return PerturbationCheck{false, p, w};
  };
  Rational total = 0;
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t c = 0; c < nc; ++c) {
      if (!instance.eligible(c, a)) continue;
      if (!delta(a, c) || *delta(a, c) <= 0)
        return failed(PerturbationProperty::Positivity, AgentCategory{a, c});
      total += *delta(a, c);
    }
  }
  if (total > Rational(1, 2)) return failed(PerturbationProperty::SmallEffect, std::nullopt);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& agents = instance.eligible_agents(c);
    // eligible_agents is sorted by tier, so comparing neighbours suffices.
    for (std::size_t i = 1; i < agents.size(); ++i) {
      const auto prev = agents[i - 1];
      const auto cur = agents[i];
      const bool tied = instance.rank(c, prev) == instance.rank(c, cur);
      const auto& dp = *delta(prev, c);
      const auto& dc = *delta(cur, c);
      if (tied ? dp != dc : !(dp < dc))
        return failed(PerturbationProperty::Consistency, AgentCategory{cur, c});
    }
  }
  return {};
}

inline Perturbation make_perturbation(const Instance& instance,
                                      PerturbationScheme scheme) {
  if (instance.num_eligible_pairs() == 0)
    fail(ErrorKind::EmptyInstance, "instance has no eligible pairs");
  const std::size_t na = instance.num_agents();
  const std::size_t nc = instance.num_categories();
  const Integer A(static_cast<unsigned long>(na));
  const Integer C(static_cast<unsigned long>(nc));
  Perturbation delta(na, nc);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t a : instance.eligible_agents(c)) {
      const long r = instance.rank(c, a);
      if (scheme == PerturbationScheme::RankMinMax) {
        const Integer den = 2 * C * A * pow(A + 1, static_cast<unsigned long>(na - r));
        delta(a, c) = Rational(Integer(1), den);
      } else {
        delta(a, c) = Rational(Integer(r), 2 * C * A * A);
      }
      delta(a, c)->canonicalize();
    }
  }
  return delta;
}

/// Unit-weight b-matching of the instance: agents (supply 1) to categories.
inline MatchingProblem matching_problem(const Instance& instance) {
  MatchingProblem p;
  p.supplies.assign(instance.num_agents(), Rational(1));
  for (std::size_t c = 0; c < instance.num_categories(); ++c)
    p.capacities.emplace_back(instance.quota(c));
  for (std::size_t a = 0; a < instance.num_agents(); ++a)
    for (std::size_t c = 0; c < instance.num_categories(); ++c)
      if (instance.eligible(c, a)) p.edges.push_back({a, c, Integer(1)});
  return p;
}

inline std::int64_t max_size(const Instance& instance) {
  return max_size(matching_problem(instance));
}

/// The perturbed program with weights (1 - delta) scaled to integers by the
/// lcm of the denominators.
inline MatchingProblem perturbed_problem(const Instance& instance,
                                         const Perturbation& delta) {
  MatchingProblem p = matching_problem(instance);
  Integer scale = 1;
  for (const auto& e : p.edges) scale = lcm(scale, delta(e.left, e.right)->get_den());
  for (auto& e : p.edges) {
    const Rational w = (1 - *delta(e.left, e.right)) * Rational(scale);
    e.weight = w.get_num();
  }
  p.scale = scale;
  return p;
}

/// V_delta(x) = sum x(a,c) (1 - delta(a,c)).
inline Rational perturbed_value(const Perturbation& delta, const FractionalAllocation& x) {
  Rational v = 0;
  for (std::size_t a = 0; a < x.num_agents(); ++a)
    for (std::size_t c = 0; c < x.num_categories(); ++c)
      if (x(a, c) != 0) v += x(a, c) * (1 - *delta(a, c));
  return v;
}

inline Rational perturbed_value(const Perturbation& delta, const IntegralAllocation& x) {
  Rational v = 0;
  for (std::size_t a = 0; a < x.num_agents(); ++a)
    if (x.assigned(a)) v += 1 - *delta(a, static_cast<std::size_t>(x.category_of[a]));
  return v;
}

inline IntegralAllocation allocation_from_flow(const MatchingProblem& p,
                                               const MatchingSolution& sol,
                                               std::size_t num_agents) {
  IntegralAllocation x(num_agents);
  for (std::size_t e = 0; e < p.edges.size(); ++e)
    if (sol.flow[e] == 1) x.category_of[p.edges[e].left] = static_cast<int>(p.edges[e].right);
  return x;
}

/// Maximizes V_delta over the b-matching polytope; the optimum is valid.
inline IntegralAllocation solve_valid(const Instance& instance, const Perturbation& delta) {
  const auto check = is_valid_perturbation(instance, delta);
  if (!check)
    fail(ErrorKind::InvalidPerturbation,
         std::string("perturbation violates ") + std::string(to_string(*check.violated)));
  if (instance.num_eligible_pairs() == 0) return IntegralAllocation(instance.num_agents());
  const auto p = perturbed_problem(instance, delta);
  return allocation_from_flow(p, max_weight_b_matching(p), instance.num_agents());
}

inline IntegralAllocation solve_valid(const Instance& instance,
                                      PerturbationScheme scheme = PerturbationScheme::UniformTiered) {
  if (instance.num_eligible_pairs() == 0) return IntegralAllocation(instance.num_agents());
  return solve_valid(instance, make_perturbation(instance, scheme));
}

}  // namespace rationd
