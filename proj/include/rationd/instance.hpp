#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rationd/error.hpp"
#include "rationd/grid.hpp"
#include "rationd/rational.hpp"

namespace rationd {

/// A pool of units with its own quota and priority tiers. Tier 0 is the
/// highest priority; agents sharing a tier are tied.
struct Category {
  std::string name;
  std::int64_t quota = 0;
  std::vector<std::vector<std::string>> tiers;

  friend bool operator==(const Category&, const Category&) = default;
};

/// An allocation instance: agents, and categories with quotas, eligibility
/// and priorities. Immutable once built; construction checks the invariants
/// and precomputes the rank table.
class Instance {
 public:
  Instance() = default;

  Instance(std::vector<std::string> agents, std::vector<Category> categories)
      : agents_(std::move(agents)), categories_(std::move(categories)) {
    for (std::size_t a = 0; a < agents_.size(); ++a) {
      if (!agent_index_.emplace(agents_[a], a).second)
        fail(ErrorKind::InvalidInstance, "duplicate agent \"" + agents_[a] + "\"");
    }
    ranks_ = Grid<int>(agents_.size(), categories_.size(), 0);
    eligible_.resize(categories_.size());
    for (std::size_t c = 0; c < categories_.size(); ++c) {
      const auto& cat = categories_[c];
      if (!category_index_.emplace(cat.name, c).second)
        fail(ErrorKind::InvalidInstance, "duplicate category \"" + cat.name + "\"");
      if (cat.quota < 0)
        fail(ErrorKind::InvalidInstance, "negative quota in \"" + cat.name + "\"");
      for (std::size_t t = 0; t < cat.tiers.size(); ++t) {
        if (cat.tiers[t].empty())
          fail(ErrorKind::InvalidInstance,
               "empty tier " + std::to_string(t + 1) + " in \"" + cat.name + "\"");
        for (const auto& name : cat.tiers[t]) {
          auto it = agent_index_.find(name);
          if (it == agent_index_.end())
            fail(ErrorKind::InvalidInstance, "tier of \"" + cat.name +
                                                 "\" names unknown agent \"" + name + "\"");
          if (ranks_(it->second, c) != 0)
            fail(ErrorKind::InvalidInstance, "agent \"" + name +
                                                 "\" appears twice in \"" + cat.name + "\"");
          ranks_(it->second, c) = static_cast<int>(t) + 1;
          eligible_[c].push_back(it->second);
        }
      }
      total_quota_ += cat.quota;
    }
  }

  std::size_t num_agents() const noexcept { return agents_.size(); }
  std::size_t num_categories() const noexcept { return categories_.size(); }

  const std::vector<std::string>& agents() const noexcept { return agents_; }
  const std::vector<Category>& categories() const noexcept { return categories_; }
  const std::string& agent(std::size_t a) const { return agents_.at(a); }
  const Category& category(std::size_t c) const { return categories_.at(c); }

  std::int64_t quota(std::size_t c) const { return categories_[c].quota; }
  std::int64_t total_quota() const noexcept { return total_quota_; }
  int tier_count(std::size_t c) const {
    return static_cast<int>(categories_[c].tiers.size());
  }

  /// 1-based tier index, or 0 when the agent is not eligible.
  int rank(std::size_t c, std::size_t a) const { return ranks_(a, c); }
  bool eligible(std::size_t c, std::size_t a) const { return ranks_(a, c) != 0; }

  /// Eligible agents of a category, best tier first.
  const std::vector<std::size_t>& eligible_agents(std::size_t c) const {
    return eligible_[c];
  }

  std::size_t num_eligible_pairs() const {
    std::size_t n = 0;
    for (const auto& e : eligible_) n += e.size();
    return n;
  }

  std::optional<std::size_t> find_agent(std::string_view name) const {
    auto it = agent_index_.find(std::string(name));
    if (it == agent_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> find_category(std::string_view name) const {
    auto it = category_index_.find(std::string(name));
    if (it == category_index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t agent_index(std::string_view name) const {
    if (auto a = find_agent(name)) return *a;
    fail(ErrorKind::UnknownAgent, "unknown agent \"" + std::string(name) + "\"");
  }
  std::size_t category_index(std::string_view name) const {
    if (auto c = find_category(name)) return *c;
    fail(ErrorKind::UnknownCategory, "unknown category \"" + std::string(name) + "\"");
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.agents_ == b.agents_ && a.categories_ == b.categories_;
  }

 private:
  std::vector<std::string> agents_;
  std::vector<Category> categories_;
  std::unordered_map<std::string, std::size_t> agent_index_;
  std::unordered_map<std::string, std::size_t> category_index_;
  Grid<int> ranks_;
  std::vector<std::vector<std::size_t>> eligible_;
  std::int64_t total_quota_ = 0;
};

inline int rank(const Instance& instance, std::string_view category,
                std::string_view agent) {
  const auto c = instance.category_index(category);
  const auto a = instance.agent_index(agent);
  const int r = instance.rank(c, a);
  if (r == 0)
    fail(ErrorKind::AgentNotEligible, "agent \"" + std::string(agent) +
                                          "\" is not eligible in \"" +
                                          std::string(category) + "\"");
  return r;
}

/// Removes every listed agent, and everyone strictly below it, from each
/// category's tiers. Quotas and the agent list are kept.
inline Instance restrict(const Instance& instance,
                         std::span<const std::size_t> removed) {
  std::vector<Category> categories = instance.categories();
  for (std::size_t c = 0; c < instance.num_categories(); ++c) {
    int cutoff = instance.tier_count(c) + 1;  // first tier index dropped
    std::unordered_set<std::size_t> dropped;
    for (std::size_t a : removed) {
      if (a >= instance.num_agents())
        fail(ErrorKind::UnknownAgent, "agent index out of range");
      const int r = instance.rank(c, a);
      if (r == 0) continue;
      dropped.insert(a);
      cutoff = std::min(cutoff, r + 1);
    }
    auto& tiers = categories[c].tiers;
    std::vector<std::vector<std::string>> kept;
    for (int t = 0; t < static_cast<int>(tiers.size()) && t + 1 < cutoff; ++t) {
      std::vector<std::string> tier;
      for (auto& name : tiers[t])
        if (!dropped.count(instance.agent_index(name))) tier.push_back(name);
      if (!tier.empty()) kept.push_back(std::move(tier));
    }
    tiers = std::move(kept);
  }
  return Instance(instance.agents(), std::move(categories));
}

inline Instance restrict(const Instance& instance,
                         const std::vector<std::string>& removed) {
  std::vector<std::size_t> idx;
  for (const auto& name : removed) idx.push_back(instance.agent_index(name));
  return restrict(instance, std::span<const std::size_t>(idx));
}

inline constexpr int kUnassigned = -1;

/// Integral allocation: one category index (or kUnassigned) per agent.
struct IntegralAllocation {
  std::vector<int> category_of;

  IntegralAllocation() = default;
  explicit IntegralAllocation(std::size_t num_agents)
      : category_of(num_agents, kUnassigned) {}
  explicit IntegralAllocation(std::vector<int> assignment)
      : category_of(std::move(assignment)) {}

  std::size_t num_agents() const noexcept { return category_of.size(); }
  bool assigned(std::size_t a) const { return category_of[a] != kUnassigned; }

  std::size_t size() const {
    return static_cast<std::size_t>(std::count_if(
        category_of.begin(), category_of.end(),
        [](int c) { return c != kUnassigned; }));
  }

  /// Bit a is set iff agent a is allocated (instances up to 64 agents).
  std::uint64_t allocated_mask() const {
    std::uint64_t mask = 0;
    for (std::size_t a = 0; a < category_of.size(); ++a)
      if (category_of[a] != kUnassigned) mask |= std::uint64_t{1} << a;
    return mask;
  }

  friend auto operator<=>(const IntegralAllocation&,
                          const IntegralAllocation&) = default;
};

/// Builds an integral allocation from (agent, category) name pairs; agents not
/// listed stay unassigned.
inline IntegralAllocation make_allocation(
    const Instance& instance,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  IntegralAllocation out(instance.num_agents());
  for (const auto& [agent, category] : pairs)
    out.category_of[instance.agent_index(agent)] =
        static_cast<int>(instance.category_index(category));
  return out;
}

/// Fractional allocation x(a, c) in [0,1] with per-agent row sums at most 1.
class FractionalAllocation {
 public:
  FractionalAllocation() = default;
  FractionalAllocation(std::size_t num_agents, std::size_t num_categories)
      : entries_(num_agents, num_categories, Rational(0)) {}

  explicit FractionalAllocation(Grid<Rational> entries)
      : entries_(std::move(entries)) {
    for (std::size_t a = 0; a < entries_.rows(); ++a) {
      Rational row = 0;
      for (std::size_t c = 0; c < entries_.cols(); ++c) {
        const auto& v = entries_(a, c);
        if (v < 0 || v > 1)
          fail(ErrorKind::InvalidAllocation, "entry outside [0,1]");
        row += v;
      }
      if (row > 1)
        fail(ErrorKind::InvalidAllocation, "agent row sum exceeds 1");
    }
  }

  static FractionalAllocation from_integral(const IntegralAllocation& x,
                                            std::size_t num_categories) {
    Grid<Rational> g(x.num_agents(), num_categories, Rational(0));
    for (std::size_t a = 0; a < x.num_agents(); ++a) {
      const int c = x.category_of[a];
      if (c == kUnassigned) continue;
      if (c < 0 || static_cast<std::size_t>(c) >= num_categories)
        fail(ErrorKind::DimensionMismatch, "category index out of range");
      g(a, static_cast<std::size_t>(c)) = 1;
    }
    return FractionalAllocation(std::move(g));
  }

  std::size_t num_agents() const noexcept { return entries_.rows(); }
  std::size_t num_categories() const noexcept { return entries_.cols(); }
  const Rational& operator()(std::size_t a, std::size_t c) const {
    return entries_(a, c);
  }
  const Grid<Rational>& entries() const noexcept { return entries_; }

  Rational agent_total(std::size_t a) const {
    Rational s = 0;
    for (std::size_t c = 0; c < entries_.cols(); ++c) s += entries_(a, c);
    return s;
  }
  Rational category_total(std::size_t c) const {
    Rational s = 0;
    for (std::size_t a = 0; a < entries_.rows(); ++a) s += entries_(a, c);
    return s;
  }
  /// V(x): total allocated amount.
  Rational size() const {
    Rational s = 0;
    for (const auto& v : entries_.cells()) s += v;
    return s;
  }

  bool is_integral() const {
    for (const auto& v : entries_.cells())
      if (v != 0 && v != 1) return false;
    return true;
  }

  /// Only meaningful when is_integral() holds.
  IntegralAllocation to_integral() const {
    IntegralAllocation out(num_agents());
    for (std::size_t a = 0; a < num_agents(); ++a)
      for (std::size_t c = 0; c < num_categories(); ++c)
        if (entries_(a, c) == 1) out.category_of[a] = static_cast<int>(c);
    return out;
  }

  friend bool operator==(const FractionalAllocation& a,
                         const FractionalAllocation& b) {
    return a.entries_ == b.entries_;
  }

 private:
  Grid<Rational> entries_;
};

}  // namespace rationd
