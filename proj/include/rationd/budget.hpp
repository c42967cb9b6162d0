#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>

#include "rationd/error.hpp"
#include "rationd/instance.hpp"

namespace rationd {

/// Size limits for the exhaustive procedures. Exceeding any of them raises
/// BudgetExceeded instead of running a search that would not finish.
struct Budget {
  std::size_t max_agents = 8;
  std::size_t max_categories = 4;
  std::int64_t max_quota = 8;        // total quota
  std::uint64_t max_states = 2'000'000;

  /// Applies "agents=N,categories=N,quota=N,states=N" (any subset).
  Budget with_overrides(std::string_view text) const {
    Budget out = *this;
    while (!text.empty()) {
      const auto comma = text.find(',');
      auto item = text.substr(0, comma);
      text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string_view::npos)
        fail(ErrorKind::ParseError, "budget entry \"" + std::string(item) + "\" lacks '='");
      const auto key = item.substr(0, eq);
      const std::string value(item.substr(eq + 1));
      char* end = nullptr;
      const unsigned long long n = std::strtoull(value.c_str(), &end, 10);
      if (value.empty() || *end != '\0')
        fail(ErrorKind::ParseError, "budget value \"" + value + "\" is not a count");
      if (key == "agents") out.max_agents = n;
      else if (key == "categories") out.max_categories = n;
      else if (key == "quota") out.max_quota = static_cast<std::int64_t>(n);
      else if (key == "states") out.max_states = n;
      else fail(ErrorKind::ParseError, "unknown budget key \"" + std::string(key) + "\"");
    }
    return out;
  }

  /// Applies RATIOND_BUDGET from the environment, if set.
  Budget from_environment() const {
    const char* env = std::getenv("RATIOND_BUDGET");
    return env ? with_overrides(env) : *this;
  }

  void check(const Instance& instance, std::string_view what) const {
    auto over = [&](const std::string& detail) {
      fail(ErrorKind::BudgetExceeded, std::string(what) + ": " + detail);
    };
    if (instance.num_agents() > max_agents)
      over(std::to_string(instance.num_agents()) + " agents > " + std::to_string(max_agents));
    if (instance.num_categories() > max_categories)
      over(std::to_string(instance.num_categories()) + " categories > " +
           std::to_string(max_categories));
    if (instance.total_quota() > max_quota)
      over("total quota " + std::to_string(instance.total_quota()) + " > " +
           std::to_string(max_quota));
  }
};

/// Limits for full enumeration of assignment maps.
inline Budget enumeration_budget() { return Budget{}.from_environment(); }

/// Limits for the memoized pick-sequence searches.
inline Budget search_budget() {
  return Budget{16, 8, 16, 5'000'000}.from_environment();
}

// Counts visited states against Budget::max_states.
class StateCounter {
 public:
  StateCounter(const Budget& budget, std::string_view what)
      : limit_(budget.max_states), what_(what) {}

  void tick() {
    if (++count_ > limit_)
      fail(ErrorKind::BudgetExceeded,
           std::string(what_) + ": more than " + std::to_string(limit_) + " states");
  }
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t limit_;
  std::uint64_t count_ = 0;
  std::string_view what_;
};

}  // namespace rationd
