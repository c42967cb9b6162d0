#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rationd/error.hpp"
#include "rationd/grid.hpp"
#include "rationd/rational.hpp"

namespace rationd {

/// Complete strict preferences on both sides; lists hold indices into the
/// other side, most preferred first.
struct StableMatchingInstance {
  std::vector<std::string> men;
  std::vector<std::string> women;
  std::vector<std::vector<std::size_t>> men_prefs;
  std::vector<std::vector<std::size_t>> women_prefs;

  std::size_t size() const { return men.size(); }

  void check() const {
    const std::size_t n = men.size();
    if (women.size() != n || men_prefs.size() != n || women_prefs.size() != n)
      fail(ErrorKind::WrongDimension, "both sides need n members and n lists");
    auto is_perm = [n](std::vector<std::size_t> list) {
      std::sort(list.begin(), list.end());
      for (std::size_t i = 0; i < list.size(); ++i)
        if (list[i] != i) return false;
      return list.size() == n;
    };
    for (const auto& l : men_prefs)
      if (!is_perm(l)) fail(ErrorKind::InvalidInstance, "man's list is not a permutation");
    for (const auto& l : women_prefs)
      if (!is_perm(l)) fail(ErrorKind::InvalidInstance, "woman's list is not a permutation");
  }

  /// r_w(m): 1-based position of man m on woman w's list.
  std::size_t rank_by_woman(std::size_t w, std::size_t m) const {
    const auto& l = women_prefs[w];
    return static_cast<std::size_t>(std::find(l.begin(), l.end(), m) - l.begin()) + 1;
  }
  /// r_m(w): 1-based position of woman w on man m's list.
  std::size_t rank_by_man(std::size_t m, std::size_t w) const {
    const auto& l = men_prefs[m];
    return static_cast<std::size_t>(std::find(l.begin(), l.end(), w) - l.begin()) + 1;
  }
};

/// wife[m] for each man m.
using PerfectMatching = std::vector<std::size_t>;

/// Man-proposing deferred acceptance.
inline PerfectMatching deferred_acceptance(const StableMatchingInstance& sm) {
  sm.check();
  const std::size_t n = sm.size();
  std::vector<std::size_t> next(n, 0);
  std::vector<std::optional<std::size_t>> husband(n);
  std::vector<std::size_t> free(n);
  std::iota(free.rbegin(), free.rend(), std::size_t{0});
  while (!free.empty()) {
    const std::size_t m = free.back();
    free.pop_back();
    const std::size_t w = sm.men_prefs[m][next[m]++];
    if (!husband[w]) {
      husband[w] = m;
    } else if (sm.rank_by_woman(w, m) < sm.rank_by_woman(w, *husband[w])) {
      free.push_back(*husband[w]);
      husband[w] = m;
    } else {
      free.push_back(m);
    }
  }
  PerfectMatching wife(n);
  for (std::size_t w = 0; w < n; ++w) wife[*husband[w]] = w;
  return wife;
}

/// Pairs (m, w) who both prefer each other to their partners in M.
inline std::vector<std::pair<std::size_t, std::size_t>> blocking_pairs(
    const StableMatchingInstance& sm, const PerfectMatching& wife) {
  const std::size_t n = sm.size();
  std::vector<std::size_t> husband(n);
  for (std::size_t m = 0; m < n; ++m) husband[wife[m]] = m;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t w = 0; w < n; ++w)
      if (sm.rank_by_man(m, w) < sm.rank_by_man(m, wife[m]) &&
          sm.rank_by_woman(w, m) < sm.rank_by_woman(w, husband[w]))
        out.emplace_back(m, w);
  return out;
}

inline bool is_stable(const StableMatchingInstance& sm, const PerfectMatching& wife) {
  return blocking_pairs(sm, wife).empty();
}

/// Every perfect matching, in lexicographic order of wife vectors.
inline std::vector<PerfectMatching> all_perfect_matchings(std::size_t n) {
  PerfectMatching p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::vector<PerfectMatching> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline std::vector<PerfectMatching> stable_matchings(const StableMatchingInstance& sm) {
  std::vector<PerfectMatching> out;
  for (auto& m : all_perfect_matchings(sm.size()))
    if (is_stable(sm, m)) out.push_back(std::move(m));
  return out;
}

namespace detail {

// Completes partial lists by appending the missing partners in
// lexicographic order of their names.
inline std::vector<std::vector<std::size_t>> complete(
    const std::vector<std::vector<std::size_t>>& partial, const std::vector<std::string>& names) {
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t k) { return names[i] < names[k]; });
  auto out = partial;
  for (auto& list : out)
    for (std::size_t i : order)
      if (std::find(list.begin(), list.end(), i) == list.end()) list.push_back(i);
  return out;
}

}  // namespace detail

/// The two 6x6 instances where local perturbations fail. Unlisted positions
/// are filled with the remaining partners by name, and the unique
/// stable matching (x with its Greek counterpart) is checked on construction.
inline StableMatchingInstance local_perturbation_fixture(int which) {
  if (which != 1 && which != 2) fail(ErrorKind::InvalidArgument, "fixture is 1 or 2");
  enum { a, b, c, d, e, f };
  enum { alpha, beta, gamma, delta, epsilon, zeta };
  StableMatchingInstance sm;
  sm.men = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"};
  sm.women = {"a", "b", "c", "d", "e", "f"};
  const std::vector<std::vector<std::size_t>> women = {
      {alpha}, {beta}, {gamma},
      {alpha, delta, zeta},
      {alpha, beta, epsilon, delta},
      {alpha, epsilon, beta, zeta}};
  std::vector<std::vector<std::size_t>> men = {
      {a}, {b}, {c},
      {a, e, b, c, d},
      {a, b, e, f},
      {a, f, d}};
  if (which == 2) {
    men[delta] = {a, e, b, d};
    men[epsilon] = {a, b, e, c, f};
  }
  sm.women_prefs = detail::complete(women, sm.men);
  sm.men_prefs = detail::complete(men, sm.women);
  sm.check();
  const auto stable = stable_matchings(sm);
  if (stable.size() != 1 || stable.front() != PerfectMatching{a, b, c, d, e, f})
    fail(ErrorKind::Internal, "fixture does not have the expected unique stable matching");
  return sm;
}

struct LocalPerturbationCase {
  int fixture = 0;
  Rational best_value;
  std::vector<PerfectMatching> maximizers;
  bool all_maximizers_stable = false;
  std::optional<PerfectMatching> unstable_maximizer;
  bool requirement_holds = false;  // V_F(M) > V_F(M'), M' the swap on d, e, f
};

struct LocalPerturbationReport {
  int sign = 0;  // sign of F(2,5) - F(2,4)
  std::vector<LocalPerturbationCase> cases;
  bool some_instance_has_unstable_maximizer() const {
    return std::any_of(cases.begin(), cases.end(),
                       [](const auto& c) { return !c.all_maximizers_stable; });
  }
};

/// V_F(M) = sum over pairs of F(r_w(m), r_m(w)), with F given 1-based as
/// table(i-1, j-1).
inline Rational local_value(const StableMatchingInstance& sm, const Grid<Rational>& table,
                            const PerfectMatching& wife) {
  Rational v = 0;
  for (std::size_t m = 0; m < sm.size(); ++m)
    v += table(sm.rank_by_woman(wife[m], m) - 1, sm.rank_by_man(m, wife[m]) - 1);
  return v;
}

inline LocalPerturbationReport check_local_perturbation(const Grid<Rational>& table) {
  if (table.rows() != 6 || table.cols() != 6)
    fail(ErrorKind::WrongDimension, "local perturbation table must be 6x6");
  LocalPerturbationReport report;
  const Rational diff = table(1, 4) - table(1, 3);
  report.sign = diff > 0 ? 1 : diff < 0 ? -1 : 0;
  for (int which : {1, 2}) {
    const auto sm = local_perturbation_fixture(which);
    LocalPerturbationCase out;
    out.fixture = which;
    bool first = true;
    for (auto& m : all_perfect_matchings(6)) {
      const Rational v = local_value(sm, table, m);
      if (first || v > out.best_value) {
        out.best_value = v;
        out.maximizers.clear();
        first = false;
      }
      if (v == out.best_value) out.maximizers.push_back(std::move(m));
    }
    out.all_maximizers_stable = true;
    for (const auto& m : out.maximizers)
      if (!is_stable(sm, m)) {
        out.all_maximizers_stable = false;
        if (!out.unstable_maximizer) out.unstable_maximizer = m;
      }
    out.requirement_holds = which == 1 ? report.sign > 0 : report.sign < 0;
    report.cases.push_back(std::move(out));
  }
  return report;
}

}  // namespace rationd
