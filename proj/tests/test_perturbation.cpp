#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace rationd;
using namespace testing_support;

TEST(Perturbation, RankSumIsValid) {
  const auto inst = load_instance("basic_instance.json");
  const auto d = make_perturbation(inst, PerturbationScheme::RankSum);
  EXPECT_TRUE(is_valid_perturbation(inst, d));
  // r / (2 |C| |A|^2) with |C| = 3, |A| = 4
  EXPECT_EQ(*d(inst.agent_index("d"), inst.category_index("gamma")), Rational(1, 48));
}

TEST(Perturbation, RankMinMaxFormula) {
  const auto inst = load_instance("basic_instance.json");
  const auto d = make_perturbation(inst, PerturbationScheme::RankMinMax);
  EXPECT_TRUE(is_valid_perturbation(inst, d));
  // (1 / (2 |C| |A|)) (1/(|A|+1))^(|A| - r)
  EXPECT_EQ(*d(inst.agent_index("b"), inst.category_index("beta")), Rational(1, 24 * 25));
  EXPECT_EQ(*d(inst.agent_index("a"), inst.category_index("beta")), Rational(1, 24 * 125));
}

TEST(Perturbation, AllOnesBreaksSmallEffect) {
  const auto inst = load_instance("basic_instance.json");
  Perturbation d(inst.num_agents(), inst.num_categories());
  for (std::size_t c = 0; c < inst.num_categories(); ++c)
    for (std::size_t a : inst.eligible_agents(c)) d(a, c) = 1;
  const auto r = is_valid_perturbation(inst, d);
  EXPECT_FALSE(r);
  EXPECT_EQ(r.violated, PerturbationProperty::SmallEffect);
}

TEST(Perturbation, InvertedOrderBreaksConsistency) {
  const auto inst = load_instance("basic_instance.json");
  auto d = make_perturbation(inst, PerturbationScheme::RankSum);
  const auto beta = inst.category_index("beta");
  std::swap(d(inst.agent_index("a"), beta), d(inst.agent_index("b"), beta));
  const auto r = is_valid_perturbation(inst, d);
  EXPECT_FALSE(r);
  EXPECT_EQ(r.violated, PerturbationProperty::Consistency);
}

TEST(Perturbation, UnevenTieBreaksConsistency) {
  const auto inst = load_instance("basic_instance.json");
  auto d = make_perturbation(inst, PerturbationScheme::RankSum);
  *d(inst.agent_index("b"), inst.category_index("gamma")) += Rational(1, 1000);
  EXPECT_EQ(is_valid_perturbation(inst, d).violated, PerturbationProperty::Consistency);
}

TEST(Perturbation, MissingEntryBreaksPositivity) {
  const auto inst = load_instance("basic_instance.json");
  auto d = make_perturbation(inst, PerturbationScheme::RankSum);
  d(inst.agent_index("c"), inst.category_index("alpha")).reset();
  EXPECT_EQ(is_valid_perturbation(inst, d).violated, PerturbationProperty::Positivity);
}

TEST(Perturbation, EntryOnIneligiblePair) {
  const auto inst = load_instance("basic_instance.json");
  auto d = make_perturbation(inst, PerturbationScheme::RankSum);
  d(inst.agent_index("a"), inst.category_index("alpha")) = Rational(1, 100);
  try {
    is_valid_perturbation(inst, d);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EntryOnIneligiblePair);
  }
}

TEST(Perturbation, SingletonInstance) {
  const Instance inst({"a"}, {{"x", 1, {{"a"}}}});
  for (auto s : {PerturbationScheme::RankSum, PerturbationScheme::RankMinMax,
                 PerturbationScheme::UniformTiered}) {
    const auto d = make_perturbation(inst, s);
    ASSERT_TRUE(d(0, 0));
    EXPECT_GT(*d(0, 0), 0);
    EXPECT_LE(*d(0, 0), Rational(1, 2));
  }
}

TEST(Perturbation, EmptyInstance) {
  const Instance inst({"a"}, {{"x", 1, {}}});
  try {
    make_perturbation(inst, PerturbationScheme::RankSum);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInstance);
  }
  EXPECT_EQ(solve_valid(inst), IntegralAllocation(1));
}

TEST(SolveValid, RankSumOnSmallExample) {
  const auto inst = load_instance("basic_instance.json");
  EXPECT_EQ(solve_valid(inst, PerturbationScheme::RankSum),
            load_integral(inst, "basic_allocation3.json"));
}

TEST(SolveValid, RankSumFindsTheMinimumRankSum) {
  // x and y both have rank sum 10; a third valid allocation reaches 9.
  const auto inst = load_instance("nonconvex_instance.json");
  const auto x = solve_valid(inst, PerturbationScheme::RankSum);
  EXPECT_TRUE(validate(inst, x, 4).fully_valid());
  EXPECT_EQ(x, make_allocation(inst, {{"a", "beta"}, {"e", "beta"}, {"b", "alpha"}, {"c", "alpha"}}));
  EXPECT_EQ(rank_sum(inst, x), 9);
  EXPECT_EQ(rank_sum(inst, load_integral(inst, "nonconvex_x.json")), 10);
  EXPECT_EQ(rank_sum(inst, load_integral(inst, "nonconvex_y.json")), 10);
  int best = 1 << 20;
  for (const auto& v : oracle(inst).valid) best = std::min(best, rank_sum(inst, v));
  EXPECT_EQ(best, 9);
}

TEST(SolveValid, RejectsInvalidPerturbation) {
  const auto inst = load_instance("basic_instance.json");
  Perturbation d(inst.num_agents(), inst.num_categories());
  try {
    solve_valid(inst, d);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidPerturbation);
  }
}

TEST(SolveValid, RandomPerturbationsGiveValidStableOutput) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 200; ++t) {
    const auto inst = random_instance(rng, Shape{6, 3, 3, 9, 0.65});
    const auto v = oracle_max_size(inst);
    for (int k = 0; k < 3; ++k) {
      const auto d = random_valid_perturbation(rng, inst);
      ASSERT_TRUE(is_valid_perturbation(inst, d));
      const auto x = solve_valid(inst, d);
      const auto r = validate(inst, x, v);
      EXPECT_TRUE(r.fully_valid());
      EXPECT_EQ(r.cs, Verdict::Pass);
      EXPECT_FALSE(oracle_has_trade_cycle(inst, x));
    }
  }
}

TEST(SolveValid, ValidAllocationsAllHaveMaximumSize) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 150; ++t) {
    const auto inst = random_instance(rng);
    const auto o = oracle(inst);
    EXPECT_EQ(max_size(inst), o.v_star);
    // A feasible allocation that is not of maximum size is never valid.
    for (const auto& x : o.feasible)
      EXPECT_EQ(validate(inst, x, o.v_star).valid(),
                static_cast<std::int64_t>(x.size()) == o.v_star);
  }
}

TEST(InnerThresholds, PerturbationsOptimizeTheirCriterion) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 150; ++t) {
    const auto inst = random_instance(rng);
    const auto o = oracle(inst);
    int best_sum = 1 << 30, best_max = 1 << 30;
    for (const auto& x : o.valid) {
      best_sum = std::min(best_sum, rank_sum(inst, x));
      best_max = std::min(best_max, max_rank(inst, x));
    }
    const auto s = optimize_inner(inst, InnerMode::Sum);
    const auto m = optimize_inner(inst, InnerMode::MinMax);
    EXPECT_TRUE(validate(inst, s, o.v_star).valid());
    EXPECT_TRUE(validate(inst, m, o.v_star).valid());
    EXPECT_EQ(rank_sum(inst, s), best_sum);
    EXPECT_EQ(max_rank(inst, m), best_max);
  }
}

TEST(InnerThresholds, SmallExample) {
  const auto inst = load_instance("basic_instance.json");
  const auto x3 = load_integral(inst, "basic_allocation3.json");
  const auto x4 = load_integral(inst, "basic_allocation4.json");
  EXPECT_EQ(rank_sum(inst, x3), 3);
  EXPECT_EQ(rank_sum(inst, x4), 5);
  EXPECT_EQ(optimize_inner(inst, InnerMode::Sum), x3);
  EXPECT_EQ(optimize_inner(inst, InnerMode::MinMax), x3);
  EXPECT_EQ(max_rank(inst, x3), 1);
}
