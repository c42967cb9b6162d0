// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// --known-failures=ID,ID excludes those criteria from the exit status only.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "test_support.hpp"

using namespace rationd;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

int failures = 0;
std::vector<std::string> known_failures;
std::vector<std::string> failed;

void criterion(const char* id, const char* title, double limit_seconds,
               const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_seconds > 0 && secs > limit_seconds) {
    std::ostringstream s;
    s << "took " << secs << " s, limit " << limit_seconds << " s";
    out.require(false, s.str());
  }
  if (!out.pass) {
    failed.emplace_back(id);
    if (std::find(known_failures.begin(), known_failures.end(), id) == known_failures.end())
      ++failures;
  }
  std::printf("[%s] %s %s (%.2f s)%s%s\n", out.pass ? "PASS" : "FAIL", id, title, secs,
              out.detail.empty() ? "" : ": ", out.detail.c_str());
  std::fflush(stdout);
}

std::vector<Instance> enumerable_instances(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::vector<Instance> out;
  while (static_cast<int>(out.size()) < count) out.push_back(random_instance(rng));
  return out;
}

double mean_of(const LossSummary& s) { return s.mean.get_d(); }

OnlineInstance single_category(std::int64_t horizon) {
  return OnlineInstance(Instance({"a", "b", "c"}, {{"alpha", horizon / 2, {{"a"}, {"b"}, {"c"}}}}),
                        {Rational(1, 3), Rational(1, 3), Rational(1, 3)}, horizon);
}

OnlineInstance two_category(std::int64_t horizon) {
  return OnlineInstance(Instance({"a", "b", "c"}, {{"alpha", horizon / 4, {{"a"}, {"b"}, {"c"}}},
                                                  {"beta", horizon / 4, {{"a"}, {"c"}, {"b"}}}}),
                        {Rational(1, 3), Rational(1, 3), Rational(1, 3)}, horizon);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string flag = "--known-failures=";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind(flag, 0) != 0) {
      std::fprintf(stderr, "unknown argument %s\n", argv[i]);
      return 2;
    }
    std::istringstream ids(arg.substr(flag.size()));
    for (std::string id; std::getline(ids, id, ',');) known_failures.push_back(id);
  }
  criterion("AC-01", "worked example verdicts and enumeration", 1.0, [](Outcome& o) {
    const auto inst = load_instance("basic_instance.json");
    auto report = [&](const char* f) {
      return validate(inst, load_allocation(inst, f), max_size(inst));
    };
    const auto r1 = report("basic_allocation1.json");
    const auto r2 = report("basic_allocation2.json");
    const auto r3 = report("basic_allocation3.json");
    const auto r4 = report("basic_allocation4.json");
    o.require(r1.pr == Verdict::Fail, "allocation 1 should fail PR");
    o.require(r2.qr == Verdict::Pass && r2.er == Verdict::Pass && r2.pr == Verdict::Pass &&
                  r2.pe == Verdict::Fail,
              "allocation 2 should fail only PE");
    o.require(r3.valid() && r3.cs == Verdict::Pass, "allocation 3 should be valid and stable");
    o.require(r4.valid() && r4.cs == Verdict::Fail, "allocation 4 should be valid, CS FAIL");
    const auto e = enumerate_all(inst);
    std::set<IntegralAllocation> valid(e.valid.begin(), e.valid.end());
    o.require(valid == std::set<IntegralAllocation>{load_integral(inst, "basic_allocation3.json"),
                                                    load_integral(inst, "basic_allocation4.json")},
              "valid set should be {3, 4}");
    for (const auto& x : e.valid)
      o.require(x.allocated_mask() == 0b0111u, "valid allocations must serve exactly {a,b,c}");
  });

  criterion("AC-02", "random valid perturbations give fully valid solves", 60.0, [](Outcome& o) {
    std::mt19937_64 rng(2002);
    const Shape shape{6, 3, 3, 9, 0.65};
    for (int t = 0; t < 1000; ++t) {
      const auto inst = random_instance(rng, shape);
      const auto v = oracle_max_size(inst);
      for (int k = 0; k < 3; ++k) {
        const auto d = random_valid_perturbation(rng, inst);
        o.require(static_cast<bool>(is_valid_perturbation(inst, d)), "generator made an invalid delta");
        const auto x = solve_valid(inst, d);
        const auto r = validate(inst, x, v);
        o.require(r.valid() && r.cs == Verdict::Pass, "solve output failed an axiom");
        o.require(!oracle_has_trade_cycle(inst, x), "oracle found a trade cycle");
      }
    }
  });

  criterion("AC-03", "Pareto-efficient feasible allocations have maximum size", 0, [](Outcome& o) {
    for (const auto& inst : enumerable_instances(3003, 300)) {
      const auto orc = oracle(inst);
      const auto v = max_size(inst);
      o.require(v == orc.v_star, "max_size disagrees with brute force");
      for (const auto& x : orc.feasible) {
        const auto mx = x.allocated_mask();
        bool dominated = false;
        for (const auto& y : orc.feasible) {
          const auto my = y.allocated_mask();
          dominated = dominated || ((my & mx) == mx && my != mx);
        }
        if (!dominated)
          o.require(static_cast<std::int64_t>(x.size()) == v, "efficient allocation below V*");
      }
      for (const auto& x : orc.valid)
        o.require(static_cast<std::int64_t>(x.size()) == v, "valid allocation below V*");
    }
  });

  const auto shared = enumerable_instances(4004, 200);

  // Both of the next two fail on instances with tied tiers; the tie-free
  // subset is checked separately and the detail line carries the counts.
  criterion("AC-04", "realizability in both directions", 0, [&](Outcome& o) {
    int checked = 0, unrealizable = 0, tie_free = 0;
    for (const auto& inst : shared) {
      const auto orc = oracle(inst);
      o.require(validate(inst, solve_valid(inst), orc.v_star).cs == Verdict::Pass,
                "forward: solve output fails CS");
      tie_free += !has_ties(inst);
      for (const auto& x : orc.valid_cs) {
        ++checked;
        Perturbation d(inst.num_agents(), inst.num_categories());
        try {
          d = realize_perturbation(inst, x);
        } catch (const Error& e) {
          o.require(e.kind() == ErrorKind::NotRealizable, e.what());
          o.require(has_ties(inst), "unrealizable allocation on a tie-free instance");
          o.require(oracle_beaten_everywhere(inst, x, orc.valid), "unconfirmed unrealizability");
          ++unrealizable;
          continue;
        }
        o.require(static_cast<bool>(is_valid_perturbation(inst, d)), "reverse: invalid delta");
        const Rational vx = perturbed_value(d, x);
        Rational best = vx;
        for (const auto& y : orc.valid) best = std::max(best, perturbed_value(d, y));
        o.require(vx == best, "reverse: x is not the V_delta maximum");
      }
    }
    std::ostringstream s;
    s << "reverse fails for " << unrealizable << " of " << checked
      << " valid stable allocations, all on tied instances and each beaten by another valid"
         " allocation under every valid perturbation (tie-free instances: "
      << tie_free << ", all realized)";
    o.require(unrealizable == 0, s.str());
  });

  criterion("AC-05", "serial dictatorship outcomes equal the valid stable set", 0, [&](Outcome& o) {
    int differ = 0, tie_free = 0;
    for (const auto& inst : shared) {
      const auto orc = oracle(inst);
      std::vector<IntegralAllocation> maximal;
      for (const auto& x : serial_dictatorship_outcomes(inst))
        if (static_cast<std::int64_t>(x.size()) == orc.v_star) maximal.push_back(x);
      std::sort(maximal.begin(), maximal.end());
      o.require(std::includes(maximal.begin(), maximal.end(), orc.valid_cs.begin(),
                              orc.valid_cs.end()),
                "a valid stable allocation is not a serial dictatorship outcome");
      if (!has_ties(inst)) {
        ++tie_free;
        o.require(maximal == orc.valid_cs, "sets differ on a tie-free instance");
      }
      differ += maximal != orc.valid_cs;
    }
    std::ostringstream s;
    s << "sets differ on " << differ << " of " << shared.size()
      << " instances, all tied; there the outcomes add allocations with a weak trade cycle"
         " (tie-free instances: "
      << tie_free << ", all equal)";
    o.require(differ == 0, s.str());
  });

  criterion("AC-06", "fractional valid allocations decompose", 0, [](Outcome& o) {
    std::mt19937_64 rng(6006);
    int combos = 0, passing = 0;
    while (combos < 500) {
      const auto inst = random_instance(rng);
      const auto orc = oracle(inst);
      if (orc.valid.empty()) continue;
      const auto& x = orc.valid[pick(rng, 0, orc.valid.size() - 1)];
      const auto& y = orc.valid[pick(rng, 0, orc.valid.size() - 1)];
      const Rational w = random_unit(rng, 17);
      const auto z = combine({{w, x}, {1 - w, y}}, inst.num_agents(), inst.num_categories());
      ++combos;
      if (!validate(inst, z, orc.v_star).valid()) continue;
      ++passing;
      const auto parts = decompose(inst, z, orc.v_star);
      o.require(combine(parts, inst.num_agents(), inst.num_categories()) == z,
                "reconstruction differs");
      for (const auto& p : parts)
        o.require(std::binary_search(orc.valid.begin(), orc.valid.end(), p.allocation),
                  "component not oracle-valid");
    }
    o.require(passing > 0, "no combination passed validate");
    const auto inst = load_instance("nonconvex_instance.json");
    const auto r = validate(inst, load_allocation(inst, "nonconvex_z.json"), max_size(inst));
    o.require(r.pr == Verdict::Fail && r.pr_witness &&
                  r.pr_witness->lower == inst.agent_index("d") &&
                  r.pr_witness->category == inst.category_index("alpha"),
              "average should fail PR naming d in alpha");
  });

  criterion("AC-07", "unanimity and serviceability match the oracle", 0, [](Outcome& o) {
    for (const auto& inst : enumerable_instances(7007, 200)) {
      const auto orc = oracle(inst);
      for (std::size_t a = 0; a < inst.num_agents(); ++a) {
        bool all = true, some = false;
        for (const auto& x : orc.valid) {
          all = all && x.assigned(a);
          some = some || x.assigned(a);
        }
        o.require(is_unanimous(inst, a).verdict == all, "unanimity mismatch");
        o.require(is_serviceable(inst, a).verdict == some, "serviceability mismatch");
      }
    }
    const auto inst = load_instance("x3c_instance.json");
    const auto r = is_serviceable(inst, inst.agent_index("a"));
    o.require(r.verdict && r.witness &&
                  r.witness->allocated_mask() ==
                      load_integral(inst, "x3c_red_allocation.json").allocated_mask(),
              "reduction fixture witness should serve the red set");
  });

  criterion("AC-08", "threshold fixture and inner optimization", 0, [](Outcome& o) {
    const auto inst = load_instance("thresholds_instance.json");
    const auto t = thresholds(inst, load_integral(inst, "thresholds_allocation.json"));
    o.require(t.inner == std::vector<int>{4, 2, 4}, "inner thresholds");
    o.require(t.outer == std::vector<int>{5, 4, 5}, "outer thresholds");
    for (const auto& g : enumerable_instances(8008, 200)) {
      const auto orc = oracle(g);
      int best_sum = 1 << 30, best_max = 1 << 30;
      for (const auto& x : orc.valid) {
        best_sum = std::min(best_sum, rank_sum(g, x));
        best_max = std::min(best_max, max_rank(g, x));
      }
      o.require(rank_sum(g, optimize_inner(g, InnerMode::Sum)) == best_sum, "SUM not minimal");
      o.require(max_rank(g, optimize_inner(g, InnerMode::MinMax)) == best_max, "MINMAX not minimal");
    }
  });

  criterion("AC-09", "utility selection is maximal and Pareto efficient", 0, [](Outcome& o) {
    const auto inst = load_instance("utility_not_maximal_instance.json");
    const auto u = io::parse_utilities(
        inst, io::read_json_file(fixture_path("utility_not_maximal_utilities.json")));
    o.require(allocate_with_preferences(inst, u) ==
                  make_allocation(inst, {{"b", "alpha"}, {"a", "beta"}}),
              "fixture output");
    std::mt19937_64 rng(9009);
    for (int t = 0; t < 200; ++t) {
      const auto g = random_instance(rng);
      const auto ug = random_utilities(rng, g);
      const auto orc = oracle(g);
      const auto x = allocate_with_preferences(g, ug);
      o.require(static_cast<std::int64_t>(x.size()) == orc.v_star, "output not maximal");
      o.require(oracle_priority_respecting(g, x), "output breaks priority");
      for (const auto& y : orc.feasible)
        o.require(!pareto_dominates(ug, y, x), "output is Pareto dominated");
    }
  });

  criterion("AC-10", "hard-priority baseline loses linearly", 120.0, [](Outcome& o) {
    const auto small = run_simulation(single_category(300), Policy::HardPriority, 200, 1);
    const auto large = run_simulation(single_category(600), Policy::HardPriority, 200, 1);
    const double m300 = mean_of(small.summary.efficiency), m600 = mean_of(large.summary.efficiency);
    std::printf("  mean efficiency loss: T=300 %.2f, T=600 %.2f, ratio %.2f\n", m300, m600,
                m600 / m300);
    o.require(m600 > 1.8 * m300, "growth ratio at most 1.8");
    o.require(m600 >= 20.0, "mean at T=600 below 20");
  });

  criterion("AC-11", "restricted LP policy loss stays flat", 300.0, [](Outcome& o) {
    const auto rl200 = run_simulation(two_category(200), Policy::RestrictedLp, 200, 1);
    const auto rl800 = run_simulation(two_category(800), Policy::RestrictedLp, 200, 1);
    const auto hp200 = run_simulation(two_category(200), Policy::HardPriority, 200, 1);
    const auto hp800 = run_simulation(two_category(800), Policy::HardPriority, 200, 1);
    const double a = mean_of(rl200.summary.total), b = mean_of(rl800.summary.total);
    const double c = mean_of(hp200.summary.efficiency), d = mean_of(hp800.summary.efficiency);
    std::printf("  restricted LP mean total loss: T=200 %.3f, T=800 %.3f\n", a, b);
    std::printf("  hard priority mean efficiency loss: T=200 %.2f, T=800 %.2f\n", c, d);
    o.require(b <= 2 * a, "restricted LP loss more than doubled");
    o.require(d >= 3 * c, "hard priority loss did not triple");
  });

  criterion("AC-12", "stable matching fixtures and local perturbations", 30.0, [](Outcome& o) {
    const PerfectMatching diagonal{0, 1, 2, 3, 4, 5};
    for (int which : {1, 2}) {
      const auto sm = local_perturbation_fixture(which);
      o.require(deferred_acceptance(sm) == diagonal, "deferred acceptance differs from M");
      o.require(stable_matchings(sm) == std::vector<PerfectMatching>{diagonal},
                "M is not the unique stable matching");
    }
    std::mt19937_64 rng(12012);
    for (int t = 0; t < 50; ++t) {
      Grid<Rational> f(6, 6);
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
          f(i, j) = random_unit(rng, 60) * (rng() % 2 ? 1 : -1);
      const auto r = check_local_perturbation(f);
      o.require(r.some_instance_has_unstable_maximizer(), "no unstable maximizer");
      o.require(!(r.cases[0].requirement_holds && r.cases[1].requirement_holds),
                "both requirements hold");
    }
  });

  std::printf("%zu of 12 criteria failed", failed.size());
  for (std::size_t i = 0; i < failed.size(); ++i)
    std::printf("%s%s", i == 0 ? ": " : ", ", failed[i].c_str());
  if (!known_failures.empty()) std::printf(" (%d not in the known-failure list)", failures);
  std::printf("\n");
  return failures == 0 ? 0 : 1;
}
