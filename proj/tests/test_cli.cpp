#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rationd/cli.hpp"
#include "test_support.hpp"

using namespace rationd;
using namespace testing_support;
using io::Json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const std::string& name) { return fixture_path(name); }

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("rationd_cli_" + name);
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST(Cli, SolveIsDeterministicAndValid) {
  const auto a = run({"solve", "--instance", fx("basic_instance.json")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(run({"solve", "--instance", fx("basic_instance.json")}).out, a.out);
  const auto j = Json::parse(a.out);
  EXPECT_EQ(j["assignment"]["a"], "beta");
  EXPECT_EQ(j["assignment"]["b"], "gamma");
  EXPECT_EQ(j["assignment"]["c"], "alpha");
  EXPECT_TRUE(j["assignment"]["d"].is_null());
  const auto m = run({"solve", "--instance", fx("basic_instance.json"), "--perturbation", "rank-minmax"});
  EXPECT_EQ(m.code, 0);
}

TEST(Cli, SolveOutputPassesCheck) {
  const auto s = run({"solve", "--instance", fx("thresholds_instance.json")});
  ASSERT_EQ(s.code, 0);
  const auto path = write_temp("solved.json", s.out);
  const auto c = run({"check", "--instance", fx("thresholds_instance.json"), "--allocation", path});
  EXPECT_EQ(c.code, 0) << c.out;
  EXPECT_EQ(Json::parse(c.out)["fully_valid"], true);
}

TEST(Cli, EmptyCategory) {
  const auto r = run({"solve", "--instance", fx("empty_category_instance.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "{\n  \"assignment\": {\n    \"a\": null,\n    \"b\": null\n  }\n}\n");
}

TEST(Cli, CheckVerdicts) {
  const auto inst = fx("basic_instance.json");
  auto one = run({"check", "--instance", inst, "--allocation", fx("basic_allocation1.json")});
  EXPECT_EQ(one.code, 2);
  EXPECT_EQ(Json::parse(one.out)["PR"]["verdict"], "FAIL");
  auto four = run({"check", "--instance", inst, "--allocation", fx("basic_allocation4.json")});
  EXPECT_EQ(four.code, 2);
  EXPECT_EQ(Json::parse(four.out)["CS"]["verdict"], "FAIL");
  EXPECT_EQ(Json::parse(four.out)["valid"], true);
  auto three = run({"check", "--instance", inst, "--allocation", fx("basic_allocation3.json")});
  EXPECT_EQ(three.code, 0);
  auto z = run({"check", "--instance", fx("nonconvex_instance.json"), "--allocation", fx("nonconvex_z.json")});
  EXPECT_EQ(z.code, 2);
  EXPECT_EQ(Json::parse(z.out)["CS"]["verdict"], "NOT-APPLICABLE");
}

TEST(Cli, Audit) {
  const auto r = run({"audit", "--instance", fx("thresholds_instance.json"), "--allocation",
                      fx("thresholds_allocation.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["inner"], Json::parse(R"({"alpha":4,"beta":2,"gamma":4})"));
  EXPECT_EQ(j["outer"], Json::parse(R"({"alpha":5,"beta":4,"gamma":5})"));
  const auto o = run({"audit", "--instance", fx("basic_instance.json"), "--optimize", "inner-sum"});
  ASSERT_EQ(o.code, 0);
  EXPECT_TRUE(Json::parse(o.out).contains("thresholds"));
  const auto x = run({"audit", "--instance", fx("x3c_padded_instance.json"), "--optimize", "outer-maxmin"});
  EXPECT_EQ(x.code, 3);
}

TEST(Cli, AgentQueries) {
  const auto d = run({"agent", "--instance", fx("basic_instance.json"), "--id", "d", "--query", "serviceable"});
  ASSERT_EQ(d.code, 0);
  EXPECT_EQ(Json::parse(d.out)["verdict"], false);
  const auto a = run({"agent", "--instance", fx("x3c_instance.json"), "--id", "a", "--query", "serviceable"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(Json::parse(a.out)["witness"]["a"], "beta");
  const auto q = run({"agent", "--instance", fx("basic_instance.json"), "--id", "q", "--query", "unanimous"});
  EXPECT_EQ(q.code, 2);
  EXPECT_EQ(Json::parse(q.err)["error"], "UnknownAgent");
}

TEST(Cli, Prefs) {
  const auto r = run({"prefs", "--instance", fx("utility_not_maximal_instance.json"), "--utilities",
                      fx("utility_not_maximal_utilities.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["assignment"], Json::parse(R"({"a":"beta","b":"alpha"})"));
  const auto w = run({"prefs", "--instance", fx("utility_not_maximal_instance.json"), "--utilities",
                      fx("utility_not_maximal_utilities.json"), "--welfare", "nash"});
  EXPECT_EQ(w.out, r.out);
}

TEST(Cli, DecomposeAndEnumerate) {
  const auto z = run({"decompose", "--instance", fx("nonconvex_instance.json"), "--allocation",
                      fx("nonconvex_z.json")});
  EXPECT_EQ(z.code, 2);
  EXPECT_EQ(Json::parse(z.err)["error"], "NotValid");
  const auto x = run({"decompose", "--instance", fx("nonconvex_instance.json"), "--allocation",
                      fx("nonconvex_x.json")});
  ASSERT_EQ(x.code, 0);
  EXPECT_EQ(Json::parse(x.out)["components"].size(), 1u);
  const auto e = run({"enumerate", "--instance", fx("basic_instance.json")});
  ASSERT_EQ(e.code, 0);
  const auto j = Json::parse(e.out);
  EXPECT_EQ(j["valid"].size(), 2u);
  EXPECT_EQ(j["valid_cs"].size(), 1u);
  EXPECT_EQ(run({"enumerate", "--instance", fx("x3c_instance.json")}).code, 3);
}

TEST(Cli, SimulateIsReproducible) {
  auto cfg = io::read_json_file(fx("restricted_lp_two_category_config.json"));
  cfg["trials"] = 3;
  cfg["horizon"] = 20;
  const auto path = write_temp("sim.json", cfg.dump());
  const auto a = run({"simulate", "--config", path});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(run({"simulate", "--config", path}).out, a.out);
  const auto j = Json::parse(a.out);
  EXPECT_EQ(j["trials"].size(), 3u);
  EXPECT_EQ(j["trials"][0]["arrivals"].size(), 20u);
}

TEST(Cli, Scarf) {
  const auto r = run({"scarf", "--f-table", fx("f_table_rank_sum.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["some_instance_has_unstable_maximizer"], true);
  const auto bad = write_temp("f5.json", R"({"f":[["1","2"],["3","4"],["5","6"]]})");
  EXPECT_EQ(run({"scarf", "--f-table", bad}).code, 1);
}

TEST(Cli, UsageAndMalformedInput) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"solve"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
  const auto broken = write_temp("broken.json", "{ not json");
  const auto r = run({"solve", "--instance", broken});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(Json::parse(r.err)["error"], "ParseError");
  const auto dup = write_temp("dup.json", R"({"agents":["a","a"],"categories":[]})");
  EXPECT_EQ(run({"solve", "--instance", dup}).code, 1);
  EXPECT_EQ(run({"solve", "--instance", "/nonexistent.json"}).code, 1);
}
