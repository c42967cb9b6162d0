#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "rationd/decompose.hpp"
#include "rationd/online.hpp"
#include "rationd/oracle.hpp"
#include "rationd/selection.hpp"
#include "rationd/stable_matching.hpp"

namespace rationd::io {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void malformed(const std::string& where, const std::string& what) {
  fail(ErrorKind::ParseError, where + ": " + what);
}

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) malformed(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) malformed(where, std::string("missing field \"") + key + "\"");
  return *it;
}

inline std::string string_at(const Json& j, const std::string& where) {
  if (!j.is_string()) malformed(where, "expected a string");
  return j.get<std::string>();
}

inline std::int64_t int_at(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) malformed(where, "expected an integer");
  return j.get<std::int64_t>();
}

inline Rational rational_at(const Json& j, const std::string& where) {
  if (!j.is_string()) malformed(where, "expected a rational string such as \"1/2\"");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const Error& e) {
    malformed(where, e.what());
  }
}

inline std::vector<std::string> strings_at(const Json& j, const std::string& where) {
  if (!j.is_array()) malformed(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(string_at(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<Category> categories_at(const Json& j, const std::string& where) {
  if (!j.is_array()) malformed(where, "expected an array");
  std::vector<Category> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    Category c;
    c.name = string_at(field(j[i], "name", w), w + ".name");
    c.quota = int_at(field(j[i], "quota", w), w + ".quota");
    const auto& tiers = field(j[i], "tiers", w);
    if (!tiers.is_array()) malformed(w + ".tiers", "expected an array of arrays");
    for (std::size_t t = 0; t < tiers.size(); ++t)
      c.tiers.push_back(strings_at(tiers[t], w + ".tiers[" + std::to_string(t) + "]"));
    out.push_back(std::move(c));
  }
  return out;
}

inline Json categories_json(const Instance& instance) {
  Json cats = Json::array();
  for (const auto& c : instance.categories())
    cats.push_back({{"name", c.name}, {"quota", c.quota}, {"tiers", c.tiers}});
  return cats;
}

}  // namespace detail

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open \"" + path + "\"");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---- instances ----

inline Instance parse_instance(const Json& j) {
  auto agents = detail::strings_at(detail::field(j, "agents", "instance"), "instance.agents");
  auto cats = detail::categories_at(detail::field(j, "categories", "instance"),
                                    "instance.categories");
  try {
    return Instance(std::move(agents), std::move(cats));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidInstance) detail::malformed("instance", e.what());
    throw;
  }
}

inline Json to_json(const Instance& instance) {
  return {{"agents", instance.agents()}, {"categories", detail::categories_json(instance)}};
}

// ---- allocations ----

inline Json assignment_json(const Instance& instance, const IntegralAllocation& x) {
  Json a = Json::object();
  for (std::size_t i = 0; i < x.num_agents(); ++i)
    a[instance.agent(i)] =
        x.assigned(i) ? Json(instance.category(static_cast<std::size_t>(x.category_of[i])).name)
                      : Json(nullptr);
  return a;
}

inline Json to_json(const Instance& instance, const IntegralAllocation& x) {
  return {{"assignment", assignment_json(instance, x)}};
}

inline IntegralAllocation parse_assignment(const Instance& instance, const Json& a,
                                           const std::string& where) {
  if (!a.is_object()) detail::malformed(where, "expected an object");
  IntegralAllocation x(instance.num_agents());
  for (const auto& [agent, cat] : a.items()) {
    const auto idx = instance.agent_index(agent);
    if (cat.is_null()) continue;
    if (!cat.is_string()) detail::malformed(where + "." + agent, "expected a category or null");
    x.category_of[idx] = static_cast<int>(instance.category_index(cat.get<std::string>()));
  }
  return x;
}

inline IntegralAllocation parse_integral(const Instance& instance, const Json& j) {
  return parse_assignment(instance, detail::field(j, "assignment", "allocation"),
                          "allocation.assignment");
}

inline Json to_json(const Instance& instance, const FractionalAllocation& x) {
  Json entries = Json::array();
  for (std::size_t a = 0; a < x.num_agents(); ++a)
    for (std::size_t c = 0; c < x.num_categories(); ++c)
      if (x(a, c) != 0)
        entries.push_back({{"agent", instance.agent(a)},
                           {"category", instance.category(c).name},
                           {"value", to_string(x(a, c))}});
  return {{"entries", entries}};
}

// Reads [{"agent", "category", "value"}...] into a grid of optional values.
inline Grid<std::optional<Rational>> parse_pair_entries(const Instance& instance, const Json& list,
                                                        const std::string& where) {
  if (!list.is_array()) detail::malformed(where, "expected an array");
  Grid<std::optional<Rational>> g(instance.num_agents(), instance.num_categories());
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const auto a = instance.agent_index(detail::string_at(detail::field(list[i], "agent", w), w));
    const auto c =
        instance.category_index(detail::string_at(detail::field(list[i], "category", w), w));
    if (g(a, c)) detail::malformed(w, "duplicate entry");
    g(a, c) = detail::rational_at(detail::field(list[i], "value", w), w + ".value");
  }
  return g;
}

inline FractionalAllocation parse_fractional(const Instance& instance, const Json& j) {
  const auto g = parse_pair_entries(instance, detail::field(j, "entries", "allocation"),
                                    "allocation.entries");
  Grid<Rational> values(instance.num_agents(), instance.num_categories(), Rational(0));
  for (std::size_t a = 0; a < g.rows(); ++a)
    for (std::size_t c = 0; c < g.cols(); ++c)
      if (g(a, c)) values(a, c) = *g(a, c);
  return FractionalAllocation(std::move(values));
}

/// Either document form, as a fractional allocation.
inline FractionalAllocation parse_allocation(const Instance& instance, const Json& j) {
  if (j.is_object() && j.contains("assignment"))
    return FractionalAllocation::from_integral(parse_integral(instance, j),
                                               instance.num_categories());
  return parse_fractional(instance, j);
}

// ---- perturbations and utilities ----

inline Json to_json(const Instance& instance, const Perturbation& delta) {
  Json entries = Json::array();
  for (std::size_t a = 0; a < delta.num_agents(); ++a)
    for (std::size_t c = 0; c < delta.num_categories(); ++c)
      if (delta(a, c))
        entries.push_back({{"agent", instance.agent(a)},
                           {"category", instance.category(c).name},
                           {"value", to_string(*delta(a, c))}});
  return {{"entries", entries}};
}

inline Perturbation parse_perturbation(const Instance& instance, const Json& j) {
  const auto g = parse_pair_entries(instance, detail::field(j, "entries", "perturbation"),
                                    "perturbation.entries");
  Perturbation delta(instance.num_agents(), instance.num_categories());
  for (std::size_t a = 0; a < g.rows(); ++a)
    for (std::size_t c = 0; c < g.cols(); ++c) delta(a, c) = g(a, c);
  return delta;
}

inline UtilityProfile parse_utilities(const Instance& instance, const Json& j) {
  const auto g = parse_pair_entries(instance, detail::field(j, "utilities", "utilities"),
                                    "utilities.utilities");
  UtilityProfile u(instance.num_agents(), instance.num_categories());
  for (std::size_t a = 0; a < g.rows(); ++a)
    for (std::size_t c = 0; c < g.cols(); ++c) u(a, c) = g(a, c);
  return u;
}

inline Json to_json(const Instance& instance, const UtilityProfile& u) {
  Json entries = Json::array();
  for (std::size_t a = 0; a < u.num_agents(); ++a)
    for (std::size_t c = 0; c < u.num_categories(); ++c)
      if (u(a, c))
        entries.push_back({{"agent", instance.agent(a)},
                           {"category", instance.category(c).name},
                           {"value", to_string(*u(a, c))}});
  return {{"utilities", entries}};
}

// ---- reports ----

inline Json to_json(const Instance& instance, const ValidityReport& r) {
  auto pair = [&](const AgentCategory& p) {
    return Json{{"agent", instance.agent(p.agent)}, {"category", instance.category(p.category).name}};
  };
  Json qr = {{"verdict", to_string(r.qr)}};
  if (r.qr_category) qr["category"] = instance.category(*r.qr_category).name;
  Json er = {{"verdict", to_string(r.er)}};
  if (r.er_pair) er["witness"] = pair(*r.er_pair);
  Json pr = {{"verdict", to_string(r.pr)}};
  if (r.pr_witness)
    pr["witness"] = {{"higher", instance.agent(r.pr_witness->higher)},
                     {"category", instance.category(r.pr_witness->category).name},
                     {"lower", instance.agent(r.pr_witness->lower)}};
  Json pe = {{"verdict", to_string(r.pe)}, {"size", to_string(r.size)}, {"v_star", r.v_star}};
  Json cs = {{"verdict", to_string(r.cs)}};
  if (!r.cs_cycle.empty()) {
    Json cycle = Json::array();
    for (const auto& p : r.cs_cycle) cycle.push_back(pair(p));
    cs["cycle"] = cycle;
  }
  return {{"QR", qr}, {"ER", er}, {"PR", pr}, {"PE", pe}, {"CS", cs},
          {"valid", r.valid()}, {"fully_valid", r.fully_valid()}};
}

inline Json to_json(const Instance& instance, const Thresholds& t) {
  Json inner = Json::object(), outer = Json::object();
  for (std::size_t c = 0; c < instance.num_categories(); ++c) {
    inner[instance.category(c).name] = t.inner[c];
    outer[instance.category(c).name] = t.outer[c];
  }
  return {{"inner", inner}, {"outer", outer}};
}

inline Json to_json(const Instance& instance, const ConvexCombination& parts) {
  Json list = Json::array();
  for (const auto& [w, x] : parts)
    list.push_back({{"weight", to_string(w)}, {"assignment", assignment_json(instance, x)}});
  return {{"components", list}};
}

inline ConvexCombination parse_combination(const Instance& instance, const Json& j) {
  const auto& list = detail::field(j, "components", "combination");
  if (!list.is_array()) detail::malformed("combination.components", "expected an array");
  ConvexCombination out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string w = "combination.components[" + std::to_string(i) + "]";
    out.push_back({detail::rational_at(detail::field(list[i], "weight", w), w + ".weight"),
                   parse_assignment(instance, detail::field(list[i], "assignment", w),
                                    w + ".assignment")});
  }
  return out;
}

inline Json to_json(const Instance& instance, const EnumerationResult& r) {
  auto list = [&](const std::vector<IntegralAllocation>& xs) {
    Json out = Json::array();
    for (const auto& x : xs) out.push_back(assignment_json(instance, x));
    return out;
  };
  return {{"v_star", r.v_star},
          {"feasible", list(r.feasible)},
          {"valid", list(r.valid)},
          {"valid_cs", list(r.valid_cs)}};
}

inline Json to_json(const Instance& instance, const AgentQueryResult& r) {
  Json out = {{"verdict", r.verdict}};
  out["witness"] = r.witness ? assignment_json(instance, *r.witness) : Json(nullptr);
  return out;
}

// ---- online ----

struct SimulationConfig {
  OnlineInstance online;
  Policy policy = Policy::RestrictedLp;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
};

inline Policy parse_policy(const std::string& name) {
  if (name == "RESTRICTED_LP") return Policy::RestrictedLp;
  if (name == "HARD_PRIORITY") return Policy::HardPriority;
  detail::malformed("config.policy", "unknown policy \"" + name + "\"");
}

inline SimulationConfig parse_simulation_config(const Json& j) {
  const std::string where = "config";
  auto types = detail::strings_at(detail::field(j, "types", where), where + ".types");
  const auto& probs = detail::field(j, "probabilities", where);
  if (!probs.is_array()) detail::malformed(where + ".probabilities", "expected an array");
  std::vector<Rational> p;
  for (std::size_t i = 0; i < probs.size(); ++i)
    p.push_back(detail::rational_at(probs[i], where + ".probabilities[" + std::to_string(i) + "]"));
  auto cats = detail::categories_at(detail::field(j, "categories", where), where + ".categories");
  const auto horizon = detail::int_at(detail::field(j, "horizon", where), where + ".horizon");
  Instance inst;
  try {
    inst = Instance(std::move(types), std::move(cats));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidInstance) detail::malformed(where, e.what());
    throw;
  }
  SimulationConfig cfg;
  cfg.online = OnlineInstance(std::move(inst), std::move(p), horizon);
  cfg.policy = parse_policy(detail::string_at(detail::field(j, "policy", where), where + ".policy"));
  cfg.trials = detail::int_at(detail::field(j, "trials", where), where + ".trials");
  const auto& seed = detail::field(j, "seed", where);
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    detail::malformed(where + ".seed", "expected a nonnegative integer");
  if (seed.is_number_integer() && seed.get<std::int64_t>() < 0)
    detail::malformed(where + ".seed", "expected a nonnegative integer");
  cfg.seed = seed.get<std::uint64_t>();
  return cfg;
}

inline Json to_json(const SimulationConfig& cfg) {
  const auto& inst = cfg.online.types();
  Json probs = Json::array();
  for (const auto& p : cfg.online.probabilities()) probs.push_back(to_string(p));
  return {{"types", inst.agents()},
          {"probabilities", probs},
          {"categories", detail::categories_json(inst)},
          {"horizon", cfg.online.horizon()},
          {"policy", to_string(cfg.policy)},
          {"trials", cfg.trials},
          {"seed", cfg.seed}};
}

inline Json to_json(const LossSummary& s) {
  return {{"mean", to_string(s.mean)}, {"max", s.max}, {"standard_error", s.standard_error}};
}

inline Json to_json(const OnlineInstance& online, const SimulationResult& r) {
  const auto& inst = online.types();
  Json trials = Json::array();
  for (const auto& t : r.traces) {
    Json arrivals = Json::array(), decisions = Json::array(), values = Json::array();
    for (std::size_t i = 0; i < t.arrivals.size(); ++i) {
      arrivals.push_back(inst.agent(t.arrivals[i]));
      decisions.push_back(t.decisions[i] ? Json(inst.category(*t.decisions[i]).name)
                                         : Json(nullptr));
      const auto& d = t.diagnostics[i];
      values.push_back(d.lp_value ? Json(to_string(*d.lp_value)) : Json(nullptr));
    }
    trials.push_back({{"arrivals", arrivals},
                      {"decisions", decisions},
                      {"interim_lp_values", values},
                      {"delta_e", t.losses.efficiency},
                      {"delta_p", t.losses.priority}});
  }
  return {{"trials", trials},
          {"summary",
           {{"delta_e", to_json(r.summary.efficiency)},
            {"delta_p", to_json(r.summary.priority)},
            {"total", to_json(r.summary.total)}}}};
}

// ---- local perturbation tables ----

inline Grid<Rational> parse_f_table(const Json& j) {
  const auto& rows = detail::field(j, "f", "f_table");
  if (!rows.is_array()) detail::malformed("f_table.f", "expected an array of rows");
  const std::size_t n = rows.size();
  Grid<Rational> g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string w = "f_table.f[" + std::to_string(i) + "]";
    if (!rows[i].is_array()) detail::malformed(w, "expected an array");
    if (rows[i].size() != n) fail(ErrorKind::WrongDimension, w + ": table must be square");
    for (std::size_t k = 0; k < n; ++k)
      g(i, k) = detail::rational_at(rows[i][k], w + "[" + std::to_string(k) + "]");
  }
  return g;
}

inline Json to_json(const Grid<Rational>& f) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < f.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < f.cols(); ++k) row.push_back(to_string(f(i, k)));
    rows.push_back(row);
  }
  return {{"f", rows}};
}

inline Json to_json(const LocalPerturbationReport& r) {
  Json cases = Json::array();
  for (const auto& c : r.cases) {
    const auto sm = local_perturbation_fixture(c.fixture);
    auto matching = [&](const PerfectMatching& m) {
      Json pairs = Json::array();
      for (std::size_t man = 0; man < m.size(); ++man)
        pairs.push_back({sm.women[m[man]], sm.men[man]});
      return pairs;
    };
    cases.push_back({{"instance", c.fixture},
                     {"best_value", to_string(c.best_value)},
                     {"maximizers", c.maximizers.size()},
                     {"all_maximizers_stable", c.all_maximizers_stable},
                     {"unstable_maximizer",
                      c.unstable_maximizer ? matching(*c.unstable_maximizer) : Json(nullptr)},
                     {"requirement", c.fixture == 1 ? "F(2,5) > F(2,4)" : "F(2,4) > F(2,5)"},
                     {"requirement_holds", c.requirement_holds}});
  }
  return {{"sign_f25_minus_f24", r.sign},
          {"tie", r.sign == 0},
          {"instances", cases},
          {"some_instance_has_unstable_maximizer", r.some_instance_has_unstable_maximizer()}};
}

}  // namespace rationd::io
