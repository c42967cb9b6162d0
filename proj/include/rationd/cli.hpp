#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rationd/io.hpp"

namespace rationd {

enum ExitCode { kOk = 0, kMalformed = 1, kDomainError = 2, kBudgetExceeded = 3 };

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidInstance:
    case ErrorKind::InvalidAllocation:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::WrongDimension:
    case ErrorKind::MalformedChoiceOrder:
      return kMalformed;
    case ErrorKind::BudgetExceeded:
      return kBudgetExceeded;
    default:
      return kDomainError;
  }
}

namespace detail {

inline void write_error(std::ostream& err, std::string_view kind, const std::string& message) {
  err << io::Json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace detail

/// Runs one command. args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Priority-respecting reserve allocation"};
  app.require_subcommand(1);
  std::string instance_path, allocation_path, utilities_path, config_path, table_path;
  std::string perturbation = "rank-sum", optimize, agent_id, query, welfare_name;

  auto* solve = app.add_subcommand("solve", "valid allocation by one perturbed solve");
  solve->add_option("--instance", instance_path)->required();
  solve->add_option("--perturbation", perturbation)
      ->check(CLI::IsMember({"rank-sum", "rank-minmax"}));

  auto* check = app.add_subcommand("check", "validity report; exit 0 iff fully valid");
  check->add_option("--instance", instance_path)->required();
  check->add_option("--allocation", allocation_path)->required();

  auto* audit = app.add_subcommand("audit", "threshold report or threshold optimization");
  audit->add_option("--instance", instance_path)->required();
  auto* audit_alloc = audit->add_option("--allocation", allocation_path);
  audit->add_option("--optimize", optimize)
      ->check(CLI::IsMember({"inner-sum", "inner-minmax", "outer-maxmin", "outer-sum"}))
      ->excludes(audit_alloc);

  auto* agent = app.add_subcommand("agent", "unanimity or serviceability of one agent");
  agent->add_option("--instance", instance_path)->required();
  agent->add_option("--id", agent_id)->required();
  agent->add_option("--query", query)
      ->required()
      ->check(CLI::IsMember({"unanimous", "serviceable"}));

  auto* prefs = app.add_subcommand("prefs", "selection among valid allocations by utilities");
  prefs->add_option("--instance", instance_path)->required();
  prefs->add_option("--utilities", utilities_path)->required();
  prefs->add_option("--welfare", welfare_name)->check(CLI::IsMember({"sum", "nash", "min"}));

  auto* decomp = app.add_subcommand("decompose", "split a valid fractional allocation");
  decomp->add_option("--instance", instance_path)->required();
  decomp->add_option("--allocation", allocation_path)->required();

  auto* enumerate = app.add_subcommand("enumerate", "all feasible, valid and CS allocations");
  enumerate->add_option("--instance", instance_path)->required();

  auto* simulate = app.add_subcommand("simulate", "online arrivals");
  simulate->add_option("--config", config_path)->required();

  auto* scarf = app.add_subcommand("scarf", "local perturbation check on the 6x6 fixtures");
  scarf->add_option("--f-table", table_path)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    detail::write_error(err, "UsageError", e.what());
    return kMalformed;
  }

  try {
    auto load_instance = [&] { return io::parse_instance(io::read_json_file(instance_path)); };

    if (solve->parsed()) {
      const auto inst = load_instance();
      const auto x = inst.num_eligible_pairs() == 0
                         ? IntegralAllocation(inst.num_agents())
                         : solve_valid(inst, perturbation == "rank-sum"
                                                 ? PerturbationScheme::RankSum
                                                 : PerturbationScheme::RankMinMax);
      out << io::dump(io::to_json(inst, x));
      return kOk;
    }
    if (check->parsed()) {
      const auto inst = load_instance();
      const auto x = io::parse_allocation(inst, io::read_json_file(allocation_path));
      const auto report = validate(inst, x, max_size(inst));
      out << io::dump(io::to_json(inst, report));
      return report.fully_valid() ? kOk : kDomainError;
    }
    if (audit->parsed()) {
      const auto inst = load_instance();
      if (optimize.empty()) {
        if (allocation_path.empty())
          fail(ErrorKind::ParseError, "audit needs --allocation or --optimize");
        const auto x = io::parse_integral(inst, io::read_json_file(allocation_path));
        out << io::dump(io::to_json(inst, thresholds(inst, x)));
        return kOk;
      }
      IntegralAllocation x;
      if (optimize == "inner-sum") x = optimize_inner(inst, InnerMode::Sum);
      else if (optimize == "inner-minmax") x = optimize_inner(inst, InnerMode::MinMax);
      else x = optimize_outer(inst, optimize == "outer-sum" ? OuterMode::Sum : OuterMode::MaxMin)
                   .allocation;
      auto doc = io::to_json(inst, x);
      doc["thresholds"] = io::to_json(inst, thresholds(inst, x));
      out << io::dump(doc);
      return kOk;
    }
    if (agent->parsed()) {
      const auto inst = load_instance();
      const auto a = inst.agent_index(agent_id);
      const auto r = query == "unanimous" ? is_unanimous(inst, a) : is_serviceable(inst, a);
      out << io::dump(io::to_json(inst, r));
      return kOk;
    }
    if (prefs->parsed()) {
      const auto inst = load_instance();
      const auto u = io::parse_utilities(inst, io::read_json_file(utilities_path));
      IntegralAllocation x;
      if (welfare_name.empty()) {
        x = allocate_with_preferences(inst, u);
      } else {
        const std::map<std::string, Welfare> kinds{
            {"sum", Welfare::Sum}, {"nash", Welfare::Nash}, {"min", Welfare::Min}};
        x = brute_force_welfare(inst, u, kinds.at(welfare_name));
      }
      out << io::dump(io::to_json(inst, x));
      return kOk;
    }
    if (decomp->parsed()) {
      const auto inst = load_instance();
      const auto x = io::parse_allocation(inst, io::read_json_file(allocation_path));
      out << io::dump(io::to_json(inst, decompose(inst, x, max_size(inst))));
      return kOk;
    }
    if (enumerate->parsed()) {
      const auto inst = load_instance();
      out << io::dump(io::to_json(inst, enumerate_all(inst)));
      return kOk;
    }
    if (simulate->parsed()) {
      const auto cfg = io::parse_simulation_config(io::read_json_file(config_path));
      const auto result = run_simulation(cfg.online, cfg.policy, cfg.trials, cfg.seed);
      out << io::dump(io::to_json(cfg.online, result));
      return kOk;
    }
    if (scarf->parsed()) {
      const auto table = io::parse_f_table(io::read_json_file(table_path));
      out << io::dump(io::to_json(check_local_perturbation(table)));
      return kOk;
    }
  } catch (const Error& e) {
    detail::write_error(err, to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const io::Json::exception& e) {
    detail::write_error(err, "ParseError", e.what());
    return kMalformed;
  }
  return kMalformed;
}

}  // namespace rationd
