#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "rationd/perturbation.hpp"

namespace rationd {

/// Online model: agents arrive one per round with i.i.d. types. Eligibility
/// and priority tiers are over types, so the type list plays the role of the
/// agent list of an ordinary instance.
class OnlineInstance {
 public:
  OnlineInstance() = default;
  OnlineInstance(Instance types, std::vector<Rational> probabilities, std::int64_t horizon)
      : types_(std::move(types)), p_(std::move(probabilities)), horizon_(horizon) {
    if (p_.size() != types_.num_agents())
      fail(ErrorKind::InvalidProbabilityVector, "one probability per type is required");
    Rational total = 0;
    for (const auto& p : p_) {
      if (p <= 0) fail(ErrorKind::InvalidProbabilityVector, "probabilities must be positive");
      total += p;
    }
    if (total != 1) fail(ErrorKind::InvalidProbabilityVector, "probabilities must sum to 1");
    if (horizon_ < 0) fail(ErrorKind::InvalidArgument, "horizon must be nonnegative");
  }

  const Instance& types() const noexcept { return types_; }
  std::size_t num_types() const noexcept { return types_.num_agents(); }
  std::size_t num_categories() const noexcept { return types_.num_categories(); }
  const std::vector<Rational>& probabilities() const noexcept { return p_; }
  const Rational& probability(std::size_t theta) const { return p_[theta]; }
  Rational p_min() const { return *std::min_element(p_.begin(), p_.end()); }
  std::int64_t horizon() const noexcept { return horizon_; }

 private:
  Instance types_;
  std::vector<Rational> p_;
  std::int64_t horizon_ = 0;
};

enum class Policy { RestrictedLp, HardPriority };

inline std::string_view to_string(Policy p) {
  return p == Policy::RestrictedLp ? "RESTRICTED_LP" : "HARD_PRIORITY";
}

/// State at the start of round t (1-based).
struct SimulationState {
  std::int64_t t = 1;
  std::vector<std::int64_t> remaining;  // q_c[t]
  Grid<unsigned char> allowed;  // (type, category): type in E_c[t]
  std::vector<std::optional<std::size_t>> decisions;
  std::vector<std::size_t> arrivals;

  static SimulationState initial(const OnlineInstance& online) {
    const auto& inst = online.types();
    SimulationState s;
    s.remaining.resize(inst.num_categories());
    s.allowed = Grid<unsigned char>(inst.num_agents(), inst.num_categories(), 0);
    for (std::size_t c = 0; c < inst.num_categories(); ++c) {
      s.remaining[c] = inst.quota(c);
      for (std::size_t theta : inst.eligible_agents(c)) s.allowed(theta, c) = 1;
    }
    return s;
  }
};

struct InterimSolution {
  Grid<Rational> x;             // (type, category)
  std::vector<Rational> bottom; // unallocated mass per type
  Rational value;               // sum x (1 - delta)
};

/// Type-level rank-sum perturbation used by the online policy.
inline Perturbation online_perturbation(const OnlineInstance& online) {
  return make_perturbation(online.types(), PerturbationScheme::RankSum);
}

/// Interim LP for round state.t with the current arrival of type `arriving`:
/// supplies 1(theta = arriving) + (T - t) p_theta, capacities q_c[t], and
/// arcs only for types still in E_c[t].
inline InterimSolution interim_lp(const OnlineInstance& online, const SimulationState& state,
                                  std::size_t arriving, const Perturbation& delta) {
  const auto& inst = online.types();
  const std::size_t nt = inst.num_agents();
  const std::size_t nc = inst.num_categories();
  MatchingProblem p;
  const Rational future(online.horizon() - state.t);
  for (std::size_t theta = 0; theta < nt; ++theta)
    p.supplies.push_back(Rational(theta == arriving ? 1 : 0) + future * online.probability(theta));
  for (std::size_t c = 0; c < nc; ++c) p.capacities.emplace_back(state.remaining[c]);
  Integer scale = 1;
  for (std::size_t theta = 0; theta < nt; ++theta)
    for (std::size_t c = 0; c < nc; ++c)
      if (state.allowed(theta, c)) scale = lcm(scale, delta(theta, c)->get_den());
  for (std::size_t theta = 0; theta < nt; ++theta)
    for (std::size_t c = 0; c < nc; ++c)
      if (state.allowed(theta, c))
        p.edges.push_back({theta, c, Rational((1 - *delta(theta, c)) * Rational(scale)).get_num()});
  p.scale = scale;
  const auto sol = solve_transportation(p);
  InterimSolution out{Grid<Rational>(nt, nc, Rational(0)), p.supplies, sol.objective};
  for (std::size_t e = 0; e < p.edges.size(); ++e) {
    out.x(p.edges[e].left, p.edges[e].right) = sol.flow[e];
    out.bottom[p.edges[e].left] -= sol.flow[e];
  }
  return out;
}

struct StepDiagnostics {
  std::optional<Rational> lp_value;  // absent for the hard-priority policy
  std::optional<std::size_t> choice;
};

namespace detail {

// Removes every type strictly below `theta` from each category that ranks
// it. The rejected type itself stays eligible: serving a later arrival of
// the same type is no priority violation, and dropping it strands quota.
inline void restrict_below(const Instance& inst, SimulationState& state, std::size_t theta) {
  for (std::size_t c = 0; c < inst.num_categories(); ++c) {
    const int r = inst.rank(c, theta);
    if (r == 0) continue;
    for (std::size_t other : inst.eligible_agents(c))
      if (inst.rank(c, other) > r)
        state.allowed(other, c) = 0;
  }
}

inline void apply(SimulationState& state, std::size_t theta,
                  std::optional<std::size_t> decision) {
  if (decision) {
    if (state.remaining[*decision] <= 0)
      fail(ErrorKind::QuotaUnderflow, "allocation from an exhausted category");
    --state.remaining[*decision];
  }
  state.arrivals.push_back(theta);
  state.decisions.push_back(decision);
  ++state.t;
}

}  // namespace detail

/// One round of the restricted interim-LP policy. Ties in the argmax prefer
/// a category over rejection, then more remaining quota, then input order.
inline StepDiagnostics policy_step(const OnlineInstance& online, SimulationState& state,
                                   std::size_t theta, const Perturbation& delta) {
  if (state.t > online.horizon()) fail(ErrorKind::InvalidArgument, "horizon already reached");
  const auto lp = interim_lp(online, state, theta, delta);
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < online.num_categories(); ++c) {
    const auto& v = lp.x(theta, c);
    if (!(v > 0)) continue;
    if (!best || v > lp.x(theta, *best) ||
        (v == lp.x(theta, *best) && state.remaining[c] > state.remaining[*best]))
      best = c;
  }
  if (best && lp.x(theta, *best) < lp.bottom[theta]) best.reset();
  if (!best) detail::restrict_below(online.types(), state, theta);
  detail::apply(state, theta, best);
  return {lp.value, best};
}

/// Baseline that never risks a priority violation: serve a top-tier type
/// whenever quota remains, serve lower types only once the remaining quota
/// covers every remaining arrival, and after rejecting a type never serve
/// anything ranked below it.
inline StepDiagnostics hard_priority_step(const OnlineInstance& online, SimulationState& state,
                                          std::size_t theta) {
  if (state.t > online.horizon()) fail(ErrorKind::InvalidArgument, "horizon already reached");
  const auto& inst = online.types();
  const std::int64_t after = online.horizon() - state.t;
  std::optional<std::size_t> choice;
  for (std::size_t c = 0; c < inst.num_categories() && !choice; ++c) {
    if (!state.allowed(theta, c) || state.remaining[c] <= 0) continue;
    if (inst.rank(c, theta) == 1 || state.remaining[c] - 1 >= after) choice = c;
  }
  if (!choice) detail::restrict_below(inst, state, theta);
  detail::apply(state, theta, choice);
  return {std::nullopt, choice};
}

struct Losses {
  std::int64_t efficiency = 0;  // Delta_e
  std::int64_t priority = 0;    // Delta_p
  friend bool operator==(const Losses&, const Losses&) = default;
};

/// Offline maximum number of servable arrivals given realized type counts.
inline std::int64_t offline_max(const OnlineInstance& online,
                                const std::vector<std::size_t>& arrivals) {
  const auto& inst = online.types();
  MatchingProblem p;
  p.supplies.assign(inst.num_agents(), Rational(0));
  for (std::size_t theta : arrivals) p.supplies.at(theta) += 1;
  for (std::size_t c = 0; c < inst.num_categories(); ++c) p.capacities.emplace_back(inst.quota(c));
  for (std::size_t theta = 0; theta < inst.num_agents(); ++theta)
    for (std::size_t c = 0; c < inst.num_categories(); ++c)
      if (inst.eligible(c, theta)) p.edges.push_back({theta, c, Integer(1)});
  return max_size(p);
}

inline Losses hindsight_losses(const OnlineInstance& online,
                               const std::vector<std::size_t>& arrivals,
                               const std::vector<std::optional<std::size_t>>& decisions) {
  if (arrivals.size() != decisions.size() ||
      static_cast<std::int64_t>(arrivals.size()) != online.horizon())
    fail(ErrorKind::LengthMismatch, "arrivals and decisions must both have length T");
  const auto& inst = online.types();
  const std::size_t nc = inst.num_categories();
  Losses out;
  std::int64_t served = 0;
  // Worst rank each category served; 0 when it served nobody.
  std::vector<int> worst(nc, 0);
  for (std::size_t t = 0; t < arrivals.size(); ++t) {
    if (!decisions[t]) continue;
    ++served;
    const std::size_t c = *decisions[t];
    worst[c] = std::max(worst[c], inst.rank(c, arrivals[t]));
  }
  out.efficiency = offline_max(online, arrivals) - served;
  for (std::size_t t = 0; t < arrivals.size(); ++t) {
    if (decisions[t]) continue;
    for (std::size_t c = 0; c < nc; ++c) {
      const int r = inst.rank(c, arrivals[t]);
      if (r != 0 && worst[c] > r) {
        ++out.priority;
        break;
      }
    }
  }
  return out;
}

struct SimulationTrace {
  std::vector<std::size_t> arrivals;
  std::vector<std::optional<std::size_t>> decisions;
  std::vector<StepDiagnostics> diagnostics;
  Losses losses;
};

struct LossSummary {
  Rational mean;
  std::int64_t max = 0;
  double standard_error = 0;
};

struct SimulationSummary {
  LossSummary efficiency;
  LossSummary priority;
  LossSummary total;
};

struct SimulationResult {
  std::vector<SimulationTrace> traces;
  SimulationSummary summary;
};

/// Arrival sampler: mt19937_64 seeded from (master seed, trial index),
/// drawing uniform integers over the common denominator of p.
class ArrivalSampler {
 public:
  ArrivalSampler(const OnlineInstance& online, std::uint64_t master_seed, std::uint64_t trial) {
    Integer den = 1;
    for (const auto& p : online.probabilities()) den = lcm(den, p.get_den());
    if (!den.fits_ulong_p() || den > Integer(std::numeric_limits<std::uint64_t>::max()))
      fail(ErrorKind::InvalidProbabilityVector, "probability denominators are too large");
    std::uint64_t acc = 0;
    for (const auto& p : online.probabilities()) {
      acc += Rational(p * Rational(den)).get_num().get_ui();
      cumulative_.push_back(acc);
    }
    dist_ = std::uniform_int_distribution<std::uint64_t>(0, den.get_ui() - 1);
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(trial),
                      static_cast<std::uint32_t>(trial >> 32)};
    engine_.seed(seq);
  }

  std::size_t next() {
    const std::uint64_t u = dist_(engine_);
    return static_cast<std::size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
  }

 private:
  std::vector<std::uint64_t> cumulative_;
  std::uniform_int_distribution<std::uint64_t> dist_;
  std::mt19937_64 engine_;
};

/// Runs one trial on a given arrival sequence.
inline SimulationTrace run_trial(const OnlineInstance& online, Policy policy,
                                 const std::vector<std::size_t>& arrivals) {
  if (static_cast<std::int64_t>(arrivals.size()) != online.horizon())
    fail(ErrorKind::LengthMismatch, "arrival sequence must have length T");
  SimulationTrace trace;
  auto state = SimulationState::initial(online);
  std::optional<Perturbation> delta;
  if (policy == Policy::RestrictedLp && online.types().num_eligible_pairs() > 0)
    delta = online_perturbation(online);
  for (std::size_t theta : arrivals) {
    if (theta >= online.num_types()) fail(ErrorKind::InvalidArgument, "unknown type index");
    if (policy == Policy::RestrictedLp && delta)
      trace.diagnostics.push_back(policy_step(online, state, theta, *delta));
    else if (policy == Policy::RestrictedLp) {
      detail::restrict_below(online.types(), state, theta);
      detail::apply(state, theta, std::nullopt);
      trace.diagnostics.push_back({Rational(0), std::nullopt});
    } else
      trace.diagnostics.push_back(hard_priority_step(online, state, theta));
  }
  trace.arrivals = state.arrivals;
  trace.decisions = state.decisions;
  trace.losses = hindsight_losses(online, trace.arrivals, trace.decisions);
  return trace;
}

inline LossSummary summarize(const std::vector<std::int64_t>& values) {
  LossSummary s;
  if (values.empty()) return s;
  Integer total = 0;
  for (auto v : values) {
    total += Integer(static_cast<long>(v));
    s.max = std::max(s.max, v);
  }
  const auto n = static_cast<long>(values.size());
  s.mean = Rational(total, Integer(n));
  s.mean.canonicalize();
  if (values.size() > 1) {
    const double mean = s.mean.get_d();
    double ss = 0;
    for (auto v : values) ss += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
    const double var = ss / static_cast<double>(n - 1);
    s.standard_error = std::sqrt(var / static_cast<double>(n));
  }
  return s;
}

inline SimulationResult run_simulation(const OnlineInstance& online, Policy policy,
                                       std::int64_t trials, std::uint64_t master_seed) {
  if (trials < 1) fail(ErrorKind::InvalidArgument, "trials must be at least 1");
  SimulationResult out;
  std::vector<std::int64_t> e, p, sum;
  for (std::int64_t k = 0; k < trials; ++k) {
    ArrivalSampler sampler(online, master_seed, static_cast<std::uint64_t>(k));
    std::vector<std::size_t> arrivals;
    for (std::int64_t t = 0; t < online.horizon(); ++t) arrivals.push_back(sampler.next());
    auto trace = run_trial(online, policy, arrivals);
    e.push_back(trace.losses.efficiency);
    p.push_back(trace.losses.priority);
    sum.push_back(trace.losses.efficiency + trace.losses.priority);
    out.traces.push_back(std::move(trace));
  }
  out.summary = {summarize(e), summarize(p), summarize(sum)};
  return out;
}

}  // namespace rationd
