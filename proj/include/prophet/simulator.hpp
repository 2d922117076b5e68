#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "prophet/errors.hpp"
#include "prophet/instance.hpp"
#include "prophet/policy.hpp"
#include "prophet/stats.hpp"

namespace prophet {

struct Goal {
  enum class Kind { BestChoice, TopK };
  Kind kind = Kind::BestChoice;
  std::size_t k = 1;

  static Goal best_choice() { return Goal{}; }
  static Goal top_k(std::size_t k) {
    if (k == 0) throw std::invalid_argument("top_k goal: k must be >= 1");
    return Goal{Kind::TopK, k};
  }
  // rank 1 = maximum
  bool success_for_rank(std::size_t rank) const {
    return kind == Kind::BestChoice ? rank == 1 : rank <= k;
  }
};

struct TrialOutcome {
  std::optional<std::size_t> accepted_step;      // 1-based arrival position
  std::optional<std::size_t> accepted_identity;  // distribution index
  std::optional<double> accepted_value;
  std::optional<std::size_t> rank;  // 1 = maximum (ties broken by aux)
  bool success = false;
};

struct McEstimate {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double confidence = 0.99;

  double std_error() const {
    return trials ? std::sqrt(std::max(point * (1.0 - point), 1e-12 / double(trials)) /
                              double(trials))
                  : 0.0;
  }
};

namespace detail {

struct TrialWorkspace {
  std::vector<double> values;
  std::vector<double> aux;
  std::vector<std::size_t> arrival;
};

// RNG consumption order per trial is fixed: per-index (value, aux) pairs,
// then the arrival shuffle, then whatever the policy draws while streaming.
inline TrialOutcome run_trial_ws(const Instance& inst, Policy& policy, const Goal& goal,
                                 Rng& rng, TrialWorkspace& ws) {
  const std::size_t n = inst.size();
  ws.values.resize(n);
  ws.aux.resize(n);
  ws.arrival.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ws.values[i] = inst.distributions[i].sample(rng);
    ws.aux[i] = rng.uniform();
  }
  if (inst.order.kind == OrderModel::Kind::AdversarialFixed) {
    std::copy(inst.order.arrival.begin(), inst.order.arrival.end(), ws.arrival.begin());
  } else {
    std::iota(ws.arrival.begin(), ws.arrival.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = rng.below(i);
      std::swap(ws.arrival[i - 1], ws.arrival[j]);
    }
  }

  policy.reset();
  TrialOutcome out;
  for (std::size_t t = 1; t <= n; ++t) {
    const std::size_t id = ws.arrival[t - 1];
    const Observation obs{ws.values[id], ws.aux[id]};
    const std::size_t reported = inst.identities_observable ? id : no_identity;
    if (policy.decide(t, obs, reported, rng)) {
      out.accepted_step = t;
      out.accepted_identity = id;
      out.accepted_value = obs.value;
      std::size_t greater = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const Observation other{ws.values[i], ws.aux[i]};
        if (other > obs) ++greater;
      }
      out.rank = greater + 1;
      out.success = goal.success_for_rank(*out.rank);
      break;
    }
  }
  return out;
}

inline unsigned resolve_threads(unsigned requested) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return requested == 0 ? hw : requested;
}

}  // namespace detail

inline TrialOutcome run_trial(const Instance& inst, Policy& policy, const Goal& goal, Rng& rng) {
  detail::TrialWorkspace ws;
  return detail::run_trial_ws(inst, policy, goal, rng, ws);
}

// Monte Carlo success estimate with a Wilson interval.  Trial t uses the
// seed derive_seed(master_seed, t), so the aggregate is a pure fold over
// per-trial outcomes and is bitwise identical for any worker count.
inline McEstimate estimate(const Instance& inst, const Policy& policy, const Goal& goal,
                           std::uint64_t trials, std::uint64_t master_seed,
                           double confidence = 0.99, unsigned threads = 0) {
  if (trials == 0) throw std::invalid_argument("estimate: trials must be >= 1");
  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(detail::resolve_threads(threads), trials));

  auto run_range = [&](std::uint64_t begin, std::uint64_t end) -> std::uint64_t {
    auto local_policy = policy.clone();
    detail::TrialWorkspace ws;
    Rng rng;
    std::uint64_t successes = 0;
    for (std::uint64_t t = begin; t < end; ++t) {
      rng.reseed(derive_seed(master_seed, t));
      successes += detail::run_trial_ws(inst, *local_policy, goal, rng, ws).success ? 1 : 0;
    }
    return successes;
  };

  std::uint64_t successes = 0;
  if (workers <= 1) {
    successes = run_range(0, trials);
  } else {
    std::vector<std::uint64_t> partial(workers, 0);
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = std::min<std::uint64_t>(w * chunk, trials);
      const std::uint64_t end = std::min<std::uint64_t>(begin + chunk, trials);
      pool.emplace_back([&, w, begin, end] { partial[w] = run_range(begin, end); });
    }
    for (auto& th : pool) th.join();
    for (std::uint64_t s : partial) successes += s;
  }

  McEstimate est;
  est.trials = trials;
  est.successes = successes;
  est.point = double(successes) / double(trials);
  est.confidence = confidence;
  auto ci = wilson_interval(successes, trials, confidence);
  est.ci_low = ci.low;
  est.ci_high = ci.high;
  return est;
}

// Exact success probability for small discrete instances by enumerating all
// value combinations and (for random order) all n! arrival orders.  Rank
// ties among equal values are integrated out analytically: the accepted
// value is a uniformly random member of its tie class, so with a values
// strictly greater and tie class size m the success contribution is
// [a == 0]/m for best-choice and clamp(k - a, 0, m)/m for top-k.
//
// Only value-deterministic policies are supported: decisions must not
// depend on the tie-break aux at enumerated atoms nor consume randomness
// (both are detected and rejected).
inline double exact_success_small(const Instance& inst, const Policy& policy, const Goal& goal,
                                  std::uint64_t work_bound = 10'000'000) {
  const std::size_t n = inst.size();
  std::vector<std::vector<std::pair<double, double>>> atoms(n);  // (value, prob)
  for (std::size_t i = 0; i < n; ++i) {
    const auto* two = std::get_if<TwoPointSpec>(&inst.distributions[i].node());
    const auto* disc = std::get_if<DiscreteSpec>(&inst.distributions[i].node());
    if (two) {
      if (two->prob < 1.0) atoms[i].emplace_back(0.0, 1.0 - two->prob);
      if (two->prob > 0.0) atoms[i].emplace_back(two->value, two->prob);
    } else if (disc) {
      for (std::size_t a = 0; a < disc->values.size(); ++a)
        if (disc->probs[a] > 0.0) atoms[i].emplace_back(disc->values[a], disc->probs[a]);
    } else {
      throw std::invalid_argument("exact_success_small: every law must be two-point or discrete");
    }
  }

  std::uint64_t combos = 1;
  std::uint64_t order_count = 1;
  for (const auto& a : atoms) {
    if (combos > work_bound / std::max<std::size_t>(a.size(), 1))
      throw TooLargeError("exact_success_small: outcome space too large");
    combos *= a.size();
  }
  if (inst.order.kind == OrderModel::Kind::UniformRandom) {
    for (std::size_t i = 2; i <= n; ++i) {
      if (order_count > work_bound / i)
        throw TooLargeError("exact_success_small: order space too large");
      order_count *= i;
    }
  }
  if (combos > work_bound / order_count)
    throw TooLargeError("exact_success_small: enumeration bound exceeded");

  std::vector<std::size_t> pick(n, 0);
  std::vector<double> values(n);
  std::vector<std::size_t> arrival(n);
  Rng dead_rng(0);

  auto policy_accept_step = [&](const std::vector<std::size_t>& order) -> std::size_t {
    // Probe aux sensitivity with cloned state, then commit with aux = 0.5.
    auto live = policy.clone();
    live->reset();
    for (std::size_t t = 1; t <= n; ++t) {
      const std::size_t id = order[t - 1];
      const std::size_t reported = inst.identities_observable ? id : no_identity;
      auto probe_lo = live->clone();
      auto probe_hi = live->clone();
      const std::uint64_t draws_before = dead_rng.draws();
      bool d_lo = probe_lo->decide(t, Observation{values[id], 0.0}, reported, dead_rng);
      bool d_hi = probe_hi->decide(t, Observation{values[id], 0.9999999}, reported, dead_rng);
      if (dead_rng.draws() != draws_before)
        throw std::invalid_argument("exact_success_small: randomized policies unsupported");
      if (d_lo != d_hi)
        throw std::invalid_argument(
            "exact_success_small: policy depends on tie-break aux at an enumerated atom");
      if (live->decide(t, Observation{values[id], 0.5}, reported, dead_rng)) return t;
    }
    return 0;
  };

  auto success_given_accept = [&](std::size_t accepted_id) -> double {
    const double v = values[accepted_id];
    std::size_t greater = 0, ties = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (values[i] > v) ++greater;
      if (values[i] == v) ++ties;  // includes the accepted one
    }
    if (goal.kind == Goal::Kind::BestChoice) return greater == 0 ? 1.0 / double(ties) : 0.0;
    if (greater >= goal.k) return 0.0;
    const std::size_t room = goal.k - greater;
    return double(std::min(room, ties)) / double(ties);
  };

  double total = 0.0;
  for (std::uint64_t c = 0; c < combos; ++c) {
    double weight = 1.0;
    {
      std::uint64_t rest = c;
      for (std::size_t i = 0; i < n; ++i) {
        pick[i] = rest % atoms[i].size();
        rest /= atoms[i].size();
        values[i] = atoms[i][pick[i]].first;
        weight *= atoms[i][pick[i]].second;
      }
    }
    if (weight == 0.0) continue;

    double success_over_orders = 0.0;
    if (inst.order.kind == OrderModel::Kind::AdversarialFixed) {
      arrival = inst.order.arrival;
      std::size_t t = policy_accept_step(arrival);
      if (t > 0) success_over_orders = success_given_accept(arrival[t - 1]);
    } else {
      std::iota(arrival.begin(), arrival.end(), std::size_t{0});
      do {
        std::size_t t = policy_accept_step(arrival);
        if (t > 0) success_over_orders += success_given_accept(arrival[t - 1]);
      } while (std::next_permutation(arrival.begin(), arrival.end()));
      success_over_orders /= double(order_count);
    }
    total += weight * success_over_orders;
  }
  return total;
}

}  // namespace prophet
