#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "prophet/errors.hpp"
#include "prophet/instance.hpp"
#include "prophet/optimal_stopping.hpp"
#include "prophet/policy.hpp"
#include "prophet/simulator.hpp"
#include "prophet/stats.hpp"
#include "prophet/threshold_solve.hpp"

namespace prophet {

// Parameter ledger for the multi-threshold random-order policy.  Everything
// derives from one knob gamma in (0,1):
//   lambda0 = gamma        probability floor below the grid
//   rho     = gamma^3      per-band mass of the max-law
//   q       = gamma^2 / 2  fraction of observations per group
//   delta   = gamma^6 / 4  per-check failure budget
//   epsilon = gamma^10 / (24 log(2/gamma^2))   no-superstars requirement
// The grid size c = (1-lambda0)/rho is rounded up (final band clamped), and
// qn is rounded down with the last group absorbing the remainder.
struct MultiThresholdParams {
  double gamma = 0.0;
  double lambda0 = 0.0;
  double rho = 0.0;
  double q = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::size_t c = 0;
  std::size_t group_size = 0;
  std::size_t group_count = 0;
  std::size_t n = 0;

  std::size_t group_of_step(std::size_t step) const {
    return std::min((step - 1) / group_size + 1, group_count);
  }
};

inline MultiThresholdParams derive_params(double gamma, std::size_t n) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("derive_params: gamma must be in (0,1)");
  MultiThresholdParams p;
  p.gamma = gamma;
  p.lambda0 = gamma;
  p.rho = gamma * gamma * gamma;
  p.q = gamma * gamma / 2.0;
  p.delta = std::pow(gamma, 6) / 4.0;
  p.epsilon = std::pow(gamma, 10) / (24.0 * std::log(2.0 / (gamma * gamma)));
  p.n = n;
  p.c = static_cast<std::size_t>(std::ceil((1.0 - p.lambda0) / p.rho - 1e-9));
  p.group_size = static_cast<std::size_t>(std::floor(p.q * double(n) + 1e-9));
  if (p.group_size < 1) throw InfeasibleParamsError("derive_params: q*n < 1 (no groups)");
  if (p.c < 1) throw InfeasibleParamsError("derive_params: no grid bands");
  p.group_count = n / p.group_size;
  // Stated consistency requirement: gamma*lambda0/(2 rho) >= q, i.e.
  // 1/(2 gamma) >= gamma^2/2, which holds on all of (0,1).
  if (gamma * p.lambda0 / (2.0 * p.rho) < p.q - 1e-12)
    throw InfeasibleParamsError("derive_params: consistency inequality failed");
  if (double(p.c) * p.rho < (1.0 - p.lambda0) - 1e-9)
    throw InfeasibleParamsError("derive_params: band count does not cover the probability range");
  return p;
}

// Quantile grid of the max-law: Pr[max <= t_i] = lambda0 + i*rho for
// i = 0..c, with the final target clamped to 1 (supremum of support).
struct ThresholdGrid {
  std::vector<Observation> thresholds;
  std::vector<double> targets;

  static constexpr double below_grid = -inf;

  // x rounded down to the nearest grid value (below_grid when x < t_0).
  double round_down(double x) const {
    std::size_t lo = 0, hi = thresholds.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (thresholds[mid].value <= x)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo == 0 ? below_grid : thresholds[lo - 1].value;
  }

  double floor_value() const { return thresholds.front().value; }
};

inline ThresholdGrid build_grid(const Instance& inst, const MultiThresholdParams& p) {
  ThresholdGrid grid;
  grid.thresholds.reserve(p.c + 1);
  grid.targets.reserve(p.c + 1);
  for (std::size_t i = 0; i <= p.c; ++i) {
    double target = std::min(p.lambda0 + double(i) * p.rho, 1.0);
    grid.targets.push_back(target);
    grid.thresholds.push_back(quantile_of_max(inst.distributions, target));
  }
  for (std::size_t i = 1; i < grid.thresholds.size(); ++i)
    if (!(grid.thresholds[i] > grid.thresholds[i - 1]))
      throw NoBracketError("build_grid: grid thresholds are not strictly increasing");
  return grid;
}

// Pessimistic i.i.d. comparator law on the grid: returns t_i with
// probability (1-3 gamma) q sum_i Pr[t_i <= x_i < t_{i+1}], else 0.
inline Distribution d_min_distribution(const Instance& inst, const MultiThresholdParams& p,
                                       const ThresholdGrid& grid) {
  std::vector<std::pair<double, double>> atoms;
  double assigned = 0.0;
  for (std::size_t band = 0; band < p.c; ++band) {
    double sum_band = 0.0;
    for (const auto& d : inst.distributions)
      sum_band += d.cdf_below_threshold(grid.thresholds[band + 1]) -
                  d.cdf_below_threshold(grid.thresholds[band]);
    double mass = (1.0 - 3.0 * p.gamma) * p.q * sum_band;
    mass = std::clamp(mass, 0.0, 1.0 - assigned);
    if (mass > 0.0) {
      atoms.emplace_back(grid.thresholds[band].value, mass);
      assigned += mass;
    }
  }
  atoms.emplace_back(0.0, 1.0 - assigned);
  return Distribution::discrete(std::move(atoms));
}

// Per-group thresholds for the grouped policies: quantile-scale accept
// boundaries of the optimal stopping rule for group_count i.i.d. draws,
// mapped through the comparator law's quantile onto the grid scale.  alpha
// is the rule's predicted success on that i.i.d. problem.
struct InnerThresholds {
  std::vector<double> values;  // one per group; -inf accepts anything on-grid
  double alpha = 0.0;
};

inline InnerThresholds dmin_optimal_inner(const Instance& inst, const MultiThresholdParams& p,
                                          const ThresholdGrid& grid,
                                          std::size_t grid_points = 4000) {
  Distribution dmin = d_min_distribution(inst, p, grid);
  QuantileDpResult dp = best_choice_quantile_dp(p.group_count, grid_points);
  InnerThresholds inner;
  inner.alpha = dp.predicted_success;
  inner.values.reserve(p.group_count);
  for (double u : dp.accept_quantiles)
    inner.values.push_back(u <= 0.0 ? -inf : dmin.quantile(u));
  return inner;
}

// Grouped multi-threshold rule over raw observations: per observation,
// (1) skip with probability 4 gamma, (2) reject values rounding below the
// grid floor, (3) reject rounded values at or below the group's threshold,
// (4) otherwise accept.
class GroupedThresholdPolicy : public Policy {
 public:
  GroupedThresholdPolicy(MultiThresholdParams params, std::shared_ptr<const ThresholdGrid> grid,
                         std::vector<double> inner)
      : params_(params), grid_(std::move(grid)), inner_(std::move(inner)) {
    if (inner_.size() != params_.group_count)
      throw std::invalid_argument("GroupedThresholdPolicy: need one threshold per group");
  }

  bool decide(std::size_t step, const Observation& obs, std::size_t, Rng& rng) override {
    ++observations_;
    if (rng.uniform() < 4.0 * params_.gamma) {
      ++coin_skips_;
      return false;
    }
    const double rounded = grid_->round_down(obs.value);
    if (rounded <= grid_->floor_value()) return false;
    if (rounded <= inner_[params_.group_of_step(step) - 1]) return false;
    return true;
  }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<GroupedThresholdPolicy>(*this);
  }

  std::uint64_t observations() const { return observations_; }
  std::uint64_t coin_skips() const { return coin_skips_; }

 private:
  MultiThresholdParams params_;
  std::shared_ptr<const ThresholdGrid> grid_;
  std::vector<double> inner_;
  std::uint64_t observations_ = 0;
  std::uint64_t coin_skips_ = 0;
};

// Same four rules over a stream of already-rounded group maxima (one
// observation per group).
class GroupMaxThresholdPolicy : public Policy {
 public:
  GroupMaxThresholdPolicy(MultiThresholdParams params, std::shared_ptr<const ThresholdGrid> grid,
                          std::vector<double> inner)
      : params_(params), grid_(std::move(grid)), inner_(std::move(inner)) {
    if (inner_.size() != params_.group_count)
      throw std::invalid_argument("GroupMaxThresholdPolicy: need one threshold per group");
  }

  bool decide(std::size_t group, const Observation& obs, std::size_t, Rng& rng) override {
    if (group > params_.group_count)
      throw std::invalid_argument("GroupMaxThresholdPolicy: step beyond group count");
    if (rng.uniform() < 4.0 * params_.gamma) return false;
    if (obs.value <= grid_->floor_value()) return false;  // includes below_grid
    if (obs.value <= inner_[group - 1]) return false;
    return true;
  }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<GroupMaxThresholdPolicy>(*this);
  }

 private:
  MultiThresholdParams params_;
  std::shared_ptr<const ThresholdGrid> grid_;
  std::vector<double> inner_;
};

// Consecutive blocks of group_size observations (last block absorbs the
// remainder), each reduced to its rounded maximum.
inline std::vector<Observation> rounded_group_maxima(std::span<const Observation> arrival,
                                                     const MultiThresholdParams& p,
                                                     const ThresholdGrid& grid) {
  std::vector<Observation> out;
  out.reserve(p.group_count);
  for (std::size_t g = 0; g < p.group_count; ++g) {
    const std::size_t begin = g * p.group_size;
    const std::size_t end = (g + 1 == p.group_count) ? arrival.size() : begin + p.group_size;
    Observation best{-inf, 0.0};
    for (std::size_t i = begin; i < end; ++i)
      if (arrival[i] > best) best = arrival[i];
    out.push_back(Observation{grid.round_down(best.value), best.aux});
  }
  return out;
}

// Paired comparison of the grouped rule on raw values against the
// group-maxima rule on the same realized trials with shared per-group skip
// coins.  A trial counts as a disagreement unless both rules select nothing
// or both select the same group with the raw rule taking that group's
// maximum.  The two ways they can part are exactly a second above-threshold
// value within the accepting group or the coin thinning interacting with it.
struct CoupledDiscrepancy {
  std::uint64_t trials = 0;
  std::uint64_t disagreements = 0;
  double rate = 0.0;
};

inline CoupledDiscrepancy coupled_discrepancy(const Instance& inst,
                                              const MultiThresholdParams& p,
                                              const ThresholdGrid& grid,
                                              std::span<const double> inner,
                                              std::uint64_t trials, std::uint64_t seed) {
  const std::size_t n = inst.size();
  CoupledDiscrepancy out;
  out.trials = trials;
  const double t0 = grid.floor_value();

  std::vector<double> values(n), aux(n);
  std::vector<std::size_t> arrival(n);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, trial));
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = inst.distributions[i].sample(rng);
      aux[i] = rng.uniform();
    }
    if (inst.order.kind == OrderModel::Kind::AdversarialFixed) {
      arrival = inst.order.arrival;
    } else {
      std::iota(arrival.begin(), arrival.end(), std::size_t{0});
      for (std::size_t i = n; i > 1; --i) std::swap(arrival[i - 1], arrival[rng.below(i)]);
    }
    Rng coin_rng(derive_seed(seed ^ 0x5bd1e995u, trial));
    Rng extra_rng(derive_seed(seed ^ 0xc2b2ae35u, trial));
    std::vector<bool> group_skip(p.group_count);
    for (std::size_t g = 0; g < p.group_count; ++g)
      group_skip[g] = coin_rng.uniform() < 4.0 * p.gamma;

    // Group-maxima rule.
    std::size_t pick_groups = 0;  // 0 = none
    Observation picked_max{-inf, 0.0};
    std::size_t pick_groups_raw = 0;
    Observation picked_raw{-inf, 0.0};
    std::vector<Observation> raw_max(p.group_count, Observation{-inf, 0.0});
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t g = p.group_of_step(t + 1) - 1;
      Observation obs{values[arrival[t]], aux[arrival[t]]};
      if (obs > raw_max[g]) raw_max[g] = obs;
    }
    for (std::size_t g = 0; g < p.group_count; ++g) {
      if (group_skip[g]) continue;
      const double rounded = grid.round_down(raw_max[g].value);
      if (rounded <= t0 || rounded <= inner[g]) continue;
      pick_groups = g + 1;
      picked_max = raw_max[g];
      break;
    }

    // Raw rule with the shared coin spent on the first passing value of
    // each group; later passing values in the same group flip fresh coins.
    std::vector<bool> coin_spent(p.group_count, false);
    for (std::size_t t = 0; t < n && pick_groups_raw == 0; ++t) {
      const std::size_t g = p.group_of_step(t + 1) - 1;
      Observation obs{values[arrival[t]], aux[arrival[t]]};
      const double rounded = grid.round_down(obs.value);
      if (rounded <= t0 || rounded <= inner[g]) continue;
      bool skip;
      if (!coin_spent[g]) {
        coin_spent[g] = true;
        skip = group_skip[g];
      } else {
        skip = extra_rng.uniform() < 4.0 * p.gamma;
      }
      if (skip) continue;
      pick_groups_raw = g + 1;
      picked_raw = obs;
    }

    const bool agree =
        (pick_groups == 0 && pick_groups_raw == 0) ||
        (pick_groups == pick_groups_raw && picked_raw == picked_max);
    if (!agree) ++out.disagreements;
  }
  out.rate = trials ? double(out.disagreements) / double(trials) : 0.0;
  return out;
}

// Estimates Pr[i = argmax] for every i in one sampling pass; exchangeable
// i.i.d. instances short-circuit to the exact symmetric answer 1/n.
// satisfied means every per-index upper confidence endpoint is <= epsilon;
// size trials so the interval half-width near epsilon is at most epsilon/10
// for a meaningful verdict.
struct SuperstarProbe {
  std::vector<double> argmax_probs;
  double max_prob = 0.0;
  std::size_t argmax_index = 0;
  bool satisfied = false;
  bool analytic = false;
};

inline SuperstarProbe superstar_probe(const Instance& inst, double epsilon, std::uint64_t trials,
                                      std::uint64_t seed, double confidence = 0.99) {
  const std::size_t n = inst.size();
  SuperstarProbe out;
  if (inst.iid()) {
    out.analytic = true;
    out.argmax_probs.assign(n, 1.0 / double(n));
    out.max_prob = 1.0 / double(n);
    out.argmax_index = 0;
    out.satisfied = out.max_prob <= epsilon;
    return out;
  }
  if (trials == 0) throw std::invalid_argument("superstar_probe: trials must be >= 1");
  std::vector<std::uint64_t> counts(n, 0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    Observation best{-inf, 0.0};
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Observation obs{inst.distributions[i].sample(rng), rng.uniform()};
      if (obs > best) {
        best = obs;
        best_i = i;
      }
    }
    ++counts[best_i];
  }
  out.argmax_probs.resize(n);
  out.satisfied = true;
  for (std::size_t i = 0; i < n; ++i) {
    out.argmax_probs[i] = double(counts[i]) / double(trials);
    if (out.argmax_probs[i] > out.max_prob) {
      out.max_prob = out.argmax_probs[i];
      out.argmax_index = i;
    }
    if (wilson_interval(counts[i], trials, confidence).high > epsilon) out.satisfied = false;
  }
  return out;
}

// Single-threshold rule augmented with a closing-window override: when the
// designated index arrives among the last ceil(epsilon n / 2) steps and
// nothing has been taken yet, accept it regardless of its value.  With no
// designated index this is exactly the plain threshold rule.
class SuperstarFallbackPolicy : public Policy {
 public:
  SuperstarFallbackPolicy(Observation tau, std::size_t star, std::size_t tail_start)
      : tau_(tau), star_(star), tail_start_(tail_start) {}

  bool decide(std::size_t step, const Observation& obs, std::size_t identity, Rng&) override {
    if (identity == star_ && step >= tail_start_) return true;
    return obs >= tau_;
  }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<SuperstarFallbackPolicy>(*this);
  }

 private:
  Observation tau_;
  std::size_t star_;
  std::size_t tail_start_;
};

inline std::unique_ptr<Policy> superstar_fallback_policy(const Instance& inst, double epsilon,
                                                         Observation tau,
                                                         std::optional<std::size_t> star) {
  if (!inst.identities_observable)
    throw IdentityUnavailableError("superstar fallback requires observable identities");
  if (!star) return std::make_unique<ThresholdPolicy>(tau);
  if (*star >= inst.size())
    throw std::invalid_argument("superstar_fallback_policy: index out of range");
  const std::size_t n = inst.size();
  const auto window =
      static_cast<std::size_t>(std::ceil(epsilon * double(n) / 2.0 - 1e-12));
  const std::size_t tail_start = window >= n ? 1 : n - window + 1;  // window 0 never fires
  return std::make_unique<SuperstarFallbackPolicy>(tau, *star,
                                                   window == 0 ? n + 1 : tail_start);
}

// Exact-probability checks of the sampling-without-replacement band
// concentration claims, isolating the subset randomness from estimation
// noise: for each sampled subset S the claimed inequalities are evaluated
// from CDFs, and the fraction of subsets violating them is compared with
// the stated failure budgets.  The band-pair and band-existence bounds are
// deterministic (no subset involved) and must never fail.
struct LemmaCheckReport {
  std::size_t reps = 0;
  double subset_band_violation_fraction = 0.0;  // budget gamma^3/2
  double subset_band_budget = 0.0;
  double subset_tail_violation_fraction = 0.0;  // budget delta
  double subset_tail_budget = 0.0;
  bool band_pair_ok = true;       // Pr[>=2 in band] <= rho^2/lambda0^2
  double band_pair_max = 0.0;
  double band_pair_bound = 0.0;
  bool band_exist_ok = true;      // rho_band <= Pr[any in band] <= rho_band/(1-lambda)
  double band_exist_max_excess = 0.0;
  // existence/expectation sandwich, checked for every sampled subset and
  // band: max(1 - sum p, 1 - rho/(1-lambda)) sum p <= Pr[any] <= sum p.
  // Deterministic: must never fail.
  bool exist_sum_ok = true;
  double exist_sum_max_excess = 0.0;
};

inline LemmaCheckReport lemma_checkers(const Instance& inst, const MultiThresholdParams& p,
                                       std::size_t reps, std::uint64_t seed) {
  const std::size_t n = inst.size();
  ThresholdGrid grid = build_grid(inst, p);

  // Per-item CDF at every grid point and per-band interval probabilities.
  std::vector<std::vector<double>> cdf_at(n, std::vector<double>(p.c + 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t g = 0; g <= p.c; ++g)
      cdf_at[i][g] = inst.distributions[i].cdf_below_threshold(grid.thresholds[g]);
  std::vector<double> band_total(p.c, 0.0);
  for (std::size_t band = 0; band < p.c; ++band)
    for (std::size_t i = 0; i < n; ++i) band_total[band] += cdf_at[i][band + 1] - cdf_at[i][band];

  // Tail probabilities above the 1-rho quantile of the max-law.
  Observation tau0 = quantile_of_max(inst.distributions, 1.0 - p.rho);
  std::vector<double> tail_prob(n);
  for (std::size_t i = 0; i < n; ++i)
    tail_prob[i] = 1.0 - inst.distributions[i].cdf_below_threshold(tau0);

  LemmaCheckReport rep;
  rep.reps = reps;
  rep.subset_band_budget = p.gamma * p.gamma * p.gamma / 2.0;
  rep.subset_tail_budget = p.delta;
  const double q_eff = double(p.group_size) / double(n);
  const double tol = 1e-9;

  Rng rng(derive_seed(seed, 0));
  std::vector<std::size_t> idx(n);
  std::size_t band_violations = 0, tail_violations = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < p.group_size; ++i) {
      std::size_t j = i + rng.below(n - i);
      std::swap(idx[i], idx[j]);
    }
    auto subset = std::span<const std::size_t>(idx).first(p.group_size);

    bool band_bad = false;
    for (std::size_t band = 0; band < p.c; ++band) {
      double log_hi = 0.0, log_lo = 0.0;
      double sum_subset = 0.0, none_subset = 1.0;
      for (std::size_t s : subset) {
        log_hi += std::log(std::max(cdf_at[s][band + 1], 1e-300));
        log_lo += std::log(std::max(cdf_at[s][band], 1e-300));
        const double pi_band = cdf_at[s][band + 1] - cdf_at[s][band];
        sum_subset += pi_band;
        none_subset *= 1.0 - pi_band;
      }
      const double prob_band = std::exp(log_hi) - std::exp(log_lo);
      const double lo_bound = (1.0 - 3.0 * p.gamma) * q_eff * band_total[band];
      const double hi_bound = (1.0 + p.gamma) * q_eff * band_total[band];
      if (prob_band < lo_bound - tol || prob_band > hi_bound + tol) band_bad = true;

      const double any_subset = 1.0 - none_subset;
      const double band_mass = grid.targets[band + 1] - grid.targets[band];
      const double coef = std::max(1.0 - sum_subset, 1.0 - band_mass / grid.targets[band + 1]);
      const double excess =
          std::max(coef * sum_subset - any_subset, any_subset - sum_subset);
      rep.exist_sum_max_excess = std::max(rep.exist_sum_max_excess, excess);
      if (excess > tol) rep.exist_sum_ok = false;
    }
    if (band_bad) ++band_violations;

    std::vector<double> subset_tail;
    subset_tail.reserve(p.group_size);
    for (std::size_t s : subset) subset_tail.push_back(tail_prob[s]);
    const double any = bernoulli_any_prob(subset_tail);
    const double ge2 = bernoulli_ge2_prob(subset_tail);
    const bool tail_bad = any > 2.0 * q_eff / p.lambda0 + tol ||
                          ge2 > 4.0 * q_eff * q_eff / (p.lambda0 * p.lambda0) + tol;
    if (tail_bad) ++tail_violations;
  }
  rep.subset_band_violation_fraction = reps ? double(band_violations) / double(reps) : 0.0;
  rep.subset_tail_violation_fraction = reps ? double(tail_violations) / double(reps) : 0.0;

  rep.band_pair_bound = (p.rho * p.rho) / (p.lambda0 * p.lambda0);
  std::vector<double> band_probs(n);
  for (std::size_t band = 0; band < p.c; ++band) {
    for (std::size_t i = 0; i < n; ++i) band_probs[i] = cdf_at[i][band + 1] - cdf_at[i][band];
    const double ge2 = bernoulli_ge2_prob(band_probs);
    rep.band_pair_max = std::max(rep.band_pair_max, ge2);
    if (ge2 > rep.band_pair_bound + tol) rep.band_pair_ok = false;

    const double any = bernoulli_any_prob(band_probs);
    const double band_mass = grid.targets[band + 1] - grid.targets[band];
    const double upper = band_mass / grid.targets[band + 1];
    const double excess = std::max(band_mass - any, any - upper);
    rep.band_exist_max_excess = std::max(rep.band_exist_max_excess, excess);
    if (any < band_mass - tol || any > upper + tol) rep.band_exist_ok = false;
  }
  return rep;
}

}  // namespace prophet
