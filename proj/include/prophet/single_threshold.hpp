#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "prophet/instance.hpp"
#include "prophet/poissonization.hpp"
#include "prophet/policy.hpp"
#include "prophet/threshold_solve.hpp"

namespace prophet {

// Single threshold at the 1/e quantile of the max-law: accept the first
// observation above it.  Succeeds with probability at least 1/e whenever
// exactly one value clears the threshold, which the tuning makes as likely
// as possible in the worst case.
inline ThresholdPolicy pi_single_threshold(const Instance& inst) {
  Observation tau = quantile_of_max(inst.distributions, 1.0 / std::numbers::e);
  return ThresholdPolicy(tau);
}

// Exact probability that exactly one independent indicator fires, from the
// per-item above-threshold probabilities: sum_j p_j prod_{i != j} (1 - p_i),
// evaluated in the numerically stable ratio form.  p_i == 1 entries are
// handled as limits.
inline double prob_exactly_one_above(std::span<const double> probs) {
  std::size_t ones = 0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("prob_exactly_one_above: probabilities must be in [0,1]");
    if (p == 1.0) ++ones;
  }
  if (ones >= 2) return 0.0;
  if (ones == 1) {
    double prod = 1.0;
    for (double p : probs)
      if (p != 1.0) prod *= (1.0 - p);
    return prod;
  }
  double prod = 1.0;
  for (double p : probs) prod *= (1.0 - p);
  KahanSum ratio;
  for (double p : probs) ratio.add(p / (1.0 - p));
  return prod * ratio.value();
}

// Single threshold at the e^{-lambda*} quantile of the max-law, where
// lambda* maximizes the Poisson success series.  Under uniformly random
// arrival order this attains the best single-threshold success rate.
inline ThresholdPolicy ps_single_threshold(const Instance& inst) {
  Observation tau = quantile_of_max(inst.distributions, std::exp(-lambda_star().lambda));
  return ThresholdPolicy(tau);
}

// Single threshold with expected above-count exactly gamma*k,
// gamma = (3 - sqrt 5)/2; misses one of the top k values with probability
// at most 2 e^{-gamma k} in any arrival order.
inline ThresholdPolicy topk_single_threshold(const Instance& inst, std::size_t k) {
  if (k == 0) throw std::invalid_argument("topk_single_threshold: k must be >= 1");
  const double target = topk_gamma() * static_cast<double>(k);
  if (target >= static_cast<double>(inst.size()))
    throw InfeasibleTargetError("topk_single_threshold: gamma*k >= n");
  Observation tau = expected_above_threshold(inst.distributions, target);
  return ThresholdPolicy(tau);
}

// Exact success probabilities of every cutoff rule on the reciprocal
// two-point hard instance (value i with probability 1/i, arriving in index
// order): value(i) = 1/n + ((i-1)/n) * (H_{n-1} - H_{i-1}).  One pass of
// compensated harmonic prefix sums serves all i.
inline std::vector<double> cutoff_policy_values(std::size_t n) {
  if (n == 0) throw std::invalid_argument("cutoff_policy_values: n must be >= 1");
  std::vector<double> harmonic(n);  // harmonic[j] = H_j, harmonic[0] = 0
  KahanSum h;
  harmonic[0] = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    h.add(1.0 / static_cast<double>(j));
    harmonic[j] = h.value();
  }
  std::vector<double> values(n + 1);  // values[i] for cutoff i in 1..n
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 1; i <= n; ++i)
    values[i] = inv_n + (static_cast<double>(i - 1) * inv_n) * (harmonic[n - 1] - harmonic[i - 1]);
  values[0] = 0.0;
  return values;
}

inline double cutoff_policy_value(std::size_t n, std::size_t i) {
  if (!(i >= 1 && i <= n)) throw std::invalid_argument("cutoff_policy_value: need 1 <= i <= n");
  KahanSum tail;  // H_{n-1} - H_{i-1}
  for (std::size_t j = i; j < n; ++j) tail.add(1.0 / static_cast<double>(j));
  return 1.0 / static_cast<double>(n) +
         (static_cast<double>(i - 1) / static_cast<double>(n)) * tail.value();
}

}  // namespace prophet
