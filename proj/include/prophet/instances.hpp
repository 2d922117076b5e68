#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "prophet/instance.hpp"
#include "prophet/single_threshold.hpp"
#include "prophet/stats.hpp"

namespace prophet {

// Hard instance for adversarial-order best choice: value i with probability
// 1/i (else 0), arriving in index order.  The first value is
// deterministically 1, and every index is the maximum with probability
// exactly 1/n.
inline Instance hard_instance(std::size_t n) {
  if (n == 0) throw std::invalid_argument("hard_instance: n must be >= 1");
  Instance inst;
  inst.distributions.reserve(n);
  for (std::size_t i = 1; i <= n; ++i)
    inst.distributions.push_back(
        Distribution::two_point(double(i), 1.0 / double(i)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  inst.order = OrderModel::adversarial(std::move(order));
  return inst;
}

// Atomless variant for simulation: the nonzero value is spread uniformly
// over [i, i+band] so realized ranks are strict.
inline Instance hard_instance_atomless(std::size_t n, double band = 1e-6) {
  if (n == 0) throw std::invalid_argument("hard_instance_atomless: n must be >= 1");
  if (!(band > 0.0)) throw std::invalid_argument("hard_instance_atomless: band must be positive");
  Instance inst;
  inst.distributions.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    Distribution nonzero = Distribution::uniform(double(i), double(i) + band);
    double q = 1.0 / double(i);
    if (q >= 1.0) {
      inst.distributions.push_back(std::move(nonzero));
    } else {
      inst.distributions.push_back(Distribution::mixture(
          {{1.0 - q, Distribution::two_point(0.0, 1.0)}, {q, std::move(nonzero)}}));
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  inst.order = OrderModel::adversarial(std::move(order));
  return inst;
}

// Best cutoff rule on the hard instance: argmax_i of the exact cutoff value.
struct BestCutoff {
  std::size_t index = 1;
  double value = 0.0;
};

inline BestCutoff best_cutoff(std::size_t n) {
  std::vector<double> values = cutoff_policy_values(n);
  BestCutoff best;
  for (std::size_t i = 1; i <= n; ++i) {
    if (values[i] > best.value) {
      best.value = values[i];
      best.index = i;
    }
  }
  return best;
}

// i.i.d. instance that defeats sub-exponential top-k error: each draw is
// uniform on [1,2] with probability k/n and 0 otherwise, random order.
inline Instance topk_lb_instance(std::size_t n, std::size_t k) {
  if (n % 2 != 0 || n <= 2 * k)
    throw std::invalid_argument("topk_lb_instance: need n even and n > 2k");
  const double q = double(k) / double(n);
  Distribution law = Distribution::mixture(
      {{1.0 - q, Distribution::two_point(0.0, 1.0)}, {q, Distribution::uniform(1.0, 2.0)}});
  Instance inst;
  inst.distributions.assign(n, law);
  inst.order = OrderModel::uniform_random();
  return inst;
}

// Exact probabilities of the trap events on the top-k lower-bound instance.
// Nonzero counts per half are Bin(n/2, k/n); the interleaving event (first
// k potential successes of the first half all smaller than those of the
// second half) has probability 1 / C(2k, k) under a uniform permutation.
// An algorithm that has stopped by the midpoint fails when the second half
// holds k or more successes; one that has not fails when it holds none.
struct TopkTrapProbs {
  double p_first_half_k = 0.0;    // first half has exactly k successes
  double p_interleave = 0.0;      // ordering trap
  double p_second_half_zero = 0.0;
  double p_second_half_ge_k = 0.0;
  double trap_bound = 0.0;        // product with the weaker branch
};

inline TopkTrapProbs topk_lb_event_probs(std::size_t n, std::size_t k) {
  if (n % 2 != 0 || n <= 2 * k)
    throw std::invalid_argument("topk_lb_event_probs: need n even and n > 2k");
  const std::uint64_t half = n / 2;
  const double q = double(k) / double(n);
  TopkTrapProbs out;
  out.p_first_half_k = binomial_pmf(half, k, q);
  out.p_interleave = 1.0 / binomial_coefficient(2 * k, k);
  out.p_second_half_zero = std::pow(1.0 - q, double(half));
  double below = 0.0;
  for (std::uint64_t j = 0; j < k; ++j) below += binomial_pmf(half, j, q);
  out.p_second_half_ge_k = std::max(0.0, 1.0 - below);
  out.trap_bound = out.p_first_half_k * out.p_interleave *
                   std::min(out.p_second_half_zero, out.p_second_half_ge_k);
  return out;
}

// Latent decomposition of one trial of the top-k lower-bound instance:
// sorted latent values, a position permutation, per-half success counts and
// success orders.  Marginally identical to direct i.i.d. sampling; the trap
// flags mark the conditioning events of the lower-bound argument.
struct TopkDecomposition {
  std::vector<double> sorted_values;      // ascending latent values
  std::vector<std::size_t> dist_at_pos;   // position -> latent index
  std::size_t first_half_successes = 0;   // Z1
  std::size_t second_half_successes = 0;  // Z2
  std::vector<double> observations;       // realized stream, position order
  bool first_half_exactly_k = false;
  bool interleave_trap = false;
};

inline TopkDecomposition sample_topk_decomposition(std::size_t n, std::size_t k, Rng& rng) {
  if (n % 2 != 0 || n <= 2 * k)
    throw std::invalid_argument("sample_topk_decomposition: need n even and n > 2k");
  const std::size_t half = n / 2;
  const double q = double(k) / double(n);

  TopkDecomposition d;
  d.sorted_values.resize(n);
  for (auto& v : d.sorted_values) v = 1.0 + rng.uniform();
  std::sort(d.sorted_values.begin(), d.sorted_values.end());

  d.dist_at_pos.resize(n);
  std::iota(d.dist_at_pos.begin(), d.dist_at_pos.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(d.dist_at_pos[i - 1], d.dist_at_pos[rng.below(i)]);

  for (std::size_t i = 0; i < half; ++i) d.first_half_successes += rng.bernoulli(q) ? 1 : 0;
  for (std::size_t i = 0; i < half; ++i) d.second_half_successes += rng.bernoulli(q) ? 1 : 0;

  auto random_ranks = [&](std::size_t m) {
    std::vector<std::size_t> r(m);
    std::iota(r.begin(), r.end(), std::size_t{1});
    for (std::size_t i = m; i > 1; --i) std::swap(r[i - 1], r[rng.below(i)]);
    return r;
  };
  const std::vector<std::size_t> rank1 = random_ranks(half);  // success order, first half
  const std::vector<std::size_t> rank2 = random_ranks(half);  // success order, second half

  d.observations.assign(n, 0.0);
  for (std::size_t t = 0; t < half; ++t)
    if (rank1[t] <= d.first_half_successes) d.observations[t] = d.sorted_values[d.dist_at_pos[t]];
  for (std::size_t t = half; t < n; ++t)
    if (rank2[t - half] <= d.second_half_successes)
      d.observations[t] = d.sorted_values[d.dist_at_pos[t]];

  d.first_half_exactly_k = (d.first_half_successes == k);

  // Trap ordering: the k earliest potential successes of the first half all
  // carry smaller latent values than the k earliest of the second half.
  std::size_t max_first = 0;
  std::size_t min_second = n;
  for (std::size_t t = 0; t < half; ++t)
    if (rank1[t] <= k) max_first = std::max(max_first, d.dist_at_pos[t] + 1);
  for (std::size_t t = half; t < n; ++t)
    if (rank2[t - half] <= k) min_second = std::min(min_second, d.dist_at_pos[t] + 1);
  d.interleave_trap = max_first < min_second;
  return d;
}

}  // namespace prophet
