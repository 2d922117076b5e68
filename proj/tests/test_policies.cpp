#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <numbers>

#include "prophet/optimal_stopping.hpp"
#include "prophet/report.hpp"
#include "prophet/single_threshold.hpp"

using namespace prophet;

namespace {

// Enumeration oracle: probability of exactly one success over all 2^n
// above/below patterns.
double exactly_one_by_enumeration(const std::vector<double>& p) {
  const std::size_t n = p.size();
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    if (std::popcount(mask) != 1) continue;
    double w = 1.0;
    for (std::size_t i = 0; i < n; ++i) w *= (mask >> i) & 1 ? p[i] : 1.0 - p[i];
    total += w;
  }
  return total;
}

}  // namespace

TEST_CASE("single threshold for adversarial order sits at the 1/e max-quantile") {
  Instance one = make_named_instance("iid-uniform:1");
  CHECK(pi_single_threshold(one).thresholds().front().value ==
        Catch::Approx(1.0 / std::numbers::e).margin(1e-9));

  Instance four = make_named_instance("iid-uniform:4");
  CHECK(pi_single_threshold(four).thresholds().front().value ==
        Catch::Approx(std::pow(1.0 / std::numbers::e, 0.25)).margin(1e-9));

  Instance pair;
  pair.distributions = {Distribution::uniform(0, 1), Distribution::uniform(0, 2)};
  CHECK(pi_single_threshold(pair).thresholds().front().value ==
        Catch::Approx(std::sqrt(2.0 / std::numbers::e)).margin(1e-9));
}

TEST_CASE("prob_exactly_one_above: closed cases and enumeration oracle") {
  CHECK(prob_exactly_one_above(std::vector<double>{0.5, 0.5}) == Catch::Approx(0.5));
  CHECK(prob_exactly_one_above(std::vector<double>{1.0 - 1.0 / std::numbers::e}) ==
        Catch::Approx(1.0 - 1.0 / std::numbers::e));
  CHECK(prob_exactly_one_above(std::vector<double>{1.0, 0.25}) == Catch::Approx(0.75));
  CHECK(prob_exactly_one_above(std::vector<double>{1.0, 1.0, 0.25}) == 0.0);

  Rng rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    std::size_t n = 1 + rng.below(12);
    std::vector<double> p(n);
    for (auto& v : p) v = rng.uniform() * 0.99;
    CHECK(prob_exactly_one_above(p) ==
          Catch::Approx(exactly_one_by_enumeration(p)).margin(1e-12));
  }
}

TEST_CASE("prob_exactly_one_above is at least 1/e when no-value probability is 1/e") {
  Rng rng(32);
  for (int rep = 0; rep < 1000; ++rep) {
    std::size_t n = 1 + rng.below(20);
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& v : w) {
      v = 0.01 + rng.uniform();
      total += v;
    }
    std::vector<double> p(n);
    double check = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = 1.0 - std::exp(-w[i] / total);  // prod (1 - p_i) = 1/e
      check *= 1.0 - p[i];
    }
    REQUIRE(check == Catch::Approx(1.0 / std::numbers::e).margin(1e-12));
    CHECK(prob_exactly_one_above(p) >= 1.0 / std::numbers::e - 1e-12);
  }
}

TEST_CASE("random-order single threshold uses the series maximizer") {
  const double ls = lambda_star().lambda;
  CHECK(poisson_success_series(ls).value >= poisson_success_series(1.0).value);
  CHECK(poisson_success_series(ls).value >= poisson_success_series(2.5).value);

  Instance one = make_named_instance("iid-uniform:1");
  const double tau1 = ps_single_threshold(one).thresholds().front().value;
  CHECK(tau1 == Catch::Approx(std::exp(-ls)).margin(1e-9));
  CHECK(tau1 > 0.222);
  CHECK(tau1 < 0.2235);

  Instance two = make_named_instance("iid-uniform:2");
  const double tau2 = ps_single_threshold(two).thresholds().front().value;
  CHECK(tau2 == Catch::Approx(std::exp(-ls / 2.0)).margin(1e-9));

  // Definition round-trip on a heterogeneous instance.
  Instance mixed = make_named_instance("mixed-uniform-exponential:6");
  Observation tau = ps_single_threshold(mixed).thresholds().front();
  double prod = 1.0;
  for (const auto& d : mixed.distributions) prod *= d.cdf_below_threshold(tau);
  CHECK(prod == Catch::Approx(std::exp(-ls)).margin(1e-9));
}

TEST_CASE("top-k threshold targets expected above-count gamma*k") {
  Instance inst = make_named_instance("iid-uniform:100");
  ThresholdPolicy pol = topk_single_threshold(inst, 5);
  const double per_item = topk_gamma() * 5.0 / 100.0;
  CHECK(pol.thresholds().front().value == Catch::Approx(1.0 - per_item).margin(1e-9));
  CHECK(pol.thresholds().front().value == Catch::Approx(0.98090).margin(1e-4));

  double total = 0.0;
  for (const auto& d : inst.distributions)
    total += 1.0 - d.cdf_below_threshold(pol.thresholds().front());
  CHECK(total == Catch::Approx(topk_gamma() * 5.0).margin(1e-9));

  const auto infeasible_k = static_cast<std::size_t>(std::ceil(100.0 / topk_gamma()));
  CHECK_THROWS_AS(topk_single_threshold(inst, infeasible_k), InfeasibleTargetError);

  // Failure bound 2 e^{-gamma k} holds in simulation at n=100, k=5.
  McEstimate est = estimate(inst, pol, Goal::top_k(5), 50000, 500, 0.99, 2);
  const double failure = 1.0 - est.point;
  CHECK(failure <= 2.0 * std::exp(-topk_gamma() * 5.0) + 3.0 * est.std_error());
}

TEST_CASE("cutoff values on the hard instance") {
  CHECK(cutoff_policy_value(3, 1) == Catch::Approx(1.0 / 3.0).margin(1e-12));
  CHECK(cutoff_policy_value(3, 2) == Catch::Approx(0.5).margin(1e-12));
  CHECK(cutoff_policy_value(3, 3) == Catch::Approx(1.0 / 3.0).margin(1e-12));

  auto all = cutoff_policy_values(1000);
  for (std::size_t i = 1; i <= 1000; i += 97)
    CHECK(all[i] == Catch::Approx(cutoff_policy_value(1000, i)).margin(1e-12));
}

TEST_CASE("optimal stopping DP: edge cases against brute-force integrals") {
  QuantileDpResult one = best_choice_quantile_dp(1, 1000);
  CHECK(one.predicted_success == Catch::Approx(1.0).margin(1e-12));
  CHECK(one.accept_quantiles[0] == 0.0);

  // Two steps: accept the first value iff its quantile is at least t; the
  // win probability is Int_t^1 v dv + Int_0^t (1-v) dv, maximized over t.
  QuantileDpResult two = best_choice_quantile_dp(2, 4000);
  double best = 0.0, best_t = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    double t = double(i) / 100000.0;
    double win = (1.0 - t * t) / 2.0 + t - t * t / 2.0;
    if (win > best) {
      best = win;
      best_t = t;
    }
  }
  CHECK(two.predicted_success == Catch::Approx(best).margin(1e-4));
  CHECK(two.predicted_success == Catch::Approx(0.75).margin(1e-4));
  CHECK(two.accept_quantiles[0] == Catch::Approx(best_t).margin(1e-3));
  CHECK(two.accept_quantiles[1] == 0.0);

  // Three steps: exact value 17/48 + piecewise integrals = 0.6843005.
  QuantileDpResult three = best_choice_quantile_dp(3, 4000);
  CHECK(three.predicted_success == Catch::Approx(0.6843005).margin(3e-4));
  CHECK(three.accept_quantiles[0] == Catch::Approx((1.0 + std::sqrt(6.0)) / 5.0).margin(1e-3));
  CHECK(three.accept_quantiles[1] == Catch::Approx(0.5).margin(1e-3));
}

TEST_CASE("optimal stopping thresholds are nonincreasing and grid-stable") {
  QuantileDpResult dp = best_choice_quantile_dp(50, 2000);
  for (std::size_t t = 1; t < 50; ++t)
    CHECK(dp.accept_quantiles[t] <= dp.accept_quantiles[t - 1] + 1e-12);

  QuantileDpResult fine = best_choice_quantile_dp(50, 4000);
  CHECK(dp.predicted_success == Catch::Approx(fine.predicted_success).margin(1e-4));
}

TEST_CASE("iid optimal policy: DP prediction matches simulation") {
  Instance inst = make_named_instance("iid-uniform:10");
  IidOptimalPolicy res = iid_optimal_policy(Distribution::uniform(0, 1), 10, 2000);
  McEstimate est = estimate(inst, res.policy, Goal::best_choice(), 200000, 600, 0.99, 2);
  CHECK(std::abs(est.point - res.predicted_success) <= 3.0 * est.std_error() + 2e-4);
}

TEST_CASE("iid optimal policy maps quantile thresholds through the law") {
  auto res = iid_optimal_policy(Distribution::uniform(0, 2), 10, 2000);
  REQUIRE(res.policy.thresholds().size() == 10);
  CHECK(res.policy.candidate_only());
  for (std::size_t t = 0; t < 10; ++t) {
    if (res.accept_quantiles[t] > 0.0)
      CHECK(res.policy.thresholds()[t].value ==
            Catch::Approx(2.0 * res.accept_quantiles[t]).margin(1e-9));
  }
  CHECK(res.policy.thresholds().back().value == -inf);

  CHECK_THROWS_AS(iid_optimal_policy(Distribution::two_point(1.0, 0.5), 5, 1000),
                  std::invalid_argument);
  CHECK_THROWS_AS(best_choice_quantile_dp(5, 10), std::invalid_argument);
}
