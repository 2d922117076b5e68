#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "prophet/instances.hpp"
#include "prophet/report.hpp"
#include "prophet/simulator.hpp"
#include "prophet/single_threshold.hpp"
#include "test_util.hpp"

using namespace prophet;

TEST_CASE("run_trial basics") {
  Rng rng(1);
  Instance one = make_named_instance("iid-uniform:1");
  ThresholdPolicy accept_all(Observation{-inf, 0.0});
  TrialOutcome out = run_trial(one, accept_all, Goal::best_choice(), rng);
  CHECK(out.accepted_step == 1);
  CHECK(out.success);
  CHECK(out.rank == 1);

  Instance two = make_named_instance("iid-uniform:2");
  ThresholdPolicy never(Observation{inf, 1.0});
  TrialOutcome none = run_trial(two, never, Goal::best_choice(), rng);
  CHECK_FALSE(none.accepted_step.has_value());
  CHECK_FALSE(none.success);
}

TEST_CASE("estimate is deterministic for any worker count") {
  Instance inst = make_named_instance("iid-uniform:6");
  ThresholdPolicy pol = pi_single_threshold(inst);
  McEstimate a = estimate(inst, pol, Goal::best_choice(), 20000, 99, 0.99, 1);
  McEstimate b = estimate(inst, pol, Goal::best_choice(), 20000, 99, 0.99, 4);
  McEstimate c = estimate(inst, pol, Goal::best_choice(), 20000, 99, 0.99, 3);
  CHECK(a.successes == b.successes);
  CHECK(a.successes == c.successes);
  CHECK(a.point == b.point);
  CHECK(a.ci_low == b.ci_low);

  McEstimate other_seed = estimate(inst, pol, Goal::best_choice(), 20000, 100, 0.99, 2);
  CHECK(other_seed.successes != a.successes);  // astronomically unlikely to match
}

TEST_CASE("deterministic instance gives certain success") {
  Instance inst;
  inst.distributions = {Distribution::two_point(1.0, 1.0)};
  ThresholdPolicy accept_all(Observation{-inf, 0.0});
  McEstimate est = estimate(inst, accept_all, Goal::best_choice(), 1000, 7);
  CHECK(est.point == 1.0);
  CHECK(est.ci_high == 1.0);
  CHECK(est.ci_low < 1.0);
}

TEST_CASE("Wilson interval calibrates on a fair coin") {
  // Synthetic Bernoulli(1/2) stream through the same per-trial seeding.
  std::uint64_t successes = 0;
  const std::uint64_t trials = 100000;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(4242, t));
    successes += rng.uniform() < 0.5 ? 1 : 0;
  }
  auto ci = wilson_interval(successes, trials, 0.99);
  CHECK(ci.low <= 0.5);
  CHECK(ci.high >= 0.5);
  CHECK(ci.high - ci.low < 0.01);
}

TEST_CASE("exact evaluation of small discrete instances") {
  // Hard instance with three values, cutoff at the second position: 1/2.
  Instance inst = hard_instance(3);
  CutoffPolicy cut2(2);
  CHECK(exact_success_small(inst, cut2, Goal::best_choice()) == Catch::Approx(0.5).margin(1e-12));
  CHECK(exact_success_small(inst, CutoffPolicy(1), Goal::best_choice()) ==
        Catch::Approx(1.0 / 3.0).margin(1e-12));
  CHECK(exact_success_small(inst, CutoffPolicy(3), Goal::best_choice()) ==
        Catch::Approx(1.0 / 3.0).margin(1e-12));

  // Single deterministic value, accept-all.
  Instance one;
  one.distributions = {Distribution::two_point(2.0, 1.0)};
  ThresholdPolicy accept_all(Observation{-inf, 0.0});
  CHECK(exact_success_small(one, accept_all, Goal::best_choice()) == Catch::Approx(1.0));

  // Two i.i.d. two-point laws, random order, threshold between the atoms:
  // outcomes (0,0) fail, (1,0) and (0,1) succeed, (1,1) succeeds half the
  // time (the accepted copy is the strict max with probability 1/2).
  Instance two;
  two.distributions = {Distribution::two_point(1.0, 0.5), Distribution::two_point(1.0, 0.5)};
  ThresholdPolicy point5(Observation{0.5, 1.0});
  CHECK(exact_success_small(two, point5, Goal::best_choice()) ==
        Catch::Approx(0.625).margin(1e-12));

  CHECK_THROWS_AS(exact_success_small(make_named_instance("iid-uniform:2"), point5,
                                      Goal::best_choice()),
                  std::invalid_argument);
  Instance big;
  big.distributions.assign(12, Distribution::two_point(1.0, 0.5));
  big.order = OrderModel::uniform_random();  // 2^12 outcomes x 12! orders
  CHECK_THROWS_AS(exact_success_small(big, CutoffPolicy(2), Goal::best_choice()), TooLargeError);
}

TEST_CASE("exact evaluation agrees with Monte Carlo on random discrete instances") {
  Rng rng(808);
  for (int rep = 0; rep < 50; ++rep) {
    Instance inst;
    const std::size_t n = 2 + rng.below(3);
    for (std::size_t i = 0; i < n; ++i)
      inst.distributions.push_back(
          Distribution::two_point(0.5 + rng.uniform() * 2.0, 0.2 + 0.6 * rng.uniform()));
    const double tau = 0.25 + 1.9 * rng.uniform();
    ThresholdPolicy pol(Observation{tau, 1.0});
    Goal goal = rep % 2 == 0 ? Goal::best_choice() : Goal::top_k(2);

    const double exact = exact_success_small(inst, pol, goal);
    McEstimate est = estimate(inst, pol, goal, 100000, derive_seed(900, rep), 0.99, 2);
    const double se = std::sqrt(std::max(exact * (1 - exact), 1e-6) / double(est.trials));
    CHECK(std::abs(est.point - exact) <= 4.0 * se + 1e-9);
  }
}

TEST_CASE("top-1 goal coincides with best-choice trial by trial") {
  Instance inst = make_named_instance("iid-uniform:5");
  ThresholdPolicy pol = pi_single_threshold(inst);
  detail::TrialWorkspace ws;
  for (std::uint64_t t = 0; t < 2000; ++t) {
    Rng r1(derive_seed(5, t)), r2(derive_seed(5, t));
    auto a = detail::run_trial_ws(inst, pol, Goal::best_choice(), r1, ws);
    auto b = detail::run_trial_ws(inst, pol, Goal::top_k(1), r2, ws);
    REQUIRE(a.success == b.success);
  }
}

TEST_CASE("uniform random order places each distribution uniformly") {
  Instance inst = make_named_instance("iid-uniform:6");
  ThresholdPolicy never(Observation{inf, 1.0});
  std::vector<std::uint64_t> position_counts(6, 0);
  detail::TrialWorkspace ws;
  const std::uint64_t trials = 100000;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(66, t));
    detail::run_trial_ws(inst, never, Goal::best_choice(), rng, ws);
    for (std::size_t pos = 0; pos < 6; ++pos)
      if (ws.arrival[pos] == 0) ++position_counts[pos];
  }
  CHECK(test_util::chi_square_uniform(position_counts) < test_util::chi_square_crit_99(5));
}

TEST_CASE("adversarial fixed order is honored") {
  Instance inst;
  inst.distributions = {Distribution::two_point(1.0, 1.0), Distribution::two_point(2.0, 1.0),
                        Distribution::two_point(3.0, 1.0)};
  inst.order = OrderModel::adversarial({2, 0, 1});
  ThresholdPolicy accept_all(Observation{-inf, 0.0});
  Rng rng(3);
  TrialOutcome out = run_trial(inst, accept_all, Goal::best_choice(), rng);
  CHECK(out.accepted_identity == 2);
  CHECK(out.accepted_value == 3.0);
  CHECK(out.success);
}

TEST_CASE("randomized policies are rejected by the exact evaluator") {
  struct CoinPolicy : Policy {
    bool decide(std::size_t, const Observation&, std::size_t, Rng& rng) override {
      return rng.uniform() < 0.5;
    }
    std::unique_ptr<Policy> clone() const override { return std::make_unique<CoinPolicy>(*this); }
  };
  Instance inst = hard_instance(3);
  CoinPolicy pol;
  CHECK_THROWS_AS(exact_success_small(inst, pol, Goal::best_choice()), std::invalid_argument);
}
