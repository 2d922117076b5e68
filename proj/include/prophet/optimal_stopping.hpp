#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "prophet/distribution.hpp"
#include "prophet/policy.hpp"

namespace prophet {

// Backward-induction solution of the i.i.d. best-choice stopping problem on
// the quantile scale (distribution-free).  State after step t is the
// quantile u of the running maximum; the continuation value satisfies
//
//   R_n(u) = 0,
//   R_t(u) = u R_{t+1}(u) + Integral_u^1 max(v^{n-t-1}, R_{t+1}(v)) dv,
//
// and a fresh running maximum with quantile v is accepted at step t iff
// v^{n-t} >= R_t(v).  The accept region is an upper interval [u*_t, 1] with
// u*_1 >= ... >= u*_n = 0.
//
// Discretization: uniform grid on [0,1] with linear interpolation.  Cell
// integrals use the exact power antiderivative where v^k dominates at both
// cell ends (the regime that carries all the curvature near v = 1) and the
// trapezoid rule elsewhere, so the grid error stays far below the Monte
// Carlo noise this feeds.
struct QuantileDpResult {
  std::vector<double> accept_quantiles;  // u*_t for t = 1..n
  double predicted_success = 0.0;
};

inline QuantileDpResult best_choice_quantile_dp(std::size_t n, std::size_t grid_points = 4000) {
  if (n == 0) throw std::invalid_argument("best_choice_quantile_dp: n must be >= 1");
  if (grid_points < 1000)
    throw std::invalid_argument("best_choice_quantile_dp: grid must have >= 1000 points");

  // The accept boundary and the power terms vary on scale 1/n near u = 1;
  // the grid must resolve that layer, so it scales with n when the caller's
  // request is too coarse.  Cost is O(n * G).
  const std::size_t G = std::max(grid_points, 4 * n);
  const double h = 1.0 / static_cast<double>(G - 1);
  std::vector<double> u(G), r_next(G, 0.0), r_cur(G), pw(G, 1.0), pw1(G), suffix(G);
  for (std::size_t i = 0; i < G; ++i) u[i] = static_cast<double>(i) * h;
  u[G - 1] = 1.0;

  QuantileDpResult out;
  out.accept_quantiles.assign(n, 0.0);  // u*_n stays 0: final step accepts anything

  for (std::size_t t_plus = n; t_plus-- > 0;) {
    const std::size_t t = t_plus;        // computing R_t from R_{t+1}
    const double k = static_cast<double>(n - t - 1);
    // pw holds u^k, advanced one power per level (k runs 0, 1, ..., n-1).
    for (std::size_t i = 0; i < G; ++i) pw1[i] = pw[i] * u[i];
    suffix[G - 1] = 0.0;
    for (std::size_t i = G - 1; i-- > 0;) {
      double cell;
      if (pw[i] >= r_next[i] && pw[i + 1] >= r_next[i + 1]) {
        cell = (pw1[i + 1] - pw1[i]) / (k + 1.0);
      } else {
        const double fa = std::max(pw[i], r_next[i]);
        const double fb = std::max(pw[i + 1], r_next[i + 1]);
        cell = 0.5 * (fa + fb) * (u[i + 1] - u[i]);
      }
      suffix[i] = suffix[i + 1] + cell;
    }
    for (std::size_t i = 0; i < G; ++i) r_cur[i] = u[i] * r_next[i] + suffix[i];

    if (t >= 1) {
      // Accept iff v^(n-t) >= R_t(v); v^(n-t) == pw1 at this level.
      double ustar = 0.0;
      if (pw1[0] < r_cur[0]) {
        for (std::size_t i = 1; i < G; ++i) {
          const double d_prev = pw1[i - 1] - r_cur[i - 1];
          const double d_here = pw1[i] - r_cur[i];
          if (d_here >= 0.0) {
            ustar = u[i - 1] + (u[i] - u[i - 1]) * (-d_prev) / (d_here - d_prev);
            break;
          }
        }
      }
      out.accept_quantiles[t - 1] = ustar;
    } else {
      out.predicted_success = r_cur[0];
    }
    std::swap(r_next, r_cur);
    std::swap(pw, pw1);
  }
  return out;
}

// Per-step thresholds for n i.i.d. draws of an atomless law, mapped from the
// quantile-scale accept boundaries, plus the DP's own success prediction.
// The policy gates on running maxima: an observation already beaten cannot
// be the overall maximum, so accepting it never wins.
struct IidOptimalPolicy {
  ThresholdPolicy policy;
  std::vector<double> accept_quantiles;
  double predicted_success = 0.0;
};

inline IidOptimalPolicy iid_optimal_policy(const Distribution& d, std::size_t n,
                                           std::size_t grid_points = 4000) {
  if (!d.atomless())
    throw std::invalid_argument("iid_optimal_policy: law must be atomless (use the quantile DP directly otherwise)");
  QuantileDpResult dp = best_choice_quantile_dp(n, grid_points);
  std::vector<Observation> thresholds;
  thresholds.reserve(n);
  for (double ustar : dp.accept_quantiles) {
    if (ustar <= 0.0)
      thresholds.push_back(Observation{-inf, 0.0});  // accept anything
    else
      thresholds.push_back(Observation{d.quantile(ustar), 1.0});
  }
  return IidOptimalPolicy{ThresholdPolicy(std::move(thresholds), /*candidate_only=*/true),
                          std::move(dp.accept_quantiles), dp.predicted_success};
}

}  // namespace prophet
