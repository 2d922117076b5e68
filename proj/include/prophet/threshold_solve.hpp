#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "prophet/distribution.hpp"
#include "prophet/errors.hpp"

namespace prophet {

namespace detail {

inline double widest_member_center(std::span<const Distribution> dists) {
  double best_width = -1.0;
  double center = 0.0;
  for (const auto& d : dists) {
    double lo = d.support_lo(), hi = d.support_hi();
    double width = (std::isfinite(lo) && std::isfinite(hi)) ? hi - lo : inf;
    if (width > best_width) {
      best_width = width;
      center = d.quantile(0.5);
    }
  }
  return center;
}

inline std::vector<double> all_atoms(std::span<const Distribution> dists) {
  std::vector<double> atoms;
  for (const auto& d : dists) d.collect_atoms(atoms);
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  return atoms;
}

// Given a value x where a nondecreasing functional jumps across `target`,
// solve for the tie-break aux in [0,1] with eval(x, aux) == target.
// eval must be nondecreasing in aux.
template <class EvalFn>
Observation solve_tie_break(double x, double target, const EvalFn& eval) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (eval(x, mid) >= target)
      hi = mid;
    else
      lo = mid;
  }
  return Observation{x, hi};
}

}  // namespace detail

// Threshold tau with prod_i Pr[x_i <= tau] == p, solved by bisection on the
// log of the product CDF (bracket by doubling outward from the median of the
// widest-support member).  When p lands inside an atom of the product CDF,
// the returned observation carries the tie-break aux that attains p exactly:
// Pr[all (x_i, aux_i) below (tau, ybar)] = prod_i (F_i^-(tau) + m_i(tau) ybar).
inline Observation quantile_of_max(std::span<const Distribution> dists, double p) {
  if (dists.empty()) throw std::invalid_argument("quantile_of_max: empty instance");
  if (!(p > 0.0 && p < 1.0)) {
    if (p >= 1.0) {
      double hi = -inf;
      for (const auto& d : dists) hi = std::max(hi, d.support_hi());
      return Observation{hi, 1.0};
    }
    throw std::invalid_argument("quantile_of_max: p must be in (0,1]");
  }

  auto log_prod_cdf = [&](double x) {
    double s = 0.0;
    for (const auto& d : dists) {
      double c = d.cdf(x);
      if (c <= 0.0) return -inf;
      s += std::log(c);
    }
    return s;
  };
  const double log_p = std::log(p);

  double lo_support = -inf, hi_support = -inf;
  for (const auto& d : dists) {
    lo_support = std::max(lo_support, d.support_lo());  // product positive only above this
    hi_support = std::max(hi_support, d.support_hi());
  }

  double x = detail::monotone_quantile(log_prod_cdf, log_p, lo_support, hi_support,
                                       detail::widest_member_center(dists));

  auto eval_aux = [&](double v, double aux) {
    double prod = 1.0;
    for (const auto& d : dists) prod *= d.cdf_left(v) + d.point_mass(v) * aux;
    return prod;
  };

  double prod_at = std::exp(log_prod_cdf(x));
  if (std::abs(prod_at - p) <= 1e-10) return Observation{x, 1.0};

  // Crossed an atom: snap to the exact atom value in the final bracket and
  // solve the tie-break level.
  auto atoms = detail::all_atoms(dists);
  double snap = x;
  double best = inf;
  for (double a : atoms) {
    double d = std::abs(a - x);
    double tol = 1e-9 * std::max(1.0, std::abs(x));
    if (d <= tol && d < best && eval_aux(a, 1.0) >= p - 1e-12 && eval_aux(a, 0.0) <= p + 1e-12) {
      snap = a;
      best = d;
    }
  }
  if (!std::isfinite(best)) {
    throw NoBracketError("quantile_of_max: product CDF never attains target (degenerate input)");
  }
  return detail::solve_tie_break(snap, p, eval_aux);
}

// p_i = Pr[(x_i, aux) >= threshold] under the tie-break order.
inline std::vector<double> above_probs(std::span<const Distribution> dists,
                                       const Observation& threshold) {
  std::vector<double> out;
  out.reserve(dists.size());
  for (const auto& d : dists) out.push_back(1.0 - d.cdf_below_threshold(threshold));
  return out;
}

inline std::vector<double> above_probs(std::span<const Distribution> dists, double tau) {
  return above_probs(dists, Observation{tau, 1.0});
}

// Threshold with sum_i Pr[x_i >= tau] == target expected above-count.
// Infeasible when target >= n (the count cannot reach it).
inline Observation expected_above_threshold(std::span<const Distribution> dists, double target) {
  const double n = static_cast<double>(dists.size());
  if (dists.empty()) throw std::invalid_argument("expected_above_threshold: empty instance");
  if (!(target > 0.0)) throw std::invalid_argument("expected_above_threshold: target must be positive");
  if (target >= n) throw InfeasibleTargetError("expected above-count target >= n is unattainable");

  // sum_i F_i(x) is nondecreasing; we need it to reach n - target.
  auto sum_cdf = [&](double x) {
    double s = 0.0;
    for (const auto& d : dists) s += d.cdf(x);
    return s;
  };
  const double goal = n - target;

  double lo_support = inf, hi_support = -inf;
  for (const auto& d : dists) {
    lo_support = std::min(lo_support, d.support_lo());
    hi_support = std::max(hi_support, d.support_hi());
  }

  double x = detail::monotone_quantile(sum_cdf, goal, lo_support, hi_support,
                                       detail::widest_member_center(dists));

  double sum_at = sum_cdf(x);
  if (std::abs(sum_at - goal) <= 1e-10) return Observation{x, 1.0};

  auto atoms = detail::all_atoms(dists);
  auto left_and_mass = [&](double v) {
    double left = 0.0, mass = 0.0;
    for (const auto& d : dists) {
      left += d.cdf_left(v);
      mass += d.point_mass(v);
    }
    return std::pair{left, mass};
  };
  for (double a : atoms) {
    if (std::abs(a - x) <= 1e-9 * std::max(1.0, std::abs(x))) {
      auto [left, mass] = left_and_mass(a);
      if (mass > 0.0 && left <= goal + 1e-12 && left + mass >= goal - 1e-12) {
        double aux = std::clamp((goal - left) / mass, 0.0, 1.0);
        return Observation{a, aux};
      }
    }
  }
  throw NoBracketError("expected_above_threshold: sum CDF never attains target");
}

}  // namespace prophet
