#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "prophet/stats.hpp"

namespace prophet {

// Success rate of a single-threshold rule on a random-order stream whose
// above-threshold count is Poisson(lambda): sum_{k>=1} (1/k) lambda^k e^-lambda / k!.
struct PoissonSeriesResult {
  double lambda = 0.0;
  double value = 0.0;
  int truncation_k = 0;
  double truncation_error_bound = 0.0;
};

inline PoissonSeriesResult poisson_success_series(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("poisson_success_series: lambda must be positive");
  PoissonSeriesResult r;
  r.lambda = lambda;
  double pk = std::exp(-lambda);  // Poisson pmf at k, upward recurrence
  KahanSum sum;
  int k = 0;
  for (;;) {
    ++k;
    pk *= lambda / k;
    sum.add(pk / k);
    // Tail beyond k is geometrically dominated once k+1 > lambda.
    if (double(k + 1) > lambda) {
      double bound = pk / (1.0 - lambda / double(k + 1));
      if (bound < 1e-15) {
        r.truncation_k = k;
        r.truncation_error_bound = bound;
        break;
      }
    }
    if (k > 10000) throw std::logic_error("poisson_success_series: did not converge");
  }
  r.value = sum.value();
  return r;
}

struct LambdaStar {
  double lambda = 0.0;
  double value = 0.0;
};

// Golden-section maximization of the success series over [0.5, 3.0]; the
// optimum is interior (a unimodality probe guards the bracket in tests).
inline LambdaStar optimize_lambda() {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.5, b = 3.0;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = poisson_success_series(x1).value;
  double f2 = poisson_success_series(x2).value;
  while (b - a > 1e-8) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = poisson_success_series(x2).value;
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = poisson_success_series(x1).value;
    }
  }
  LambdaStar out;
  out.lambda = 0.5 * (a + b);
  out.value = poisson_success_series(out.lambda).value;
  return out;
}

// Cached optimizer result: the single source of truth for the constant.
inline const LambdaStar& lambda_star() {
  static const LambdaStar cached = optimize_lambda();
  return cached;
}

// Exact law of a sum of independent Bernoulli variables, by iterative
// convolution.  For long inputs the support window is trimmed where the
// tail mass drops below 1e-18 per point; the clipped total is tracked so
// error stays auditable.
struct PoissonBinomial {
  std::size_t n = 0;
  std::size_t offset = 0;       // pmf[i] = Pr[count == offset + i]
  std::vector<double> pmf;
  double clipped_mass = 0.0;
  double mean_target = 0.0;     // sum p_i

  double prob(std::size_t k) const {
    if (k < offset || k >= offset + pmf.size()) return 0.0;
    return pmf[k - offset];
  }
  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) m += double(offset + i) * pmf[i];
    return m;
  }
  double variance() const {
    double mu = mean(), v = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      double d = double(offset + i) - mu;
      v += d * d * pmf[i];
    }
    return v;
  }
};

inline PoissonBinomial poisson_binomial_pmf(std::span<const double> probs) {
  if (probs.size() > 100000)
    throw std::invalid_argument("poisson_binomial_pmf: n is capped at 1e5");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("poisson_binomial_pmf: probabilities must be in [0,1]");
  constexpr double clip = 1e-18;
  PoissonBinomial out;
  out.n = probs.size();
  out.pmf = {1.0};
  for (double p : probs) {
    out.mean_target += p;
    std::vector<double>& f = out.pmf;
    f.push_back(0.0);
    for (std::size_t k = f.size() - 1; k > 0; --k) f[k] = f[k] * (1.0 - p) + f[k - 1] * p;
    f[0] *= (1.0 - p);
    // trim negligible edges
    std::size_t lo = 0;
    while (lo + 1 < f.size() && f[lo] < clip) {
      out.clipped_mass += f[lo];
      ++lo;
    }
    std::size_t hi = f.size();
    while (hi > lo + 1 && f[hi - 1] < clip) {
      out.clipped_mass += f[hi - 1];
      --hi;
    }
    if (lo > 0 || hi < f.size()) {
      std::vector<double> trimmed(f.begin() + lo, f.begin() + hi);
      f = std::move(trimmed);
      out.offset += lo;
    }
  }
  return out;
}

// Exact L1 distance between the Poisson binomial law of `probs` and the
// Poisson law with matching mean, next to the Le Cam bound 2 sum p_i^2.
struct LeCamResult {
  double tv_exact = 0.0;
  double bound = 0.0;
  double lambda = 0.0;
};

inline LeCamResult lecam_check(std::span<const double> probs) {
  LeCamResult r;
  for (double p : probs) r.bound += 2.0 * p * p;
  PoissonBinomial pb = poisson_binomial_pmf(probs);
  r.lambda = pb.mean_target;

  if (r.lambda == 0.0) {
    // Poisson(0) is a point mass at zero; the Poisson binomial is too.
    r.tv_exact = std::abs(pb.prob(0) - 1.0) + (1.0 - pb.prob(0));
    return r;
  }
  double pois = std::exp(-r.lambda);
  double pois_cum = 0.0;
  KahanSum tv;
  std::size_t k = 0;
  const std::size_t k_end = pb.offset + pb.pmf.size();
  for (;;) {
    tv.add(std::abs(pb.prob(k) - pois));
    pois_cum += pois;
    ++k;
    if (k >= k_end && double(k) > r.lambda && 1.0 - pois_cum < 1e-15) break;
    if (k > 2000000) break;
    pois *= r.lambda / double(k);
  }
  // Remaining Poisson tail has no Poisson-binomial mass against it (beyond
  // the clipped sliver, accounted separately).
  tv.add(std::max(0.0, 1.0 - pois_cum));
  tv.add(pb.clipped_mass);
  r.tv_exact = tv.value();
  return r;
}

// Failure exponent for the expected-above-count tuning of the top-k rule:
// both miss events (no value above threshold / more than k above) decay
// like e^{-gamma k} when the threshold targets gamma*k, with
// gamma = (3 - sqrt 5)/2 equalizing the two exponents.
inline double topk_gamma() { return (3.0 - std::sqrt(5.0)) / 2.0; }

struct KlChernoffBounds {
  double p_zero_bound = 0.0;  // no value clears the threshold
  double p_over_bound = 0.0;  // more than k values clear it
  double total() const { return p_zero_bound + p_over_bound; }
};

// Closed-form KL/Chernoff bounds at the half-k warm-up intensity (k/2
// expected above): e^{-k/4} and e^{-k/2}.
inline KlChernoffBounds kl_chernoff_warmup(std::size_t k, std::size_t n) {
  if (!(k > 0 && k < n)) throw std::invalid_argument("kl_chernoff_warmup: need 0 < k < n");
  return KlChernoffBounds{std::exp(-double(k) / 4.0), std::exp(-double(k) / 2.0)};
}

// Bounds at the tuned intensity gamma*k: e^{-gamma k} for both events.
inline KlChernoffBounds kl_chernoff_gamma(std::size_t k, std::size_t n) {
  if (!(k > 0 && k < n)) throw std::invalid_argument("kl_chernoff_gamma: need 0 < k < n");
  double b = std::exp(-topk_gamma() * double(k));
  return KlChernoffBounds{b, b};
}

// Compares the Bernoulli-sum mean for probabilities p_i against n copies of
// their geometric mean: the heterogeneous sum always has the larger mean
// but the smaller all-zero probability.
struct ExtremalComparison {
  double mean_x = 0.0;  // sum p_i
  double mean_y = 0.0;  // n * (prod p_i)^(1/n)
  double p0_x = 0.0;    // prod (1 - p_i)
  double p0_y = 0.0;    // (1 - geo mean)^n
};

inline ExtremalComparison extremal_comparison(std::span<const double> probs) {
  if (probs.empty()) throw std::invalid_argument("extremal_comparison: empty input");
  ExtremalComparison r;
  double log_prod = 0.0;
  double p0 = 1.0;
  for (double p : probs) {
    if (!(p > 0.0 && p < 1.0))
      throw std::invalid_argument("extremal_comparison: probabilities must be in (0,1)");
    r.mean_x += p;
    log_prod += std::log(p);
    p0 *= (1.0 - p);
  }
  const double n = double(probs.size());
  const double geo = std::exp(log_prod / n);
  r.mean_y = n * geo;
  r.p0_x = p0;
  r.p0_y = std::pow(1.0 - geo, n);
  if (r.mean_x < r.mean_y - 1e-12)
    throw std::logic_error("extremal_comparison: AM-GM violated (numerical fault)");
  return r;
}

}  // namespace prophet
