#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace prophet {

// Kahan-compensated accumulator.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

// Inverse of the standard normal CDF (Acklam's rational approximation,
// relative error below 1.15e-9 which is far below any use here).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > phigh) {
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

struct IntervalEstimate {
  double low = 0.0;
  double high = 1.0;
};

// Wilson score interval: stable near success probabilities of 0 and 1.
inline IntervalEstimate wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                        double confidence) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: trials == 0");
  const double z = normal_quantile(0.5 + confidence / 2.0);
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      (z / denom) * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  IntervalEstimate out;
  out.low = std::max(0.0, center - half);
  out.high = std::min(1.0, center + half);
  return out;
}

// Binomial pmf via lgamma: accurate enough (~1e-14 relative) for event
// probability evaluation; exact powers are used where a criterion wants a
// direct power expression.
inline double binomial_pmf(std::uint64_t m, std::uint64_t j, double p) {
  if (j > m) return 0.0;
  if (p <= 0.0) return j == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return j == m ? 1.0 : 0.0;
  double lg = std::lgamma(double(m) + 1) - std::lgamma(double(j) + 1) -
              std::lgamma(double(m - j) + 1);
  return std::exp(lg + double(j) * std::log(p) + double(m - j) * std::log1p(-p));
}

inline double binomial_coefficient(std::uint64_t m, std::uint64_t j) {
  if (j > m) return 0.0;
  j = std::min(j, m - j);
  double r = 1.0;
  for (std::uint64_t i = 1; i <= j; ++i) r = r * double(m - j + i) / double(i);
  return r;
}

// Pr[at least one success] for independent Bernoulli trials.
inline double bernoulli_any_prob(std::span<const double> probs) {
  double none = 1.0;
  for (double p : probs) none *= (1.0 - p);
  return 1.0 - none;
}

// Pr[at least two successes] = 1 - Pr[0] - Pr[exactly 1], exact product form.
inline double bernoulli_ge2_prob(std::span<const double> probs) {
  double none = 1.0;
  for (double p : probs) none *= (1.0 - p);
  double exactly_one = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    double term = probs[j];
    for (std::size_t i = 0; i < probs.size(); ++i)
      if (i != j) term *= (1.0 - probs[i]);
    exactly_one += term;
  }
  double r = 1.0 - none - exactly_one;
  return r < 0.0 ? 0.0 : r;
}

// Ordinary least squares of y on x; returns (slope, intercept, r_squared).
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need two equal-length series");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace prophet
