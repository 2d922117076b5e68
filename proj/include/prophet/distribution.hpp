#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "prophet/errors.hpp"
#include "prophet/rng.hpp"

namespace prophet {

// An observed value augmented with an independent uniform used to break
// ties between equal values.  Comparison is lexicographic on (value, aux),
// so comparisons between atomless draws reduce to the value alone almost
// surely, while thresholds placed on atoms can realize any target
// exceedance probability exactly.
struct Observation {
  double value = 0.0;
  double aux = 1.0;

  friend constexpr auto operator<=>(const Observation&, const Observation&) = default;
};

constexpr double inf = std::numeric_limits<double>::infinity();

class Distribution;

struct UniformSpec {
  double lo, hi;
};
struct ExponentialSpec {
  double rate;
};
// Takes `value` with probability `prob`, otherwise 0.
struct TwoPointSpec {
  double value, prob;
};
struct ScaledShiftSpec {
  std::shared_ptr<const Distribution> inner;
  double scale, shift;
};
struct DiscreteSpec {
  std::vector<double> values;  // strictly increasing
  std::vector<double> probs;
  std::vector<double> cum;  // inclusive prefix sums, back() == 1
};
// Law with CDF F_inner(x)^exponent.
struct CdfPowerSpec {
  std::shared_ptr<const Distribution> inner;
  double exponent;
};
// Law of max over independent members; CDF is the product of member CDFs.
struct MaxOfSpec {
  std::vector<Distribution> members;
};
struct MixtureSpec {
  std::vector<double> weights;
  std::vector<Distribution> components;
};

using DistributionNode = std::variant<UniformSpec, ExponentialSpec, TwoPointSpec,
                                      ScaledShiftSpec, DiscreteSpec, CdfPowerSpec,
                                      MaxOfSpec, MixtureSpec>;

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace detail

// Immutable probability law with exact CDF / left-CDF / point-mass / quantile
// evaluation and inverse-transform (or compositional) sampling.  Values are
// cheap to copy and safe to share across threads; sampling takes the
// caller's RNG.
class Distribution {
 public:
  static Distribution uniform(double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("uniform: requires hi > lo (zero-width rejected)");
    return Distribution(UniformSpec{lo, hi});
  }

  static Distribution exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
    return Distribution(ExponentialSpec{rate});
  }

  // prob in [0,1]; deterministic laws (prob 0 or 1) are allowed.
  static Distribution two_point(double value, double prob) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("two_point: prob must be in [0,1]");
    return Distribution(TwoPointSpec{value, prob});
  }

  static Distribution scaled_shift(Distribution inner, double scale, double shift) {
    if (!(scale > 0.0)) throw std::invalid_argument("scaled_shift: scale must be positive");
    return Distribution(ScaledShiftSpec{std::make_shared<const Distribution>(std::move(inner)), scale, shift});
  }

  static Distribution discrete(std::vector<std::pair<double, double>> atoms) {
    if (atoms.empty()) throw std::invalid_argument("discrete: needs at least one atom");
    std::sort(atoms.begin(), atoms.end());
    DiscreteSpec d;
    for (const auto& [v, p] : atoms) {
      if (p < 0.0) throw std::invalid_argument("discrete: negative atom probability");
      if (!d.values.empty() && d.values.back() == v) {
        d.probs.back() += p;  // merge duplicates
      } else {
        d.values.push_back(v);
        d.probs.push_back(p);
      }
    }
    double cum = 0.0;
    for (double p : d.probs) {
      cum += p;
      d.cum.push_back(cum);
    }
    if (std::abs(cum - 1.0) > 1e-12) throw std::invalid_argument("discrete: atom probabilities must sum to 1");
    d.cum.back() = 1.0;
    return Distribution(std::move(d));
  }

  static Distribution cdf_power(Distribution inner, double exponent) {
    if (!(exponent > 0.0)) throw std::invalid_argument("cdf_power: exponent must be positive");
    return Distribution(CdfPowerSpec{std::make_shared<const Distribution>(std::move(inner)), exponent});
  }

  static Distribution max_of(std::vector<Distribution> members) {
    if (members.empty()) throw std::invalid_argument("max_of: needs at least one member");
    if (members.size() == 1) return members.front();
    return Distribution(MaxOfSpec{std::move(members)});
  }

  static Distribution mixture(std::vector<std::pair<double, Distribution>> components) {
    if (components.empty()) throw std::invalid_argument("mixture: needs at least one component");
    MixtureSpec m;
    double total = 0.0;
    for (auto& [w, d] : components) {
      if (w < 0.0) throw std::invalid_argument("mixture: negative weight");
      total += w;
      m.weights.push_back(w);
      m.components.push_back(std::move(d));
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture: weights must sum to 1");
    return Distribution(std::move(m));
  }

  const DistributionNode& node() const { return *node_; }

  // Pr[X <= x]
  double cdf(double x) const {
    return std::visit(
        detail::overloaded{
            [&](const UniformSpec& u) {
              if (x <= u.lo) return 0.0;
              if (x >= u.hi) return 1.0;
              return (x - u.lo) / (u.hi - u.lo);
            },
            [&](const ExponentialSpec& e) { return x <= 0.0 ? 0.0 : -std::expm1(-e.rate * x); },
            [&](const TwoPointSpec& t) {
              double c = 0.0;
              if (x >= 0.0) c += 1.0 - t.prob;
              if (x >= t.value) c += t.prob;
              return std::min(c, 1.0);
            },
            [&](const ScaledShiftSpec& s) { return s.inner->cdf((x - s.shift) / s.scale); },
            [&](const DiscreteSpec& d) {
              auto it = std::upper_bound(d.values.begin(), d.values.end(), x);
              if (it == d.values.begin()) return 0.0;
              return d.cum[static_cast<std::size_t>(it - d.values.begin()) - 1];
            },
            [&](const CdfPowerSpec& c) { return std::pow(c.inner->cdf(x), c.exponent); },
            [&](const MaxOfSpec& m) {
              double p = 1.0;
              for (const auto& d : m.members) {
                p *= d.cdf(x);
                if (p == 0.0) break;
              }
              return p;
            },
            [&](const MixtureSpec& m) {
              double p = 0.0;
              for (std::size_t i = 0; i < m.components.size(); ++i)
                p += m.weights[i] * m.components[i].cdf(x);
              return std::min(p, 1.0);
            }},
        *node_);
  }

  // Pr[X < x]
  double cdf_left(double x) const {
    return std::visit(
        detail::overloaded{
            [&](const UniformSpec&) { return cdf(x); },
            [&](const ExponentialSpec&) { return cdf(x); },
            [&](const TwoPointSpec& t) {
              double c = 0.0;
              if (x > 0.0) c += 1.0 - t.prob;
              if (x > t.value) c += t.prob;
              return std::min(c, 1.0);
            },
            [&](const ScaledShiftSpec& s) { return s.inner->cdf_left((x - s.shift) / s.scale); },
            [&](const DiscreteSpec& d) {
              auto it = std::lower_bound(d.values.begin(), d.values.end(), x);
              if (it == d.values.begin()) return 0.0;
              return d.cum[static_cast<std::size_t>(it - d.values.begin()) - 1];
            },
            [&](const CdfPowerSpec& c) { return std::pow(c.inner->cdf_left(x), c.exponent); },
            [&](const MaxOfSpec& m) {
              double p = 1.0;
              for (const auto& d : m.members) {
                p *= d.cdf_left(x);
                if (p == 0.0) break;
              }
              return p;
            },
            [&](const MixtureSpec& m) {
              double p = 0.0;
              for (std::size_t i = 0; i < m.components.size(); ++i)
                p += m.weights[i] * m.components[i].cdf_left(x);
              return std::min(p, 1.0);
            }},
        *node_);
  }

  // Pr[X == x]
  double point_mass(double x) const {
    double m = cdf(x) - cdf_left(x);
    return m > 0.0 ? m : 0.0;
  }

  // Pr[(X, aux) < threshold] under the lexicographic tie-break order.
  double cdf_below_threshold(const Observation& threshold) const {
    return cdf_left(threshold.value) + point_mass(threshold.value) * threshold.aux;
  }

  // Generalized inverse: inf{x : cdf(x) >= p}.
  double quantile(double p) const {
    if (p <= 0.0) return support_lo();
    if (p >= 1.0) return support_hi();
    return std::visit(
        detail::overloaded{
            [&](const UniformSpec& u) { return u.lo + p * (u.hi - u.lo); },
            [&](const ExponentialSpec& e) { return -std::log1p(-p) / e.rate; },
            [&](const TwoPointSpec& t) {
              if (t.value > 0.0) return p <= 1.0 - t.prob ? 0.0 : t.value;
              if (t.value < 0.0) return p <= t.prob ? t.value : 0.0;
              return 0.0;
            },
            [&](const ScaledShiftSpec& s) { return s.scale * s.inner->quantile(p) + s.shift; },
            [&](const DiscreteSpec& d) {
              auto it = std::lower_bound(d.cum.begin(), d.cum.end(), p);
              return d.values[static_cast<std::size_t>(it - d.cum.begin())];
            },
            [&](const CdfPowerSpec& c) { return c.inner->quantile(std::pow(p, 1.0 / c.exponent)); },
            [&](const MaxOfSpec&) { return numeric_quantile(p); },
            [&](const MixtureSpec&) { return numeric_quantile(p); }},
        *node_);
  }

  // One draw.  Inverse transform where a closed-form quantile exists,
  // compositional otherwise (max of member draws, weighted component pick).
  double sample(Rng& rng) const {
    return std::visit(
        detail::overloaded{
            [&](const UniformSpec& u) { return u.lo + rng.uniform() * (u.hi - u.lo); },
            [&](const ExponentialSpec& e) { return -std::log1p(-rng.uniform()) / e.rate; },
            [&](const TwoPointSpec& t) { return rng.uniform() < t.prob ? t.value : 0.0; },
            [&](const ScaledShiftSpec& s) { return s.scale * s.inner->sample(rng) + s.shift; },
            [&](const DiscreteSpec& d) {
              double u = rng.uniform();
              auto it = std::upper_bound(d.cum.begin(), d.cum.end(), u);
              if (it == d.cum.end()) --it;
              return d.values[static_cast<std::size_t>(it - d.cum.begin())];
            },
            [&](const CdfPowerSpec& c) {
              return c.inner->quantile(std::pow(rng.uniform(), 1.0 / c.exponent));
            },
            [&](const MaxOfSpec& m) {
              double best = -inf;
              for (const auto& d : m.members) best = std::max(best, d.sample(rng));
              return best;
            },
            [&](const MixtureSpec& m) {
              double u = rng.uniform();
              double cum = 0.0;
              for (std::size_t i = 0; i < m.components.size(); ++i) {
                cum += m.weights[i];
                if (u < cum) return m.components[i].sample(rng);
              }
              return m.components.back().sample(rng);
            }},
        *node_);
  }

  double support_lo() const {
    return std::visit(
        detail::overloaded{
            [&](const UniformSpec& u) { return u.lo; },
            [&](const ExponentialSpec&) { return 0.0; },
            [&](const TwoPointSpec& t) {
              if (t.prob >= 1.0) return t.value;
              if (t.prob <= 0.0) return 0.0;
              return std::min(0.0, t.value);
            },
            [&](const ScaledShiftSpec& s) { return s.scale * s.inner->support_lo() + s.shift; },
            [&](const DiscreteSpec& d) { return d.values.front(); },
            [&](const CdfPowerSpec& c) { return c.inner->support_lo(); },
            [&](const MaxOfSpec& m) {
              double lo = -inf;
              for (const auto& d : m.members) lo = std::max(lo, d.support_lo());
              return lo;
            },
            [&](const MixtureSpec& m) {
              double lo = inf;
              for (std::size_t i = 0; i < m.components.size(); ++i)
                if (m.weights[i] > 0.0) lo = std::min(lo, m.components[i].support_lo());
              return lo;
            }},
        *node_);
  }

  double support_hi() const {
    return std::visit(
        detail::overloaded{
            [&](const UniformSpec& u) { return u.hi; },
            [&](const ExponentialSpec&) { return inf; },
            [&](const TwoPointSpec& t) {
              if (t.prob >= 1.0) return t.value;
              if (t.prob <= 0.0) return 0.0;
              return std::max(0.0, t.value);
            },
            [&](const ScaledShiftSpec& s) { return s.scale * s.inner->support_hi() + s.shift; },
            [&](const DiscreteSpec& d) { return d.values.back(); },
            [&](const CdfPowerSpec& c) { return c.inner->support_hi(); },
            [&](const MaxOfSpec& m) {
              double hi = -inf;
              for (const auto& d : m.members) hi = std::max(hi, d.support_hi());
              return hi;
            },
            [&](const MixtureSpec& m) {
              double hi = -inf;
              for (std::size_t i = 0; i < m.components.size(); ++i)
                if (m.weights[i] > 0.0) hi = std::max(hi, m.components[i].support_hi());
              return hi;
            }},
        *node_);
  }

  // Candidate atom locations (superset of actual atoms); used to snap
  // numeric root finds onto exact atom values.
  void collect_atoms(std::vector<double>& out) const {
    std::visit(detail::overloaded{
                   [&](const UniformSpec&) {},
                   [&](const ExponentialSpec&) {},
                   [&](const TwoPointSpec& t) {
                     if (t.prob < 1.0) out.push_back(0.0);
                     if (t.prob > 0.0) out.push_back(t.value);
                   },
                   [&](const ScaledShiftSpec& s) {
                     std::vector<double> inner;
                     s.inner->collect_atoms(inner);
                     for (double a : inner) out.push_back(s.scale * a + s.shift);
                   },
                   [&](const DiscreteSpec& d) {
                     for (std::size_t i = 0; i < d.values.size(); ++i)
                       if (d.probs[i] > 0.0) out.push_back(d.values[i]);
                   },
                   [&](const CdfPowerSpec& c) { c.inner->collect_atoms(out); },
                   [&](const MaxOfSpec& m) {
                     for (const auto& d : m.members) d.collect_atoms(out);
                   },
                   [&](const MixtureSpec& m) {
                     for (std::size_t i = 0; i < m.components.size(); ++i)
                       if (m.weights[i] > 0.0) m.components[i].collect_atoms(out);
                   }},
               *node_);
  }

  bool atomless() const {
    std::vector<double> atoms;
    collect_atoms(atoms);
    for (double a : atoms)
      if (point_mass(a) > 0.0) return false;
    return true;
  }

  // Structural equality (used to detect exchangeable i.i.d. instances).
  friend bool operator==(const Distribution& a, const Distribution& b) {
    if (a.node_ == b.node_) return true;
    if (a.node_->index() != b.node_->index()) return false;
    return std::visit(
        detail::overloaded{
            [&](const UniformSpec& u) {
              const auto& o = std::get<UniformSpec>(*b.node_);
              return u.lo == o.lo && u.hi == o.hi;
            },
            [&](const ExponentialSpec& e) { return e.rate == std::get<ExponentialSpec>(*b.node_).rate; },
            [&](const TwoPointSpec& t) {
              const auto& o = std::get<TwoPointSpec>(*b.node_);
              return t.value == o.value && t.prob == o.prob;
            },
            [&](const ScaledShiftSpec& s) {
              const auto& o = std::get<ScaledShiftSpec>(*b.node_);
              return s.scale == o.scale && s.shift == o.shift && *s.inner == *o.inner;
            },
            [&](const DiscreteSpec& d) {
              const auto& o = std::get<DiscreteSpec>(*b.node_);
              return d.values == o.values && d.probs == o.probs;
            },
            [&](const CdfPowerSpec& c) {
              const auto& o = std::get<CdfPowerSpec>(*b.node_);
              return c.exponent == o.exponent && *c.inner == *o.inner;
            },
            [&](const MaxOfSpec& m) {
              const auto& o = std::get<MaxOfSpec>(*b.node_);
              return m.members == o.members;
            },
            [&](const MixtureSpec& m) {
              const auto& o = std::get<MixtureSpec>(*b.node_);
              return m.weights == o.weights && m.components == o.components;
            }},
        *a.node_);
  }

  // A finite interior point used to seed bracket expansion when the
  // support is unbounded.
  double quantile_center() const {
    return std::visit(detail::overloaded{
                          [&](const MaxOfSpec& m) {
                            double c = -inf;
                            for (const auto& d : m.members) c = std::max(c, d.quantile_center());
                            return c;
                          },
                          [&](const MixtureSpec& m) {
                            double c = -inf;
                            for (std::size_t i = 0; i < m.components.size(); ++i)
                              if (m.weights[i] > 0.0)
                                c = std::max(c, m.components[i].quantile_center());
                            return c;
                          },
                          [&](const CdfPowerSpec& c) { return c.inner->quantile_center(); },
                          [&](const auto&) { return quantile(0.5); }},
                      *node_);
  }

 private:
  explicit Distribution(DistributionNode node)
      : node_(std::make_shared<const DistributionNode>(std::move(node))) {}

  double numeric_quantile(double p) const;

  std::shared_ptr<const DistributionNode> node_;
};

namespace detail {

// Smallest x with cdf(x) >= p for a nondecreasing CDF functor.  Brackets by
// doubling outward from `center` when the support side is unbounded, then
// bisects; converges to the generalized inverse (a jump point when p lands
// inside an atom).
template <class CdfFn>
double monotone_quantile(const CdfFn& cdf, double p, double support_lo, double support_hi,
                         double center) {
  double lo, hi;
  if (std::isfinite(support_hi)) {
    hi = support_hi;
  } else {
    hi = std::isfinite(center) ? center : 0.0;
    double step = std::max(1.0, std::abs(hi));
    int tries = 0;
    while (cdf(hi) < p) {
      hi += step;
      step *= 2.0;
      if (++tries > 200) throw NoBracketError("monotone_quantile: failed to bracket above");
    }
  }
  if (std::isfinite(support_lo)) {
    if (cdf(support_lo) >= p) return support_lo;
    lo = support_lo;
  } else {
    lo = std::min(hi, std::isfinite(center) ? center : 0.0);
    double step = std::max(1.0, std::abs(lo));
    int tries = 0;
    while (cdf(lo) >= p) {
      lo -= step;
      step *= 2.0;
      if (++tries > 200) throw NoBracketError("monotone_quantile: failed to bracket below");
    }
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) >= p)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace detail

inline double Distribution::numeric_quantile(double p) const {
  auto f = [this](double x) { return cdf(x); };
  double q = detail::monotone_quantile(f, p, support_lo(), support_hi(), quantile_center());
  // Snap onto an exact atom value if the solve converged next to one.  The
  // CDF bracket conditions make a generous tolerance safe: an atom with
  // cdf_left <= p <= cdf is the generalized inverse at p.
  std::vector<double> atoms;
  collect_atoms(atoms);
  double best = q;
  double best_dist = inf;
  const double tol = 1e-9 * std::max(1.0, std::abs(q));
  for (double a : atoms) {
    double d = std::abs(a - q);
    if (d <= tol && d < best_dist && cdf(a) >= p && cdf_left(a) <= p) {
      best = a;
      best_dist = d;
    }
  }
  return best;
}

// Law of max over a set of independent distributions: CDF is the product of
// member CDFs, sampling draws every member and keeps the largest.
inline Distribution collection_distribution(std::vector<Distribution> members) {
  return Distribution::max_of(std::move(members));
}

// Law whose m-fold independent max recovers d: CDF is F_d^(1/m).
inline Distribution nth_root_factorization(const Distribution& d, std::size_t m) {
  if (m == 0) throw std::invalid_argument("nth_root_factorization: m must be >= 1");
  if (m == 1) return d;
  return Distribution::cdf_power(d, 1.0 / static_cast<double>(m));
}

// Law with CDF (prod_i F_i(x))^(1/n): n i.i.d. copies of it have the same
// max-law as the original collection.
inline Distribution geometric_mean_distribution(std::vector<Distribution> members) {
  if (members.empty())
    throw std::invalid_argument("geometric_mean_distribution: empty collection");
  const double n = static_cast<double>(members.size());
  if (members.size() == 1) return members.front();
  return Distribution::cdf_power(Distribution::max_of(std::move(members)), 1.0 / n);
}

}  // namespace prophet
