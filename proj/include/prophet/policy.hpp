#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "prophet/distribution.hpp"
#include "prophet/rng.hpp"

namespace prophet {

inline constexpr std::size_t no_identity = static_cast<std::size_t>(-1);

// Accept/reject rule over an observation stream.  The simulator calls
// reset() once per trial, then decide() per observation until the first
// accept.  Randomized policies draw from the injected RNG only; cloning
// gives each worker thread an independent copy.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void reset() {}
  // step is 1-based; identity is the index of the arriving distribution or
  // no_identity when the instance does not expose it.  Returns true to accept.
  virtual bool decide(std::size_t step, const Observation& obs, std::size_t identity,
                      Rng& rng) = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;
};

// Accepts the first observation at step t with obs >= thresholds[t] under
// the tie-break order.  A single stored threshold applies to every step.
// With candidate_only set, only observations that are running maxima are
// eligible (used by the per-step optimal rule, where accepting a value that
// is already beaten cannot win).
class ThresholdPolicy : public Policy {
 public:
  explicit ThresholdPolicy(Observation threshold, bool candidate_only = false)
      : thresholds_{threshold}, candidate_only_(candidate_only) {}

  explicit ThresholdPolicy(std::vector<Observation> per_step, bool candidate_only = false)
      : thresholds_(std::move(per_step)), candidate_only_(candidate_only) {
    if (thresholds_.empty()) throw std::invalid_argument("ThresholdPolicy: no thresholds");
  }

  void reset() override { running_max_.reset(); }

  bool decide(std::size_t step, const Observation& obs, std::size_t, Rng&) override {
    if (candidate_only_) {
      if (running_max_ && !(obs > *running_max_)) return false;
      running_max_ = obs;
    }
    const Observation& thr =
        thresholds_[std::min(step - 1, thresholds_.size() - 1)];
    return obs >= thr;
  }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<ThresholdPolicy>(*this);
  }

  const std::vector<Observation>& thresholds() const { return thresholds_; }
  bool candidate_only() const { return candidate_only_; }

 private:
  std::vector<Observation> thresholds_;
  bool candidate_only_ = false;
  std::optional<Observation> running_max_;
};

// Rejects everything before position `cutoff` (1-based), then accepts the
// first nonzero value.
class CutoffPolicy : public Policy {
 public:
  explicit CutoffPolicy(std::size_t cutoff) : cutoff_(cutoff) {
    if (cutoff == 0) throw std::invalid_argument("CutoffPolicy: cutoff is 1-based");
  }

  bool decide(std::size_t step, const Observation& obs, std::size_t, Rng&) override {
    return step >= cutoff_ && obs.value > 0.0;
  }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<CutoffPolicy>(*this);
  }

  std::size_t cutoff() const { return cutoff_; }

 private:
  std::size_t cutoff_;
};

}  // namespace prophet
