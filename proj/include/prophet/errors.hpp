#pragma once

#include <stdexcept>

namespace prophet {

// The product/sum CDF never attains the requested level on the searchable
// range (degenerate or constant inputs).
struct NoBracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A threshold target is infeasible (e.g. requested expected above-count
// is at least the number of observations).
struct InfeasibleTargetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Derived parameter set is unusable after rounding (empty groups, no bands).
struct InfeasibleParamsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exhaustive enumeration would exceed the configured work bound.
struct TooLargeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A policy requires observing which distribution produced each value, but
// the instance does not expose identities.
struct IdentityUnavailableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace prophet
