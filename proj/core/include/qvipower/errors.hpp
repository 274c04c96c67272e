#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qvipower {

/// Input datum violates an invariant. `field()` names the offending field so
/// callers can produce actionable diagnostics.
class InvalidInstance : public std::runtime_error {
 public:
  InvalidInstance(std::string field, const std::string& detail)
      : std::runtime_error(field + ": " + detail), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A player has zero direct gain on every subchannel; its rate is identically
/// zero and none of the per-player machinery is defined.
class DegenerateChannel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Waterfilling called with a non-positive multiplier.
class InvalidLevel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every effective-noise entry is the +inf sentinel; no subchannel can carry
/// power so no water level exists.
class EmptySupport : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iteration cap was exceeded. For the Dinkelbach solver this signals a
/// numerical pathology; the iterative game solvers report non-convergence
/// through result flags instead so experiment sweeps can continue.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qvipower
