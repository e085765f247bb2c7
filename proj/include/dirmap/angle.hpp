#pragma once

#include <numbers>

namespace dirmap {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any finite angle in radians onto the canonical range (-pi, pi].
/// Values already inside the range are returned unchanged; -pi maps to +pi.
/// Throws std::domain_error for non-finite input.
double wrap(double theta);

/// A direction in radians, always held in the canonical range (-pi, pi].
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians) : value_(wrap(radians)) {}

  [[nodiscard]] constexpr double radians() const { return value_; }

  friend bool operator==(Angle, Angle) = default;

 private:
  double value_ = 0.0;
};

/// Length of the shorter arc between two directions, in [0, pi].
double angular_distance(Angle a, Angle b);

/// Signed difference a - b wrapped to (-pi, pi].
double angular_difference(Angle a, Angle b);

}  // namespace dirmap
