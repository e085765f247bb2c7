#include "dirmap/angle.hpp"

#include <cmath>
#include <stdexcept>

namespace dirmap {

double wrap(double theta) {
  if (!std::isfinite(theta)) {
    throw std::domain_error("wrap: angle is not finite");
  }
  if (theta > -kPi && theta <= kPi) {
    return theta;
  }
  double r = std::fmod(theta + kPi, kTwoPi);
  if (r <= 0.0) {
    r += kTwoPi;
  }
  const double out = r - kPi;
  // r can be a tiny positive remainder that rounds onto -pi.
  return out <= -kPi ? kPi : out;
}

double angular_difference(Angle a, Angle b) {
  return wrap(a.radians() - b.radians());
}

double angular_distance(Angle a, Angle b) {
  return std::abs(angular_difference(a, b));
}

}  // namespace dirmap
