#pragma once

#include <cmath>
#include <numbers>

namespace ibfit {

// log of the standard-normal upper tail Q(z) = P(Z >= z), accurate far
// into both tails.
inline double log_normal_upper_tail(double z) {
  if (z < 8.0) return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
  // Laplace continued fraction for the Mills ratio, evaluated bottom-up.
  double frac = z;
  for (int k = 60; k >= 1; --k) frac = z + k / frac;
  const double log_phi = -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
  return log_phi - std::log(frac);
}

// Two-sided standard-normal tail mass beyond |r|.
inline double two_sided_normal_p(double r) {
  return std::erfc(std::abs(r) / std::numbers::sqrt2);
}

}  // namespace ibfit
