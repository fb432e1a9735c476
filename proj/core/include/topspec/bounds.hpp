#pragma once

#include <cmath>

#include "topspec/error.hpp"

namespace topspec {

/// Truncation error 2d (1 + A/2d)^{1-2R}.
inline double epsilon_R(int d, double A, int R) {
  if (!(A > 0.0) || R < 1 || d < 1) throw PreconditionError("epsilon_R: need d >= 1, A > 0, R >= 1");
  return 2.0 * d * std::pow(1.0 + A / (2.0 * d), 1.0 - 2.0 * R);
}

/// eta(A) = 2d (1 + A/4d)^{-1}.
inline double eta(int d, double A) { return 2.0 * d / (1.0 + A / (4.0 * d)); }

}  // namespace topspec
