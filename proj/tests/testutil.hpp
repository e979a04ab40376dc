#pragma once

#include <cmath>

// Tolerance helpers; doctest's Approx mixes absolute and relative error,
// which is too loose for series-level checks.
inline bool close_rel(double actual, double expected, double tol) {
  return std::fabs(actual - expected) <= tol * std::fabs(expected);
}

inline bool close_abs(double actual, double expected, double tol) {
  return std::fabs(actual - expected) <= tol;
}
