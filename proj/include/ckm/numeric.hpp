#pragma once

#include <cmath>

namespace ckm::num {

// Integrality tolerance for transported demand/supply amounts.
inline constexpr double kIntTol = 1e-9;

inline bool is_integral(double v, double tol = kIntTol) {
  return std::abs(v - std::round(v)) <= tol;
}

/// Floor that treats values within tol of an integer as that integer.
inline double floor_t(double v, double tol = kIntTol) {
  return is_integral(v, tol) ? std::round(v) : std::floor(v);
}

inline double ceil_t(double v, double tol = kIntTol) {
  return is_integral(v, tol) ? std::round(v) : std::ceil(v);
}

/// frac(v) = v - floor(v)
inline double frac(double v, double tol = kIntTol) { return v - floor_t(v, tol); }

/// cofrac(v) = ceil(v) - v
inline double cofrac(double v, double tol = kIntTol) { return ceil_t(v, tol) - v; }

inline double snap(double v, double tol = kIntTol) {
  return is_integral(v, tol) ? std::round(v) : v;
}

}  // namespace ckm::num
