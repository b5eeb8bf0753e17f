#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace ckm {

/// Fractional point of the LP relaxation. x is stored facility-major:
/// x[i * numClients + j] is the fraction of client j served at location i.
struct FractionalSolution {
  int numFacilities = 0;
  int numClients = 0;
  std::vector<double> x;
  std::vector<double> y;
  double objective = 0.0;

  double xf(int i, int j) const { return x[static_cast<std::size_t>(i) * numClients + j]; }
  double& xf(int i, int j) { return x[static_cast<std::size_t>(i) * numClients + j]; }
};

inline FractionalSolution make_zero_solution(int numFacilities, int numClients) {
  FractionalSolution s;
  s.numFacilities = numFacilities;
  s.numClients = numClients;
  s.x.assign(static_cast<std::size_t>(numFacilities) * numClients, 0.0);
  s.y.assign(numFacilities, 0.0);
  return s;
}

/// Which of the natural-relaxation constraints failed, with the offending indices.
struct BasicLpViolation {
  enum class Constraint { Budget, ClientCoverage, ConnectToOpen, Capacity, NonNegative };
  Constraint constraint;
  int facility = -1;
  int client = -1;
  double amount = 0.0;  // by how much the row is exceeded
};

inline std::string describe(const BasicLpViolation& v) {
  static const char* names[] = {"budget", "client-coverage", "connect-to-open", "capacity",
                                "non-negativity"};
  return std::string(names[static_cast<int>(v.constraint)]) + " (facility " +
         std::to_string(v.facility) + ", client " + std::to_string(v.client) + ") by " +
         std::to_string(v.amount);
}

/// Checks budget, coverage, x <= y, capacity and non-negativity within tol.
/// Returns the first violated constraint in that order.
inline std::optional<BasicLpViolation> check_basic_lp(const FractionalSolution& s, int k, int u,
                                                       double tol) {
  using C = BasicLpViolation::Constraint;
  double ysum = 0.0;
  for (double v : s.y) ysum += v;
  if (ysum > k + tol) return BasicLpViolation{C::Budget, -1, -1, ysum - k};
  for (int j = 0; j < s.numClients; ++j) {
    double col = 0.0;
    for (int i = 0; i < s.numFacilities; ++i) col += s.xf(i, j);
    if (std::abs(col - 1.0) > tol) return BasicLpViolation{C::ClientCoverage, -1, j, col - 1.0};
  }
  for (int i = 0; i < s.numFacilities; ++i) {
    double row = 0.0;
    for (int j = 0; j < s.numClients; ++j) {
      const double xij = s.xf(i, j);
      if (xij < -tol) return BasicLpViolation{C::NonNegative, i, j, -xij};
      if (xij > s.y[i] + tol) return BasicLpViolation{C::ConnectToOpen, i, j, xij - s.y[i]};
      row += xij;
    }
    if (s.y[i] < -tol) return BasicLpViolation{C::NonNegative, i, -1, -s.y[i]};
    if (row > u * s.y[i] + tol) return BasicLpViolation{C::Capacity, i, -1, row - u * s.y[i]};
  }
  return std::nullopt;
}

}  // namespace ckm
