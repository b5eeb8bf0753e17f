#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ckm/error.hpp"
#include "ckm/instance.hpp"

namespace ckm {

enum class Sense { LessEqual, Equal, GreaterEqual };

/// One row  sum(coef * var) <sense> rhs  over model variable indices.
struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  /// Lazy rows may be left out of the working LP until a candidate point
  /// violates them.
  bool lazy = false;

  double activity(const std::vector<double>& values) const {
    double s = 0.0;
    for (auto [v, c] : terms) s += c * values[v];
    return s;
  }
  /// Positive amount by which `values` violates the row (0 when satisfied).
  double violation(const std::vector<double>& values) const {
    const double a = activity(values);
    switch (sense) {
      case Sense::LessEqual: return std::max(0.0, a - rhs);
      case Sense::GreaterEqual: return std::max(0.0, rhs - a);
      case Sense::Equal: return std::abs(a - rhs);
    }
    return 0.0;
  }
};

/// Minimisation LP over non-negative variables. For models built from an
/// instance the variables are x_{i,j} (facility-major) followed by y_i.
struct LPModel {
  int numFacilities = 0;
  int numClients = 0;
  int numVariables = 0;
  std::vector<double> objective;
  std::vector<LinearConstraint> rows;

  int x_var(int i, int j) const { return i * numClients + j; }
  int y_var(int i) const { return numFacilities * numClients + i; }
  int num_rows() const { return static_cast<int>(rows.size()); }
};

/// Budget, coverage, x <= y (lazy), and capacity rows of the natural relaxation.
inline LPModel build_basic_lp(const Instance& inst) {
  if (static_cast<long long>(inst.k) * inst.u < inst.numClients)
    fail(ErrorKind::Parameter, "k*u below the client count: the relaxation is infeasible");
  LPModel m;
  m.numFacilities = inst.numFacilities;
  m.numClients = inst.numClients;
  const int nF = inst.numFacilities, nC = inst.numClients;
  m.numVariables = nF * nC + nF;
  m.objective.assign(m.numVariables, 0.0);
  for (int i = 0; i < nF; ++i)
    for (int j = 0; j < nC; ++j) m.objective[m.x_var(i, j)] = inst.d(i, j);

  m.rows.reserve(1 + nC + nF * nC + nF);
  LinearConstraint budget;
  for (int i = 0; i < nF; ++i) budget.terms.emplace_back(m.y_var(i), 1.0);
  budget.sense = Sense::LessEqual;
  budget.rhs = inst.k;
  m.rows.push_back(std::move(budget));

  for (int j = 0; j < nC; ++j) {
    LinearConstraint cover;
    for (int i = 0; i < nF; ++i) cover.terms.emplace_back(m.x_var(i, j), 1.0);
    cover.sense = Sense::Equal;
    cover.rhs = 1.0;
    m.rows.push_back(std::move(cover));
  }
  for (int i = 0; i < nF; ++i)
    for (int j = 0; j < nC; ++j) {
      LinearConstraint open;
      open.terms = {{m.x_var(i, j), 1.0}, {m.y_var(i), -1.0}};
      open.sense = Sense::LessEqual;
      open.rhs = 0.0;
      open.lazy = true;
      m.rows.push_back(std::move(open));
    }
  for (int i = 0; i < nF; ++i) {
    LinearConstraint cap;
    for (int j = 0; j < nC; ++j) cap.terms.emplace_back(m.x_var(i, j), 1.0);
    cap.terms.emplace_back(m.y_var(i), -double(inst.u));
    cap.sense = Sense::LessEqual;
    cap.rhs = 0.0;
    m.rows.push_back(std::move(cap));
  }
  return m;
}

inline void check_row_schema(const LPModel& model, const LinearConstraint& row) {
  for (auto [v, c] : row.terms)
    if (v < 0 || v >= model.numVariables)
      fail(ErrorKind::Schema, "cut references unknown variable " + std::to_string(v));
}

/// Appends the cuts as ordinary (non-lazy) rows.
inline LPModel add_cuts(LPModel model, const std::vector<LinearConstraint>& cuts) {
  for (const auto& c : cuts) check_row_schema(model, c);
  for (auto c : cuts) {
    c.lazy = false;
    model.rows.push_back(std::move(c));
  }
  return model;
}

}  // namespace ckm
