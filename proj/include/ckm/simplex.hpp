#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ckm/error.hpp"
#include "ckm/lp_model.hpp"
#include "ckm/solution.hpp"

namespace ckm {

struct SimplexOptions {
  double feasibilityTol = 1e-9;
  double optimalityTol = 1e-7;
  double pivotTol = 1e-9;
  int refactorInterval = 200;
  long long maxIterations = 2'000'000;
};

enum class SimplexStatus { Optimal, Infeasible, Unbounded, IterationLimit };

/// Dense revised simplex over  min c'x, rows (<=,=,>=), x >= 0.
///
/// The basis inverse is kept explicitly (column-major) and updated by
/// elementary row operations, with periodic refactorisation. Cold solves run
/// two phases of primal simplex with Dantzig pricing; after 3*rows
/// consecutive degenerate pivots pricing switches to Bland's rule until the
/// objective moves again. Rows appended to an optimal basis are handled by
/// dual simplex followed by a primal clean-up pass.
class DenseSimplex {
 public:
  DenseSimplex(int numStructural, std::vector<double> cost, SimplexOptions opts = {})
      : opts_(opts), numStructural_(numStructural) {
    cols_.resize(numStructural);
    for (int j = 0; j < numStructural; ++j) cols_[j].cost = cost[j];
  }

  int num_rows() const { return m_; }
  int num_columns() const { return static_cast<int>(cols_.size()); }
  long long iterations() const { return iterations_; }
  bool has_basis() const { return haveBasis_; }

  /// Appends rows. Before the first solve any sense is allowed; afterwards
  /// only inequalities (the new slack joins the basis).
  void add_rows(const std::vector<const LinearConstraint*>& rows) {
    if (rows.empty()) return;
    const int oldM = m_;
    for (const LinearConstraint* r : rows) {
      if (haveBasis_ && r->sense == Sense::Equal)
        fail(ErrorKind::Internal, "equality rows cannot be appended to a solved model");
      const int row = m_++;
      for (auto [v, c] : r->terms) {
        if (c == 0.0) continue;
        cols_[v].rows.push_back(row);
        cols_[v].vals.push_back(c);
      }
      rhs_.push_back(r->rhs);
      sense_.push_back(r->sense);
      slackOf_.push_back(-1);
      if (r->sense != Sense::Equal) {
        Column s;
        s.kind = Kind::Slack;
        s.rows = {row};
        s.vals = {r->sense == Sense::LessEqual ? 1.0 : -1.0};
        slackOf_[row] = static_cast<int>(cols_.size());
        cols_.push_back(std::move(s));
      }
    }
    if (haveBasis_) extend_basis(oldM);
  }

  SimplexStatus solve() {
    if (!haveBasis_) return cold_solve();
    SimplexStatus st = dual_simplex();
    if (st != SimplexStatus::Optimal) return st;
    return primal_simplex();
  }

  /// Values of the structural variables.
  std::vector<double> primal() const {
    std::vector<double> x(numStructural_, 0.0);
    for (int r = 0; r < m_; ++r)
      if (basis_[r] < numStructural_) x[basis_[r]] = std::max(0.0, xB_[r]);
    return x;
  }

  double objective() const {
    const auto x = primal();
    double z = 0.0;
    for (int j = 0; j < numStructural_; ++j) z += cols_[j].cost * x[j];
    return z;
  }

  /// Row duals pi = c_B' B^-1 for the current basis.
  std::vector<double> duals() const { return compute_duals(); }

  /// Largest negative reduced cost over admissible columns (0 when the
  /// current duals are feasible): the optimality certificate.
  double dual_infeasibility() const {
    const auto pi = compute_duals();
    double worst = 0.0;
    for (int j = 0; j < num_columns(); ++j)
      if (!cols_[j].banned) worst = std::min(worst, reduced_cost(j, pi));
    return -worst;
  }

  double dual_objective() const {
    const auto pi = compute_duals();
    double z = 0.0;
    for (int r = 0; r < m_; ++r) z += pi[r] * rhs_[r];
    return z;
  }

  double phase_one_residual() const { return phaseOneResidual_; }

 private:
  enum class Kind { Structural, Slack, Artificial };

  struct Column {
    std::vector<int> rows;
    std::vector<double> vals;
    double cost = 0.0;
    Kind kind = Kind::Structural;
    bool banned = false;  // artificials after phase one
  };

  double& binv(int row, int col) { return binv_[static_cast<std::size_t>(col) * m_ + row]; }
  double binv(int row, int col) const { return binv_[static_cast<std::size_t>(col) * m_ + row]; }

  double phase_cost(int j) const {
    if (phaseOne_) return cols_[j].kind == Kind::Artificial ? 1.0 : 0.0;
    return cols_[j].kind == Kind::Structural ? cols_[j].cost : 0.0;
  }

  std::vector<double> compute_duals() const {
    std::vector<double> pi(m_, 0.0);
    for (int k = 0; k < m_; ++k) {
      const double* col = &binv_[static_cast<std::size_t>(k) * m_];
      double s = 0.0;
      for (int i = 0; i < m_; ++i) s += phase_cost(basis_[i]) * col[i];
      pi[k] = s;
    }
    return pi;
  }

  double reduced_cost(int j, const std::vector<double>& pi) const {
    double d = phase_cost(j);
    const Column& c = cols_[j];
    for (std::size_t t = 0; t < c.rows.size(); ++t) d -= pi[c.rows[t]] * c.vals[t];
    return d;
  }

  std::vector<double> ftran(int j) const {
    std::vector<double> alpha(m_, 0.0);
    const Column& c = cols_[j];
    for (std::size_t t = 0; t < c.rows.size(); ++t) {
      const double a = c.vals[t];
      const double* col = &binv_[static_cast<std::size_t>(c.rows[t]) * m_];
      for (int i = 0; i < m_; ++i) alpha[i] += a * col[i];
    }
    return alpha;
  }

  void pivot(int leaveRow, int enter, const std::vector<double>& alpha) {
    const double ar = alpha[leaveRow];
    const double step = xB_[leaveRow] / ar;
    for (int i = 0; i < m_; ++i) xB_[i] -= step * alpha[i];
    xB_[leaveRow] = step;
    for (int k = 0; k < m_; ++k) {
      double* col = &binv_[static_cast<std::size_t>(k) * m_];
      const double f = col[leaveRow] / ar;
      if (f == 0.0) continue;
      for (int i = 0; i < m_; ++i) col[i] -= alpha[i] * f;
      col[leaveRow] = f;
    }
    posInBasis_[basis_[leaveRow]] = -1;
    basis_[leaveRow] = enter;
    posInBasis_[enter] = leaveRow;
    ++iterations_;
    if (++sinceRefactor_ >= opts_.refactorInterval) refactor();
  }

  /// Rebuilds B^-1 by Gauss-Jordan elimination with partial pivoting and
  /// recomputes the basic values.
  void refactor() {
    sinceRefactor_ = 0;
    const int m = m_;
    std::vector<double> a(static_cast<std::size_t>(m) * 2 * m, 0.0);  // row-major [B | I]
    const int w = 2 * m;
    for (int r = 0; r < m; ++r) {
      const Column& c = cols_[basis_[r]];
      for (std::size_t t = 0; t < c.rows.size(); ++t) a[static_cast<std::size_t>(c.rows[t]) * w + r] = c.vals[t];
      a[static_cast<std::size_t>(r) * w + m + r] = 1.0;
    }
    for (int col = 0; col < m; ++col) {
      int best = col;
      for (int r = col + 1; r < m; ++r)
        if (std::abs(a[static_cast<std::size_t>(r) * w + col]) > std::abs(a[static_cast<std::size_t>(best) * w + col])) best = r;
      const double p = a[static_cast<std::size_t>(best) * w + col];
      ensure(std::abs(p) > 1e-13, "basis matrix is non-singular at refactorisation");
      if (best != col)
        for (int c = 0; c < w; ++c) std::swap(a[static_cast<std::size_t>(best) * w + c], a[static_cast<std::size_t>(col) * w + c]);
      double* prow = &a[static_cast<std::size_t>(col) * w];
      for (int c = 0; c < w; ++c) prow[c] /= p;
      for (int r = 0; r < m; ++r) {
        if (r == col) continue;
        double* row = &a[static_cast<std::size_t>(r) * w];
        const double f = row[col];
        if (f == 0.0) continue;
        for (int c = col; c < w; ++c) row[c] -= f * prow[c];
      }
    }
    // Row r of the reduced system is row r of B^-1.
    for (int r = 0; r < m; ++r)
      for (int k = 0; k < m; ++k) binv(r, k) = a[static_cast<std::size_t>(r) * w + m + k];
    for (int r = 0; r < m; ++r) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += binv(r, k) * rhs_[k];
      xB_[r] = s;
    }
  }

  SimplexStatus cold_solve() {
    // Initial basis: slack where it starts feasible, otherwise an artificial
    // carrying |b|.
    const int m = m_;
    basis_.assign(m, -1);
    xB_.assign(m, 0.0);
    binv_.assign(static_cast<std::size_t>(m) * m, 0.0);
    bool needPhaseOne = false;
    for (int r = 0; r < m; ++r) {
      const int s = slackOf_[r];
      const double b = rhs_[r];
      const bool slackFeasible = s >= 0 && ((sense_[r] == Sense::LessEqual && b >= 0.0) ||
                                            (sense_[r] == Sense::GreaterEqual && b <= 0.0));
      if (slackFeasible) {
        basis_[r] = s;
        const double sign = cols_[s].vals[0];
        binv(r, r) = sign;
        xB_[r] = sign * b;
      } else {
        Column art;
        art.kind = Kind::Artificial;
        const double sign = b >= 0.0 ? 1.0 : -1.0;
        art.rows = {r};
        art.vals = {sign};
        basis_[r] = static_cast<int>(cols_.size());
        cols_.push_back(std::move(art));
        binv(r, r) = sign;
        xB_[r] = std::abs(b);
        needPhaseOne = true;
      }
    }
    posInBasis_.assign(cols_.size(), -1);
    for (int r = 0; r < m; ++r) posInBasis_[basis_[r]] = r;
    haveBasis_ = true;
    sinceRefactor_ = 0;

    if (needPhaseOne) {
      phaseOne_ = true;
      SimplexStatus st = primal_simplex();
      phaseOne_ = false;
      if (st == SimplexStatus::IterationLimit) return st;
      phaseOneResidual_ = 0.0;
      for (int r = 0; r < m_; ++r)
        if (cols_[basis_[r]].kind == Kind::Artificial) phaseOneResidual_ += std::max(0.0, xB_[r]);
      if (phaseOneResidual_ > std::max(opts_.feasibilityTol * 10.0, 1e-8))
        return SimplexStatus::Infeasible;
      drive_out_artificials();
    }
    return primal_simplex();
  }

  void drive_out_artificials() {
    for (auto& c : cols_)
      if (c.kind == Kind::Artificial) c.banned = true;
    for (int r = 0; r < m_; ++r) {
      if (cols_[basis_[r]].kind != Kind::Artificial) continue;
      // Row r of B^-1 A: look for any admissible nonbasic column to swap in.
      for (int j = 0; j < num_columns(); ++j) {
        if (posInBasis_[j] >= 0 || cols_[j].banned) continue;
        double v = 0.0;
        const Column& c = cols_[j];
        for (std::size_t t = 0; t < c.rows.size(); ++t) v += binv(r, c.rows[t]) * c.vals[t];
        if (std::abs(v) > 1e-7) {
          pivot(r, j, ftran(j));
          break;
        }
      }
      // No candidate: the row is redundant and its artificial stays at zero.
    }
  }

  SimplexStatus primal_simplex() {
    long long degenerateRun = 0;
    bool bland = false;
    for (;;) {
      if (iterations_ >= opts_.maxIterations) return SimplexStatus::IterationLimit;
      const auto pi = compute_duals();
      int enter = -1;
      double bestD = -opts_.optimalityTol;
      for (int j = 0; j < num_columns(); ++j) {
        if (posInBasis_[j] >= 0 || cols_[j].banned) continue;
        const double d = reduced_cost(j, pi);
        if (d < bestD) {
          enter = j;
          bestD = d;
          if (bland) break;
        }
      }
      if (enter < 0) return SimplexStatus::Optimal;

      const auto alpha = ftran(enter);
      int leave = -1;
      double bestRatio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] <= opts_.pivotTol) continue;
        const double ratio = std::max(0.0, xB_[i]) / alpha[i];
        bool take = false;
        if (leave < 0 || ratio < bestRatio - 1e-12) {
          take = true;
        } else if (ratio <= bestRatio + 1e-12) {
          take = bland ? basis_[i] < basis_[leave] : alpha[i] > alpha[leave];
        }
        if (take) {
          leave = i;
          bestRatio = ratio;
        }
      }
      if (leave < 0) return SimplexStatus::Unbounded;
      if (bestRatio <= opts_.feasibilityTol) {
        if (++degenerateRun > 3LL * m_) bland = true;
      } else {
        degenerateRun = 0;
        bland = false;
      }
      xB_[leave] = std::max(0.0, xB_[leave]);
      pivot(leave, enter, alpha);
    }
  }

  SimplexStatus dual_simplex() {
    for (;;) {
      if (iterations_ >= opts_.maxIterations) return SimplexStatus::IterationLimit;
      int leave = -1;
      double worst = -opts_.feasibilityTol;
      for (int i = 0; i < m_; ++i)
        if (xB_[i] < worst) {
          worst = xB_[i];
          leave = i;
        }
      if (leave < 0) return SimplexStatus::Optimal;

      const auto pi = compute_duals();
      int enter = -1;
      double bestRatio = std::numeric_limits<double>::infinity();
      double bestAlpha = 0.0;
      for (int j = 0; j < num_columns(); ++j) {
        if (posInBasis_[j] >= 0 || cols_[j].banned) continue;
        const Column& c = cols_[j];
        double a = 0.0;
        for (std::size_t t = 0; t < c.rows.size(); ++t) a += binv(leave, c.rows[t]) * c.vals[t];
        if (a >= -opts_.pivotTol) continue;
        const double ratio = std::max(0.0, reduced_cost(j, pi)) / -a;
        if (enter < 0 || ratio < bestRatio - 1e-12 ||
            (ratio <= bestRatio + 1e-12 && -a > bestAlpha)) {
          enter = j;
          bestRatio = ratio;
          bestAlpha = -a;
        }
      }
      if (enter < 0) return SimplexStatus::Infeasible;
      pivot(leave, enter, ftran(enter));
    }
  }

  /// New rows arrive with their slacks basic: B' = [B 0; a_B' s], so
  /// B'^-1 = [B^-1 0; -s a_B' B^-1  s] for slack sign s = +-1.
  void extend_basis(int oldM) {
    const int newM = m_;
    std::vector<double> grown(static_cast<std::size_t>(newM) * newM, 0.0);
    for (int k = 0; k < oldM; ++k)
      for (int i = 0; i < oldM; ++i)
        grown[static_cast<std::size_t>(k) * newM + i] = binv_[static_cast<std::size_t>(k) * oldM + i];

    // Coefficients of the new rows on the old basic columns.
    std::vector<std::vector<std::pair<int, double>>> rowOnBasis(newM - oldM);
    for (int i = 0; i < oldM; ++i) {
      const Column& c = cols_[basis_[i]];
      for (std::size_t t = 0; t < c.rows.size(); ++t)
        if (c.rows[t] >= oldM) rowOnBasis[c.rows[t] - oldM].emplace_back(i, c.vals[t]);
    }
    std::vector<double> oldX = xB_;
    xB_.resize(newM);
    basis_.resize(newM);
    for (int r = oldM; r < newM; ++r) {
      const int s = slackOf_[r];
      const double sign = cols_[s].vals[0];
      for (int k = 0; k < oldM; ++k) {
        double v = 0.0;
        for (auto [i, a] : rowOnBasis[r - oldM]) v += a * binv_[static_cast<std::size_t>(k) * oldM + i];
        grown[static_cast<std::size_t>(k) * newM + r] = -sign * v;
      }
      grown[static_cast<std::size_t>(r) * newM + r] = sign;
      double act = 0.0;
      for (auto [i, a] : rowOnBasis[r - oldM]) act += a * oldX[i];
      xB_[r] = sign * (rhs_[r] - act);
      basis_[r] = s;
    }
    binv_ = std::move(grown);
    posInBasis_.resize(cols_.size(), -1);
    for (int r = oldM; r < newM; ++r) posInBasis_[basis_[r]] = r;
  }

  SimplexOptions opts_;
  int numStructural_ = 0;
  int m_ = 0;
  std::vector<Column> cols_;
  std::vector<double> rhs_;
  std::vector<Sense> sense_;
  std::vector<int> slackOf_;

  bool haveBasis_ = false;
  bool phaseOne_ = false;
  std::vector<int> basis_;
  std::vector<int> posInBasis_;
  std::vector<double> binv_;
  std::vector<double> xB_;
  long long iterations_ = 0;
  int sinceRefactor_ = 0;
  double phaseOneResidual_ = 0.0;
};

/// Incremental LP over an LPModel: lazy rows are activated on violation, and
/// further rows (cuts) can be appended and re-solved from the previous basis.
class LpSession {
 public:
  explicit LpSession(const LPModel& model, SimplexOptions opts = {})
      : model_(model), opts_(opts), solver_(model.numVariables, model.objective, opts),
        active_(model.rows.size(), false) {
    std::vector<const LinearConstraint*> first;
    for (std::size_t r = 0; r < model_.rows.size(); ++r)
      if (!model_.rows[r].lazy) {
        first.push_back(&model_.rows[r]);
        active_[r] = true;
      }
    solver_.add_rows(first);
  }

  const LPModel& model() const { return model_; }
  long long iterations() const { return solver_.iterations(); }
  int active_rows() const { return solver_.num_rows(); }

  void add_rows(const std::vector<LinearConstraint>& rows) {
    for (const auto& r : rows) check_row_schema(model_, r);
    const std::size_t first = model_.rows.size();
    for (auto r : rows) {
      r.lazy = false;
      model_.rows.push_back(std::move(r));
      active_.push_back(true);
    }
    std::vector<const LinearConstraint*> fresh;
    for (std::size_t r = first; r < model_.rows.size(); ++r) fresh.push_back(&model_.rows[r]);
    // Pointers into model_.rows are only used inside add_rows.
    solver_.add_rows(fresh);
  }

  /// Optimal structural values of the full model (all lazy rows satisfied).
  std::vector<double> solve_values() {
    for (;;) {
      const SimplexStatus st = solver_.solve();
      if (st == SimplexStatus::Infeasible)
        fail(ErrorKind::Infeasible,
             "LP is infeasible (phase-one residual " + std::to_string(solver_.phase_one_residual()) + ")");
      if (st == SimplexStatus::Unbounded) {
        if (activate_all_lazy()) continue;
        fail(ErrorKind::Internal, "LP is unbounded");
      }
      if (st == SimplexStatus::IterationLimit) fail(ErrorKind::Internal, "simplex iteration limit");
      const auto x = solver_.primal();
      std::vector<const LinearConstraint*> violated;
      for (std::size_t r = 0; r < model_.rows.size(); ++r)
        if (!active_[r] && model_.rows[r].violation(x) > opts_.feasibilityTol) {
          violated.push_back(&model_.rows[r]);
          active_[r] = true;
        }
      if (violated.empty()) return x;
      solver_.add_rows(violated);
    }
  }

  /// Primal/dual gap certificate of the last solve, restricted to active rows.
  double dual_infeasibility() const { return solver_.dual_infeasibility(); }
  double dual_objective() const { return solver_.dual_objective(); }

 private:
  bool activate_all_lazy() {
    std::vector<const LinearConstraint*> rest;
    for (std::size_t r = 0; r < model_.rows.size(); ++r)
      if (!active_[r]) {
        rest.push_back(&model_.rows[r]);
        active_[r] = true;
      }
    if (rest.empty()) return false;
    solver_.add_rows(rest);
    return true;
  }

  LPModel model_;
  SimplexOptions opts_;
  DenseSimplex solver_;
  std::vector<bool> active_;
};

/// Maps structural values of an instance-shaped model to a fractional solution.
inline FractionalSolution to_fractional(const LPModel& model, const std::vector<double>& values) {
  FractionalSolution s = make_zero_solution(model.numFacilities, model.numClients);
  for (int i = 0; i < model.numFacilities; ++i) {
    for (int j = 0; j < model.numClients; ++j) s.xf(i, j) = std::max(0.0, values[model.x_var(i, j)]);
    s.y[i] = std::max(0.0, values[model.y_var(i)]);
  }
  double obj = 0.0;
  for (int v = 0; v < model.numVariables; ++v) obj += model.objective[v] * values[v];
  s.objective = obj;
  return s;
}

/// Solves an instance-shaped model from scratch. `tol` is the optimality
/// tolerance on reduced costs.
inline FractionalSolution solve_lp(const LPModel& model, double tol = 1e-7) {
  SimplexOptions opts;
  opts.optimalityTol = tol;
  LpSession session(model, opts);
  return to_fractional(model, session.solve_values());
}

}  // namespace ckm
