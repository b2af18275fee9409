#pragma once

// Revised simplex on a sparse LU basis factorization with eta updates
//
//   min c'x + offset   s.t.  rows(x) {<=,=,>=} rhs,  lower <= x <= upper.
//
// Bounded variables are handled directly (nonbasic at a bound). Phase 1
// drives artificial variables to zero; Dantzig pricing is used until a run of
// degenerate pivots is seen, after which Bland's rule takes over until the
// objective moves again, so the method always terminates.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "eipw/formulation.hpp"

namespace eipw::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct SparseRow {
  std::vector<int> index;
  std::vector<double> value;

  void add(int col, double coef) {
    index.push_back(col);
    value.push_back(coef);
  }
};

struct LpProblem {
  std::vector<double> objective;
  double objective_offset = 0.0;
  std::vector<SparseRow> rows;
  std::vector<Sense> senses;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t cols() const { return objective.size(); }
  std::size_t row_count() const { return rows.size(); }

  int add_column(double cost, double lo, double hi);
  void add_row(SparseRow row, Sense sense, double rhs);
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus status);

struct LpConfig {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  double pivot_tol = 1e-9;
  int max_iterations = 100000;
  int refactor_interval = 100;
  int degenerate_before_bland = 30;
  bool scale = true;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  // Row multipliers y with reduced costs c - A'y (minimization sign
  // convention: y <= 0 on active <= rows, y >= 0 on active >= rows).
  std::vector<double> duals;
  int iterations = 0;
};

// Throws std::invalid_argument on inconsistent dimensions.
LpSolution solve_lp(const LpProblem& problem, const LpConfig& config = {});

// Lagrangian bound b'y + sum_j min_{x_j in [l_j,u_j]} (c - A'y)_j x_j for the
// given multipliers; equals the primal optimum at an optimal basis.
double dual_objective(const LpProblem& problem, const std::vector<double>& duals);

// Max violation of rows and bounds at x.
double primal_infeasibility(const LpProblem& problem, const std::vector<double>& x);

}  // namespace eipw::lp
