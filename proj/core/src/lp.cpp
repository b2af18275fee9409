#include "eipw/lp.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eipw::lp {

int LpProblem::add_column(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  return static_cast<int>(objective.size()) - 1;
}

void LpProblem::add_row(SparseRow row, Sense sense, double value) {
  rows.push_back(std::move(row));
  senses.push_back(sense);
  rhs.push_back(value);
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "?";
}

namespace {

enum class Where : unsigned char { basic, lower, upper };

constexpr double kProgress = 1e-9;  // objective decrease that counts as a move

// Standard-form working problem: structural columns, then one slack per row
// (coefficient +1), then artificials (coefficient +/-1 in a single row).
class Simplex {
 public:
  Simplex(std::size_t rows, const LpConfig& config) : m_(rows), config_(config) {}

  std::size_t m_;
  std::size_t structural_ = 0;
  // CSC storage of the structural block.
  std::vector<int> start_{0};
  std::vector<int> row_;
  std::vector<double> val_;
  // Single-entry columns (slacks and artificials).
  std::vector<int> unit_row_;
  std::vector<double> unit_sign_;

  std::vector<double> lo_, hi_, x_, cost_;
  std::vector<Where> where_;
  std::vector<int> head_;  // basic column per row position
  std::vector<double> b_;
  // Basis inverse as a sparse LU of the last refactored basis followed by
  // one elementary transformation per pivot since then.
  struct Eta {
    Eigen::Index row;
    double pivot;
    std::vector<Eigen::Index> index;
    std::vector<double> value;
  };
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  const LpConfig& config_;
  int iterations_ = 0;
  std::size_t first_artificial_ = 0;

  std::size_t cols() const { return lo_.size(); }

  void add_structural(const std::vector<std::pair<int, double>>& entries, double lo, double hi) {
    for (const auto& [r, v] : entries) {
      row_.push_back(r);
      val_.push_back(v);
    }
    start_.push_back(static_cast<int>(row_.size()));
    ++structural_;
    lo_.push_back(lo);
    hi_.push_back(hi);
  }

  void add_unit(int r, double sign, double lo, double hi) {
    unit_row_.push_back(r);
    unit_sign_.push_back(sign);
    lo_.push_back(lo);
    hi_.push_back(hi);
  }

  // y' a_j
  double dot_column(std::size_t j, const Eigen::VectorXd& y) const {
    if (j < structural_) {
      double s = 0.0;
      for (int p = start_[j]; p < start_[j + 1]; ++p) s += y[row_[p]] * val_[p];
      return s;
    }
    const std::size_t u = j - structural_;
    return y[unit_row_[u]] * unit_sign_[u];
  }

  // B^-1 v
  Eigen::VectorXd solve_basis(Eigen::VectorXd v) const {
    if (m_ == 0) return v;
    v = lu_.solve(v);
    for (const auto& eta : etas_) {
      const double xr = v[eta.row] / eta.pivot;
      if (xr != 0.0)
        for (std::size_t p = 0; p < eta.index.size(); ++p) v[eta.index[p]] -= eta.value[p] * xr;
      v[eta.row] = xr;
    }
    return v;
  }

  // B^-T v
  Eigen::VectorXd solve_basis_transpose(Eigen::VectorXd v) const {
    if (m_ == 0) return v;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->row];
      for (std::size_t p = 0; p < it->index.size(); ++p) s -= it->value[p] * v[it->index[p]];
      v[it->row] = s / it->pivot;
    }
    return lu_.transpose().solve(v);
  }

  // B^-1 a_j
  Eigen::VectorXd ftran(std::size_t j) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    add_column_to(j, 1.0, a);
    return solve_basis(std::move(a));
  }

  void add_column_to(std::size_t j, double scale, Eigen::VectorXd& acc) const {
    if (j < structural_) {
      for (int p = start_[j]; p < start_[j + 1]; ++p) acc[row_[p]] += scale * val_[p];
    } else {
      const std::size_t u = j - structural_;
      acc[unit_row_[u]] += scale * unit_sign_[u];
    }
  }

  bool refactor() {
    etas_.clear();
    if (m_ == 0) return true;
    const auto m = static_cast<Eigen::Index>(m_);
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t r = 0; r < m_; ++r) {
      const auto j = static_cast<std::size_t>(head_[r]);
      const auto c = static_cast<int>(r);
      if (j < structural_) {
        for (int p = start_[j]; p < start_[j + 1]; ++p) entries.emplace_back(row_[p], c, val_[p]);
      } else {
        const std::size_t u = j - structural_;
        entries.emplace_back(unit_row_[u], c, unit_sign_[u]);
      }
    }
    Eigen::SparseMatrix<double> basis(m, m);
    basis.setFromTriplets(entries.begin(), entries.end());
    basis.makeCompressed();
    lu_.compute(basis);
    if (lu_.info() != Eigen::Success) return false;
    recompute_basic_values();
    for (std::size_t r = 0; r < m_; ++r)
      if (!std::isfinite(x_[static_cast<std::size_t>(head_[r])])) return false;
    return true;
  }

  void recompute_basic_values() {
    Eigen::VectorXd residual = Eigen::Map<const Eigen::VectorXd>(b_.data(), static_cast<Eigen::Index>(m_));
    for (std::size_t j = 0; j < cols(); ++j)
      if (where_[j] != Where::basic && x_[j] != 0.0) add_column_to(j, -x_[j], residual);
    const Eigen::VectorXd xb = solve_basis(residual);
    for (std::size_t r = 0; r < m_; ++r) x_[static_cast<std::size_t>(head_[r])] = xb[static_cast<Eigen::Index>(r)];
  }

  void pivot(std::size_t r, const Eigen::VectorXd& alpha) {
    Eta eta{static_cast<Eigen::Index>(r), alpha[static_cast<Eigen::Index>(r)], {}, {}};
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      if (i == eta.row || alpha[i] == 0.0) continue;
      eta.index.push_back(i);
      eta.value.push_back(alpha[i]);
    }
    etas_.push_back(std::move(eta));
  }

  enum class Outcome { optimal, unbounded, iteration_limit, singular };

  Outcome run() {
    int degenerate = 0;
    bool bland = false;
    int since_refactor = 0;
    const auto m = static_cast<Eigen::Index>(m_);
    while (true) {
      if (iterations_ >= config_.max_iterations) return Outcome::iteration_limit;
      Eigen::VectorXd cb(m);
      for (std::size_t r = 0; r < m_; ++r) cb[static_cast<Eigen::Index>(r)] = cost_[static_cast<std::size_t>(head_[r])];
      const Eigen::VectorXd y = solve_basis_transpose(cb);

      std::size_t q = cols();
      double best = 0.0;
      double dq = 0.0;
      for (std::size_t j = 0; j < cols(); ++j) {
        if (where_[j] == Where::basic || lo_[j] == hi_[j]) continue;
        const double d = cost_[j] - dot_column(j, y);
        const bool eligible = (where_[j] == Where::lower && d < -config_.optimality_tol) ||
                              (where_[j] == Where::upper && d > config_.optimality_tol);
        if (!eligible) continue;
        if (bland) {
          q = j;
          dq = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dq = d;
        }
      }
      if (q == cols()) return Outcome::optimal;

      const Eigen::VectorXd alpha = ftran(q);
      const double dir = dq < 0.0 ? 1.0 : -1.0;

      // Harris two-pass ratio test: the largest step allowed with bounds
      // relaxed by the feasibility tolerance, then the largest pivot among
      // rows blocking within that step. Bland mode takes the lowest index
      // among exact minimum ratios instead.
      auto limit_of = [&](std::size_t r, double slack, bool& to_upper) {
        const double a = alpha[static_cast<Eigen::Index>(r)];
        const auto j = static_cast<std::size_t>(head_[r]);
        const double rate = -dir * a;  // d x_B(r) / d theta
        if (rate < 0.0) {
          to_upper = false;
          return lo_[j] == -kInf ? kInf : std::max(0.0, (x_[j] - lo_[j] + slack) / -rate);
        }
        to_upper = true;
        return hi_[j] == kInf ? kInf : std::max(0.0, (hi_[j] - x_[j] + slack) / rate);
      };
      double theta = kInf;
      std::size_t leave = m_;
      bool leave_to_upper = false;
      if (bland) {
        for (std::size_t r = 0; r < m_; ++r) {
          if (std::abs(alpha[static_cast<Eigen::Index>(r)]) <= config_.pivot_tol) continue;
          bool to_upper = false;
          const double limit = limit_of(r, 0.0, to_upper);
          if (limit == kInf) continue;
          const bool take = leave == m_ || limit < theta - 1e-12 ||
                            (limit <= theta + 1e-12 && head_[r] < head_[leave]);
          if (take) {
            theta = std::min(theta, limit);
            leave = r;
            leave_to_upper = to_upper;
          }
        }
      } else {
        double bound = kInf;
        for (std::size_t r = 0; r < m_; ++r) {
          if (std::abs(alpha[static_cast<Eigen::Index>(r)]) <= config_.pivot_tol) continue;
          bool to_upper = false;
          bound = std::min(bound, limit_of(r, config_.feasibility_tol, to_upper));
        }
        double biggest = 0.0;
        for (std::size_t r = 0; r < m_ && bound < kInf; ++r) {
          const double a = std::abs(alpha[static_cast<Eigen::Index>(r)]);
          if (a <= config_.pivot_tol) continue;
          bool to_upper = false;
          const double limit = limit_of(r, 0.0, to_upper);
          if (limit <= bound && a > biggest) {
            biggest = a;
            theta = limit;
            leave = r;
            leave_to_upper = to_upper;
          }
        }
      }
      const double span = hi_[q] - lo_[q];
      ++iterations_;
      if (span < kInf && span <= theta) {
        // Bound flip; the basis is unchanged.
        for (std::size_t r = 0; r < m_; ++r)
          x_[static_cast<std::size_t>(head_[r])] += -dir * alpha[static_cast<Eigen::Index>(r)] * span;
        x_[q] = where_[q] == Where::lower ? hi_[q] : lo_[q];
        where_[q] = where_[q] == Where::lower ? Where::upper : Where::lower;
        if (std::abs(dq) * span > kProgress) {
          degenerate = 0;
          bland = false;
        }
        continue;
      }
      if (leave == m_) return Outcome::unbounded;

      for (std::size_t r = 0; r < m_; ++r)
        x_[static_cast<std::size_t>(head_[r])] += -dir * alpha[static_cast<Eigen::Index>(r)] * theta;
      x_[q] += dir * theta;
      const auto out = static_cast<std::size_t>(head_[leave]);
      x_[out] = leave_to_upper ? hi_[out] : lo_[out];
      where_[out] = leave_to_upper ? Where::upper : Where::lower;
      where_[q] = Where::basic;
      head_[leave] = static_cast<int>(q);
      pivot(leave, alpha);

      // Bland's rule stays on until the objective moves by a real amount.
      if (std::abs(dq) * theta <= kProgress) {
        if (++degenerate >= config_.degenerate_before_bland) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
      if (++since_refactor >= config_.refactor_interval) {
        since_refactor = 0;
        if (!refactor()) return Outcome::singular;
      }
    }
  }

  // Replace basic artificials at zero level by non-artificial columns.
  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      const auto j = static_cast<std::size_t>(head_[r]);
      if (j < first_artificial_) continue;
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
      unit[static_cast<Eigen::Index>(r)] = 1.0;
      const Eigen::VectorXd rho = solve_basis_transpose(std::move(unit));
      std::size_t best = cols();
      double best_mag = 1e-7;
      for (std::size_t c = 0; c < first_artificial_; ++c) {
        if (where_[c] == Where::basic) continue;
        const double mag = std::abs(dot_column(c, rho));
        if (mag > best_mag) {
          best_mag = mag;
          best = c;
        }
      }
      if (best == cols()) continue;  // redundant row
      const Eigen::VectorXd alpha = ftran(best);
      where_[j] = Where::lower;
      x_[j] = 0.0;
      where_[best] = Where::basic;
      head_[r] = static_cast<int>(best);
      pivot(r, alpha);
    }
  }
};

double row_activity(const SparseRow& row, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t p = 0; p < row.index.size(); ++p) s += row.value[p] * x[static_cast<std::size_t>(row.index[p])];
  return s;
}

LpSolution solve_attempt(const LpProblem& problem, const LpConfig& config) {
  const std::size_t n = problem.cols();
  const std::size_t m_in = problem.row_count();
  if (problem.lower.size() != n || problem.upper.size() != n || problem.senses.size() != m_in ||
      problem.rhs.size() != m_in)
    throw std::invalid_argument("LpProblem dimensions are inconsistent");
  for (const auto& row : problem.rows) {
    if (row.index.size() != row.value.size()) throw std::invalid_argument("sparse row has mismatched arrays");
    for (int c : row.index)
      if (c < 0 || static_cast<std::size_t>(c) >= n) throw std::invalid_argument("row references a missing column");
  }

  LpSolution result;
  for (std::size_t j = 0; j < n; ++j) {
    if (problem.lower[j] > problem.upper[j]) {
      result.status = LpStatus::infeasible;
      return result;
    }
  }

  // Merge duplicate entries.
  std::vector<std::vector<std::pair<int, double>>> all(m_in);
  std::vector<double> rhs = problem.rhs;
  for (std::size_t i = 0; i < m_in; ++i) {
    std::vector<std::pair<int, double>> entries;
    const auto& row = problem.rows[i];
    for (std::size_t p = 0; p < row.index.size(); ++p) entries.emplace_back(row.index[p], row.value[p]);
    std::sort(entries.begin(), entries.end());
    for (const auto& e : entries) {
      if (!all[i].empty() && all[i].back().first == e.first) all[i].back().second += e.second;
      else all[i].push_back(e);
    }
  }

  // Presolve: fold fixed columns into the right-hand side and turn singleton
  // rows into column bounds, repeating until nothing changes.
  std::vector<double> lo = problem.lower, hi = problem.upper;
  std::vector<int> lo_row(n, -1), hi_row(n, -1);  // singleton row that set the bound
  std::vector<double> lo_coef(n, 0.0), hi_coef(n, 0.0);
  std::vector<char> alive(m_in, 1);
  std::vector<std::pair<std::size_t, std::size_t>> singletons;  // (row, column) in elimination order
  const double tol = config.feasibility_tol;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < m_in; ++i) {
      if (!alive[i]) continue;
      auto& entries = all[i];
      for (auto it = entries.begin(); it != entries.end();) {
        const auto j = static_cast<std::size_t>(it->first);
        if (it->second == 0.0 || lo[j] == hi[j]) {
          rhs[i] -= it->second * lo[j];
          it = entries.erase(it);
        } else {
          ++it;
        }
      }
      const double b = rhs[i];
      const Sense sense = problem.senses[i];
      if (entries.empty()) {
        const double slack = tol * std::max(1.0, std::abs(b));
        const bool ok = (sense == Sense::le && b >= -slack) || (sense == Sense::ge && b <= slack) ||
                        (sense == Sense::eq && std::abs(b) <= slack);
        if (!ok) {
          result.status = LpStatus::infeasible;
          return result;
        }
        alive[i] = 0;
        continue;
      }
      if (entries.size() != 1) continue;
      const auto j = static_cast<std::size_t>(entries[0].first);
      const double a = entries[0].second;
      const double v = b / a;
      // a x <= b caps x from above when a > 0.
      const bool caps_upper = sense == Sense::eq || ((sense == Sense::le) == (a > 0.0));
      const bool caps_lower = sense == Sense::eq || !caps_upper;
      if (caps_upper && v < hi[j]) {
        hi[j] = v;
        hi_row[j] = static_cast<int>(i);
        hi_coef[j] = a;
      }
      if (caps_lower && v > lo[j]) {
        lo[j] = v;
        lo_row[j] = static_cast<int>(i);
        lo_coef[j] = a;
      }
      if (lo[j] > hi[j]) {
        if (lo[j] - hi[j] > tol * std::max(1.0, std::abs(v))) {
          result.status = LpStatus::infeasible;
          return result;
        }
        lo[j] = hi[j] = std::max(problem.lower[j], std::min(problem.upper[j], 0.5 * (lo[j] + hi[j])));
      }
      alive[i] = 0;
      singletons.emplace_back(i, j);
      changed = true;
    }
  }

  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < m_in; ++i) {
    if (!alive[i]) continue;
    rows.push_back(std::move(all[i]));
    kept.push_back(i);
  }
  const std::size_t m = rows.size();

  // Equilibrate: rows by their largest entry, then columns likewise.
  std::vector<double> row_scale(m, 1.0), col_scale(n, 1.0);
  if (config.scale) {
    for (std::size_t i = 0; i < m; ++i) {
      double mx = 0.0;
      for (const auto& e : rows[i]) mx = std::max(mx, std::abs(e.second));
      row_scale[i] = 1.0 / mx;
    }
    std::vector<double> col_max(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (const auto& e : rows[i])
        col_max[static_cast<std::size_t>(e.first)] =
            std::max(col_max[static_cast<std::size_t>(e.first)], std::abs(e.second) * row_scale[i]);
    for (std::size_t j = 0; j < n; ++j)
      if (col_max[j] > 0.0) col_scale[j] = 1.0 / col_max[j];
  }

  // Column lists in scaled space; free columns are split into x+ - x-.
  std::vector<std::vector<std::pair<int, double>>> columns(n);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& e : rows[i])
      columns[static_cast<std::size_t>(e.first)].emplace_back(
          static_cast<int>(i), e.second * row_scale[i] * col_scale[static_cast<std::size_t>(e.first)]);

  Simplex sx(m, config);
  std::vector<std::pair<std::size_t, int>> origin;  // (original column, +1/-1)
  std::vector<double> cost;
  for (std::size_t j = 0; j < n; ++j) {
    const double lo_s = lo[j] / col_scale[j];
    const double hi_s = hi[j] / col_scale[j];
    const double c = problem.objective[j] * col_scale[j];
    if (lo_s == -kInf && hi_s == kInf) {
      sx.add_structural(columns[j], 0.0, kInf);
      origin.emplace_back(j, 1);
      cost.push_back(c);
      auto negated = columns[j];
      for (auto& e : negated) e.second = -e.second;
      sx.add_structural(negated, 0.0, kInf);
      origin.emplace_back(j, -1);
      cost.push_back(-c);
    } else {
      sx.add_structural(columns[j], lo_s, hi_s);
      origin.emplace_back(j, 1);
      cost.push_back(c);
    }
  }
  const std::size_t ns = sx.structural_;
  sx.b_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    sx.b_[i] = rhs[kept[i]] * row_scale[i];
    switch (problem.senses[kept[i]]) {
      case Sense::le: sx.add_unit(static_cast<int>(i), 1.0, 0.0, kInf); break;
      case Sense::ge: sx.add_unit(static_cast<int>(i), 1.0, -kInf, 0.0); break;
      case Sense::eq: sx.add_unit(static_cast<int>(i), 1.0, 0.0, 0.0); break;
    }
  }

  // Nonbasic structurals at their finite bound nearest zero.
  sx.x_.assign(ns + m, 0.0);
  sx.where_.assign(ns + m, Where::lower);
  for (std::size_t j = 0; j < ns; ++j) {
    const double lo = sx.lo_[j], hi = sx.hi_[j];
    if (lo != -kInf && (hi == kInf || std::abs(lo) <= std::abs(hi))) {
      sx.x_[j] = lo;
      sx.where_[j] = Where::lower;
    } else {
      sx.x_[j] = hi;
      sx.where_[j] = Where::upper;
    }
  }
  std::vector<double> residual = sx.b_;
  for (std::size_t j = 0; j < ns; ++j)
    if (sx.x_[j] != 0.0)
      for (int p = sx.start_[j]; p < sx.start_[j + 1]; ++p) residual[sx.row_[p]] -= sx.val_[p] * sx.x_[j];

  sx.first_artificial_ = ns + m;
  sx.head_.assign(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t slack = ns + i;
    const double r = residual[i];
    if (r >= sx.lo_[slack] && r <= sx.hi_[slack]) {
      sx.head_[i] = static_cast<int>(slack);
      sx.where_[slack] = Where::basic;
      sx.x_[slack] = r;
      continue;
    }
    const double at = r < sx.lo_[slack] ? sx.lo_[slack] : sx.hi_[slack];
    sx.x_[slack] = at;
    sx.where_[slack] = r < sx.lo_[slack] ? Where::lower : Where::upper;
    const double excess = r - at;
    sx.add_unit(static_cast<int>(i), excess > 0.0 ? 1.0 : -1.0, 0.0, kInf);
    sx.x_.push_back(std::abs(excess));
    sx.where_.push_back(Where::basic);
    sx.head_[i] = static_cast<int>(sx.cols() - 1);
  }

  const bool phase_one = sx.cols() > sx.first_artificial_;
  if (!sx.refactor()) {
    result.status = LpStatus::iteration_limit;
    return result;
  }
  double b_norm = 0.0;
  for (double v : sx.b_) b_norm = std::max(b_norm, std::abs(v));

  if (phase_one) {
    sx.cost_.assign(sx.cols(), 0.0);
    for (std::size_t j = sx.first_artificial_; j < sx.cols(); ++j) sx.cost_[j] = 1.0;
    const auto outcome = sx.run();
    if (outcome == Simplex::Outcome::iteration_limit || outcome == Simplex::Outcome::singular) {
      result.status = LpStatus::iteration_limit;
      result.iterations = sx.iterations_;
      return result;
    }
    if (!sx.refactor()) {
      result.status = LpStatus::iteration_limit;
      result.iterations = sx.iterations_;
      return result;
    }
    double infeasibility = 0.0;
    for (std::size_t j = sx.first_artificial_; j < sx.cols(); ++j) infeasibility += std::abs(sx.x_[j]);
    if (infeasibility > config.feasibility_tol * (1.0 + b_norm)) {
      result.status = LpStatus::infeasible;
      result.iterations = sx.iterations_;
      return result;
    }
    sx.drive_out_artificials();
    for (std::size_t j = sx.first_artificial_; j < sx.cols(); ++j) {
      sx.lo_[j] = 0.0;
      sx.hi_[j] = 0.0;
      if (sx.where_[j] != Where::basic) sx.x_[j] = 0.0;
    }
    if (!sx.refactor()) {
      result.status = LpStatus::iteration_limit;
      result.iterations = sx.iterations_;
      return result;
    }
  }

  sx.cost_.assign(sx.cols(), 0.0);
  for (std::size_t j = 0; j < ns; ++j) sx.cost_[j] = cost[j];
  const auto outcome = sx.run();
  result.iterations = sx.iterations_;
  if (outcome == Simplex::Outcome::unbounded) {
    result.status = LpStatus::unbounded;
    return result;
  }
  if (outcome != Simplex::Outcome::optimal) {
    result.status = LpStatus::iteration_limit;
    return result;
  }
  if (!sx.refactor()) {
    result.status = LpStatus::iteration_limit;
    return result;
  }

  result.status = LpStatus::optimal;
  result.x.assign(n, 0.0);
  for (std::size_t j = 0; j < ns; ++j) {
    const auto [orig, sign] = origin[j];
    result.x[orig] += sign * sx.x_[j] * col_scale[orig];
  }
  for (std::size_t j = 0; j < n; ++j) result.x[j] = std::clamp(result.x[j], problem.lower[j], problem.upper[j]);

  const auto mm = static_cast<Eigen::Index>(m);
  Eigen::VectorXd cb(mm);
  for (std::size_t r = 0; r < m; ++r) cb[static_cast<Eigen::Index>(r)] = sx.cost_[static_cast<std::size_t>(sx.head_[r])];
  const Eigen::VectorXd y = sx.solve_basis_transpose(cb);
  result.duals.assign(m_in, 0.0);
  for (std::size_t i = 0; i < m; ++i) result.duals[kept[i]] = y[static_cast<Eigen::Index>(i)] * row_scale[i];

  // Singleton rows price the bound they imposed, latest elimination first.
  if (!singletons.empty()) {
    std::vector<double> reduced = problem.objective;
    for (std::size_t i = 0; i < m_in; ++i) {
      if (result.duals[i] == 0.0) continue;
      const auto& row = problem.rows[i];
      for (std::size_t p = 0; p < row.index.size(); ++p)
        reduced[static_cast<std::size_t>(row.index[p])] -= result.duals[i] * row.value[p];
    }
    for (auto it = singletons.rbegin(); it != singletons.rend(); ++it) {
      const auto [i, j] = *it;
      const double d = reduced[j];
      double a = 0.0;
      if (d > 0.0 && lo_row[j] == static_cast<int>(i)) a = lo_coef[j];
      if (d < 0.0 && hi_row[j] == static_cast<int>(i)) a = hi_coef[j];
      if (a == 0.0) continue;
      const double yi = d / a;
      result.duals[i] = yi;
      const auto& row = problem.rows[i];
      for (std::size_t p = 0; p < row.index.size(); ++p)
        reduced[static_cast<std::size_t>(row.index[p])] -= yi * row.value[p];
    }
  }

  result.objective = problem.objective_offset;
  for (std::size_t j = 0; j < n; ++j) result.objective += problem.objective[j] * result.x[j];
  return result;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const LpConfig& config) {
  LpSolution first = solve_attempt(problem, config);
  bool retry = first.status == LpStatus::iteration_limit && first.iterations < config.max_iterations;
  if (first.status == LpStatus::optimal) {
    double scale = 1.0;
    for (double b : problem.rhs) scale = std::max(scale, std::abs(b));
    retry = primal_infeasibility(problem, first.x) > 1e-6 * scale;
  }
  if (!retry) return first;
  // A basis went singular or the answer drifted: retry with a stricter pivot
  // threshold and more frequent refactoring.
  LpConfig careful = config;
  careful.pivot_tol = std::max(config.pivot_tol * 1e3, 1e-7);
  careful.refactor_interval = std::max(1, config.refactor_interval / 5);
  LpSolution second = solve_attempt(problem, careful);
  second.iterations += first.iterations;
  return second;
}

double dual_objective(const LpProblem& problem, const std::vector<double>& duals) {
  std::vector<double> reduced = problem.objective;
  double value = problem.objective_offset;
  for (std::size_t i = 0; i < problem.row_count(); ++i) {
    const double y = duals[i];
    value += y * problem.rhs[i];
    const auto& row = problem.rows[i];
    for (std::size_t p = 0; p < row.index.size(); ++p) reduced[static_cast<std::size_t>(row.index[p])] -= y * row.value[p];
    // Sign-infeasible multipliers make the bound -inf.
    if ((problem.senses[i] == Sense::le && y > 0.0) || (problem.senses[i] == Sense::ge && y < 0.0)) {
      if (std::abs(y) > 1e-9) return -kInf;
    }
  }
  for (std::size_t j = 0; j < problem.cols(); ++j) {
    const double d = reduced[j];
    if (d > 0.0) {
      if (problem.lower[j] == -kInf) return -kInf;
      value += d * problem.lower[j];
    } else if (d < 0.0) {
      if (problem.upper[j] == kInf) return -kInf;
      value += d * problem.upper[j];
    }
  }
  return value;
}

double primal_infeasibility(const LpProblem& problem, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < problem.cols(); ++j) {
    worst = std::max(worst, problem.lower[j] - x[j]);
    worst = std::max(worst, x[j] - problem.upper[j]);
  }
  for (std::size_t i = 0; i < problem.row_count(); ++i) {
    const double act = row_activity(problem.rows[i], x);
    const double b = problem.rhs[i];
    switch (problem.senses[i]) {
      case Sense::le: worst = std::max(worst, act - b); break;
      case Sense::ge: worst = std::max(worst, b - act); break;
      case Sense::eq: worst = std::max(worst, std::abs(act - b)); break;
    }
  }
  return worst;
}

}  // namespace eipw::lp
