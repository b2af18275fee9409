#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include "eipw/solver.hpp"

namespace eipw {

const char* to_string(BranchRule rule) {
  return rule == BranchRule::max_violation ? "max_violation" : "max_range";
}

void SolverConfig::validate() const {
  if (!(absolute_gap > 0.0) || !(relative_gap > 0.0)) throw std::invalid_argument("gap tolerances must be > 0");
  if (!(violation_tol > 0.0) || !(residual_tol > 0.0)) throw std::invalid_argument("tolerances must be > 0");
  if (max_nodes < 1) throw std::invalid_argument("max_nodes must be >= 1");
  if (!(time_limit > 0.0)) throw std::invalid_argument("time limit must be > 0");
  if (!(spatial_clamp >= 0.0 && spatial_clamp < 0.5)) throw std::invalid_argument("spatial clamp must lie in [0, 0.5)");
  if (heuristic_rounds < 1 || node_heuristic_rounds < 0)
    throw std::invalid_argument("heuristic_rounds must be >= 1 and node_heuristic_rounds >= 0");
}

Node root_node(const Program& program) {
  Node node;
  node.lower.reserve(program.variables.size());
  node.upper.reserve(program.variables.size());
  for (const auto& v : program.variables) {
    node.lower.push_back(v.lower);
    node.upper.push_back(v.upper);
  }
  return node;
}

Node fix_regenerator(const Program& program, const Node& node, std::size_t s) {
  Node out = node;
  for (const auto& v : program.variables) {
    if (v.role != Role::regen_choice) continue;
    const double bit = static_cast<std::size_t>(v.first) == s ? 1.0 : 0.0;
    out.lower[static_cast<std::size_t>(v.id)] = bit;
    out.upper[static_cast<std::size_t>(v.id)] = bit;
  }
  return out;
}

namespace {

class ProductTable {
 public:
  ProductTable(lp::LpProblem& lp, const Node& node) : lp_(lp), node_(node) {}

  int column(int flow, int conc, bool original) {
    auto key = std::make_pair(flow, conc);
    auto it = index_.find(key);
    if (it != index_.end()) return products_[it->second].column;
    const double xl = node_.lower[static_cast<std::size_t>(flow)], xu = node_.upper[static_cast<std::size_t>(flow)];
    const double yl = node_.lower[static_cast<std::size_t>(conc)], yu = node_.upper[static_cast<std::size_t>(conc)];
    const double corners[] = {xl * yl, xl * yu, xu * yl, xu * yu};
    const double lo = *std::min_element(std::begin(corners), std::end(corners));
    const double hi = *std::max_element(std::begin(corners), std::end(corners));
    const int col = lp_.add_column(0.0, lo, hi);
    index_.emplace(key, products_.size());
    products_.push_back({flow, conc, col, original});
    return col;
  }

  bool has(int flow, int conc) const { return index_.count({flow, conc}) > 0; }
  std::vector<Product>& products() { return products_; }

 private:
  lp::LpProblem& lp_;
  const Node& node_;
  std::map<std::pair<int, int>, std::size_t> index_;
  std::vector<Product> products_;
};

double gate_value(const Node& node, int gate) {
  if (gate < 0) return 1.0;
  const auto g = static_cast<std::size_t>(gate);
  if (node.lower[g] != node.upper[g]) throw std::logic_error("relaxation needs every gate binary fixed");
  return node.lower[g];
}

void add_envelope(lp::LpProblem& lp, const Product& p, const Node& node) {
  const double xl = node.lower[static_cast<std::size_t>(p.flow)], xu = node.upper[static_cast<std::size_t>(p.flow)];
  const double yl = node.lower[static_cast<std::size_t>(p.conc)], yu = node.upper[static_cast<std::size_t>(p.conc)];
  auto row = [&](double cx, double cy, Sense sense, double rhs) {
    lp::SparseRow r;
    r.add(p.column, 1.0);
    if (cx != 0.0) r.add(p.flow, -cx);
    if (cy != 0.0) r.add(p.conc, -cy);
    lp.add_row(std::move(r), sense, rhs);
  };
  row(yl, xl, Sense::ge, -xl * yl);
  row(yu, xu, Sense::ge, -xu * yu);
  row(yl, xu, Sense::le, -xu * yl);
  row(yu, xl, Sense::le, -xl * yu);
}

}  // namespace

Relaxation mccormick_relax(const Program& program, const Node& node, const SolverConfig& config) {
  const std::size_t n = program.variables.size();
  if (node.lower.size() != n || node.upper.size() != n) throw std::invalid_argument("node does not match program");

  Relaxation out;
  for (std::size_t v = 0; v < n; ++v) {
    if (node.lower[v] > node.upper[v]) {
      out.empty = true;
      return out;
    }
  }

  auto& lp = out.lp;
  for (std::size_t v = 0; v < n; ++v) lp.add_column(0.0, node.lower[v], node.upper[v]);
  ProductTable table(lp, node);

  for (const auto& [id, coef] : program.objective.linear.terms()) lp.objective[static_cast<std::size_t>(id)] += coef;
  lp.objective_offset = program.objective.linear.constant();
  for (const auto& g : program.objective.gated) lp.objective[static_cast<std::size_t>(g.var)] += g.coef * gate_value(node, g.gate);
  for (const auto& b : program.objective.bilinear) {
    const double coef = b.coef * gate_value(node, b.gate);
    if (coef == 0.0) continue;
    lp.objective[static_cast<std::size_t>(table.column(b.flow, b.conc, true))] += coef;
  }

  for (const auto& row : program.constraints) {
    std::map<int, double> merged;
    for (const auto& [id, coef] : row.linear.terms()) merged[id] += coef;
    for (const auto& b : row.bilinear) {
      const double coef = b.coef * gate_value(node, b.gate);
      if (coef == 0.0) continue;
      merged[table.column(b.flow, b.conc, true)] += coef;
    }
    lp::SparseRow sparse;
    for (const auto& [col, coef] : merged)
      if (coef != 0.0) sparse.add(col, coef);
    lp.add_row(std::move(sparse), row.sense, row.rhs - row.linear.constant());
  }

  // Multiply selected linear equalities by concentrations they already meet
  // in some product; the products this needs are added as new columns.
  const std::set<std::string> tags(config.rlt_tags.begin(), config.rlt_tags.end());
  const std::vector<Product> originals = table.products();
  for (const auto& row : program.constraints) {
    if (row.sense != Sense::eq || !row.bilinear.empty() || !tags.count(row.tag)) continue;
    std::set<int> concs;
    for (const auto& [id, coef] : row.linear.terms())
      for (const auto& p : originals)
        if (p.flow == id) concs.insert(p.conc);
    for (int y : concs) {
      std::map<int, double> merged;
      for (const auto& [id, coef] : row.linear.terms()) merged[table.column(id, y, table.has(id, y))] += coef;
      const double rhs = row.rhs - row.linear.constant();
      if (rhs != 0.0) merged[y] -= rhs;
      lp::SparseRow sparse;
      for (const auto& [col, coef] : merged)
        if (coef != 0.0) sparse.add(col, coef);
      lp.add_row(std::move(sparse), Sense::eq, 0.0);
    }
  }

  for (const auto& p : table.products()) add_envelope(lp, p, node);
  out.products = std::move(table.products());
  return out;
}

BoundResult lower_bound(const Program& program, const Node& node, const SolverConfig& config) {
  BoundResult result;
  Relaxation relax = mccormick_relax(program, node, config);
  if (relax.empty) {
    result.status = BoundStatus::infeasible;
    return result;
  }
  const lp::LpSolution sol = lp::solve_lp(relax.lp, config.lp);
  result.lp_iterations = sol.iterations;
  if (sol.status == lp::LpStatus::infeasible) {
    result.status = BoundStatus::infeasible;
    return result;
  }
  if (sol.status != lp::LpStatus::optimal) {
    result.status = BoundStatus::failed;
    return result;
  }
  result.status = BoundStatus::bounded;
  result.value = sol.objective;
  result.point.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(program.variables.size()));
  result.products = std::move(relax.products);
  result.product_values.reserve(result.products.size());
  for (const auto& p : result.products) result.product_values.push_back(sol.x[static_cast<std::size_t>(p.column)]);
  return result;
}

}  // namespace eipw
