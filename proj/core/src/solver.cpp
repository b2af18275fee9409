#include "eipw/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <tuple>

namespace eipw {

const char* to_string(Termination reason) {
  switch (reason) {
    case Termination::optimal: return "optimal";
    case Termination::infeasible: return "infeasible";
    case Termination::node_limit: return "node_limit";
    case Termination::time_limit: return "time_limit";
    case Termination::stalled: return "stalled";
  }
  return "?";
}

namespace {

bool tiny_width(double lo, double hi) { return hi - lo <= 1e-9 * (1.0 + std::abs(hi)); }

std::vector<Node> split(const Node& node, int var, double at) {
  Node left = node, right = node;
  left.upper[static_cast<std::size_t>(var)] = at;
  right.lower[static_cast<std::size_t>(var)] = at;
  return {std::move(left), std::move(right)};
}

}  // namespace

BranchDecision branch(const Program& program, const Node& node, const BoundResult& relaxation,
                      const SolverConfig& config) {
  BranchDecision out;
  const auto& x = relaxation.point;

  int pick = -1;
  double closest = 1.0;
  for (const auto& v : program.variables) {
    if (!v.integral || node.fixed(v.id)) continue;
    const double value = x[static_cast<std::size_t>(v.id)];
    const double frac = std::min(value - std::floor(value), std::ceil(value) - value);
    if (frac <= 1e-6) continue;
    const double distance = std::abs(value - 0.5);
    if (distance < closest) {
      closest = distance;
      pick = v.id;
    }
  }
  if (pick >= 0) {
    out.kind = BranchDecision::Kind::binary;
    out.variable = pick;
    Node zero = node, one = node;
    zero.upper[static_cast<std::size_t>(pick)] = 0.0;
    one.lower[static_cast<std::size_t>(pick)] = 1.0;
    out.children = {std::move(zero), std::move(one)};
    return out;
  }

  // Spatial branching on the worst product.
  double best_score = 0.0;
  int best_var = -1;
  for (std::size_t p = 0; p < relaxation.products.size(); ++p) {
    const auto& prod = relaxation.products[p];
    const double xv = x[static_cast<std::size_t>(prod.flow)];
    const double yv = x[static_cast<std::size_t>(prod.conc)];
    const double violation = std::abs(relaxation.product_values[p] - xv * yv);
    if (violation <= config.violation_tol * std::max(1.0, std::abs(xv * yv))) continue;

    const auto c = static_cast<std::size_t>(prod.conc);
    const auto f = static_cast<std::size_t>(prod.flow);
    int var = -1;
    if (!tiny_width(node.lower[c], node.upper[c]))
      var = prod.conc;
    else if (!tiny_width(node.lower[f], node.upper[f]))
      var = prod.flow;
    if (var < 0) continue;

    double score = violation;
    if (config.branching == BranchRule::max_range) {
      const auto& info = program.variables[static_cast<std::size_t>(var)];
      const double root = info.upper - info.lower;
      score = root > 0.0 ? (node.upper[static_cast<std::size_t>(var)] - node.lower[static_cast<std::size_t>(var)]) / root : 0.0;
    }
    if (score > best_score) {
      best_score = score;
      best_var = var;
    }
  }
  if (best_var < 0) return out;

  const auto v = static_cast<std::size_t>(best_var);
  const double lo = node.lower[v], hi = node.upper[v];
  const double width = hi - lo;
  const double at = std::clamp(x[v], lo + config.spatial_clamp * width, hi - config.spatial_clamp * width);
  out.kind = BranchDecision::Kind::spatial;
  out.variable = best_var;
  out.split = at;
  out.children = split(node, best_var, at);
  return out;
}

namespace {

struct Open {
  double bound;
  int depth;
  long id;
  Node node;
};

struct OpenOrder {
  bool operator()(const Open& a, const Open& b) const {
    // Best bound first, then deeper, then older.
    return std::make_tuple(a.bound, -a.depth, a.id) < std::make_tuple(b.bound, -b.depth, b.id);
  }
};

}  // namespace

SolveReport solve(const NetworkInstance& instance, const Program& program, const SolverConfig& config) {
  config.validate();
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  auto elapsed = [&started] { return std::chrono::duration<double>(clock::now() - started).count(); };

  SolveReport report;
  report.model = instance.name;
  report.objective_kind = program.objective_kind;

  double incumbent = lp::kInf;
  auto tolerance = [&config](double value) {
    return std::max(config.absolute_gap, config.relative_gap * std::abs(value));
  };
  auto offer = [&](std::optional<Solution> candidate) {
    if (candidate && candidate->objective_value < incumbent) {
      incumbent = candidate->objective_value;
      report.incumbent = std::move(candidate);
    }
  };

  std::multiset<Open, OpenOrder> open;
  long next_id = 0;
  const Node root = root_node(program);
  for (std::size_t s = 0; s < instance.regenerators.size(); ++s) {
    Node node = fix_regenerator(program, root, s);
    node.id = next_id++;
    open.insert({-lp::kInf, 0, node.id, std::move(node)});
  }

  double stalled = lp::kInf;  // bounds of leaves left unresolved
  double fathomed = lp::kInf;  // lowest bound pruned by the gap tolerance
  report.termination = Termination::optimal;
  auto prune = [&](double bound) {
    if (bound >= incumbent - tolerance(incumbent)) {
      fathomed = std::min(fathomed, bound);
      return true;
    }
    return false;
  };
  while (!open.empty()) {
    if (prune(open.begin()->bound)) break;
    if (report.nodes >= config.max_nodes) {
      report.termination = Termination::node_limit;
      break;
    }
    if (elapsed() > config.time_limit) {
      report.termination = Termination::time_limit;
      break;
    }
    Open current = std::move(open.extract(open.begin()).value());
    ++report.nodes;
    Node& node = current.node;

    NodeTrace trace{node.id, node.parent, node.depth, node.parent_bound, lp::kInf};
    auto record = [&] {
      if (config.record_nodes) report.trace.push_back(trace);
    };

    auto tightened = tighten_bounds(program, node);
    if (!tightened) {
      record();
      continue;
    }
    node = std::move(*tightened);

    const BoundResult relax = lower_bound(program, node, config);
    ++report.lp_solves;
    if (relax.status == BoundStatus::infeasible) {
      record();
      continue;
    }
    if (relax.status == BoundStatus::failed) {
      trace.bound = node.parent_bound;
      stalled = std::min(stalled, node.parent_bound);
      record();
      continue;
    }
    const double bound = std::max(relax.value, node.parent_bound);
    trace.bound = bound;
    record();
    if (prune(bound)) continue;

    offer(incumbent_heuristic(instance, program, node, &relax.point, config, &report.lp_solves));
    if (prune(bound)) continue;

    BranchDecision decision = branch(program, node, relax, config);
    if (decision.children.empty()) {
      // Nothing left to split: the relaxation point itself may be a design.
      offer(settle_point(instance, program, node, relax.point, config));
      if (!prune(bound)) stalled = std::min(stalled, bound);
      continue;
    }
    for (auto& child : decision.children) {
      child.id = next_id++;
      child.parent = node.id;
      child.depth = node.depth + 1;
      child.parent_bound = bound;
      const long id = child.id;
      const int depth = child.depth;
      open.insert({bound, depth, id, std::move(child)});
    }
  }

  double bound = std::min({stalled, fathomed, incumbent});
  if (!open.empty()) bound = std::min(bound, open.begin()->bound);
  report.lower_bound = bound;
  if (report.termination == Termination::optimal) {
    if (report.incumbent ? stalled < incumbent - tolerance(incumbent) : stalled < lp::kInf)
      report.termination = Termination::stalled;
    else if (!report.incumbent)
      report.termination = Termination::infeasible;
  }
  if (report.incumbent) {
    report.gap = std::max(0.0, (incumbent - bound) / std::max(1e-9, std::abs(incumbent)));
    report.residuals = residuals(instance, *report.incumbent, config.residual_tol);
  }
  report.wall_time = elapsed();
  return report;
}

}  // namespace eipw
