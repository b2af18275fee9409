#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "eipw/solver.hpp"
#include "eipw/verify.hpp"
#include "support.hpp"

using namespace eipw;
using eipw::testing::load;
using eipw::testing::tiny;
using eipw::testing::tiny_pair;

namespace {

// A program holding nothing but the product x*y in its objective.
Program product_program(double xl, double xu, double yl, double yu) {
  Program p;
  VariableInfo x;
  x.id = 0;
  x.role = Role::export_flow;
  x.lower = xl;
  x.upper = xu;
  VariableInfo y = x;
  y.id = 1;
  y.role = Role::export_conc;
  y.lower = yl;
  y.upper = yu;
  p.variables = {x, y};
  p.objective.bilinear.push_back({1.0, 0, 1, -1});
  return p;
}

// Range of w allowed by the envelope at a fixed (x, y).
std::pair<double, double> envelope_at(const Relaxation& r, double x, double y) {
  lp::LpProblem q = r.lp;
  q.lower[0] = q.upper[0] = x;
  q.lower[1] = q.upper[1] = y;
  const int w = r.products.at(0).column;
  std::fill(q.objective.begin(), q.objective.end(), 0.0);
  q.objective_offset = 0.0;
  q.objective[static_cast<std::size_t>(w)] = 1.0;
  const auto lo = lp::solve_lp(q);
  q.objective[static_cast<std::size_t>(w)] = -1.0;
  const auto hi = lp::solve_lp(q);
  EXPECT_EQ(lo.status, lp::LpStatus::optimal);
  EXPECT_EQ(hi.status, lp::LpStatus::optimal);
  return {lo.objective, -hi.objective};
}

SolverConfig tight() {
  SolverConfig cfg;
  cfg.relative_gap = 1e-6;
  cfg.absolute_gap = 1e-7;
  cfg.time_limit = 60.0;
  return cfg;
}

bool logic_holds(const NetworkInstance& in, const Solution& s) {
  for (std::size_t t = 0; t < in.period_count(); ++t) {
    int chosen = 0;
    for (int m : s.regen_choice[t]) chosen += m;
    if (chosen != 1) return false;
    if (t + 1 < in.period_count()) {
      for (std::size_t k = 0; k < in.plants.size(); ++k)
        if (s.export_pipe[t][k] > s.export_pipe[t + 1][k] || s.import_pipe[t][k] > s.import_pipe[t + 1][k]) return false;
      if (s.regen_choice[t] != s.regen_choice[t + 1]) return false;
    }
  }
  return true;
}

}  // namespace

TEST(McCormick, ExactAtCorner) {
  const Program p = product_program(0, 1, 0, 1);
  const Relaxation r = mccormick_relax(p, root_node(p));
  ASSERT_EQ(r.products.size(), 1u);
  const auto [lo, hi] = envelope_at(r, 1.0, 1.0);
  EXPECT_NEAR(lo, 1.0, 1e-9);
  EXPECT_NEAR(hi, 1.0, 1e-9);
}

TEST(McCormick, CollapsesOnFixedFactor) {
  const Program p = product_program(2, 2, 0, 7);
  const Relaxation r = mccormick_relax(p, root_node(p));
  for (double y : {0.0, 1.3, 7.0}) {
    const auto [lo, hi] = envelope_at(r, 2.0, y);
    EXPECT_NEAR(lo, 2.0 * y, 1e-9);
    EXPECT_NEAR(hi, 2.0 * y, 1e-9);
  }
}

TEST(McCormick, MaxGapIsQuarterOfBoxArea) {
  const Program p = product_program(0, 10, 0, 10);
  const Relaxation r = mccormick_relax(p, root_node(p));
  double worst = 0.0;
  std::pair<double, double> where{};
  for (int a = 0; a <= 100; ++a)
    for (int b = 0; b <= 100; ++b) {
      const double x = 0.1 * a, y = 0.1 * b;
      const auto [lo, hi] = envelope_at(r, x, y);
      const double gap = std::max(x * y - lo, hi - x * y);
      if (gap > worst + 1e-12) {
        worst = gap;
        where = {x, y};
      }
    }
  EXPECT_NEAR(worst, 25.0, 1e-7);
  EXPECT_NEAR(where.first, 5.0, 1e-9);
  EXPECT_NEAR(where.second, 5.0, 1e-9);
}

TEST(McCormick, SoundOnRandomBoxes) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-50.0, 50.0), unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    double xl = u(rng), xu = u(rng), yl = u(rng), yu = u(rng);
    if (xl > xu) std::swap(xl, xu);
    if (yl > yu) std::swap(yl, yu);
    const Program p = product_program(xl, xu, yl, yu);
    const Relaxation r = mccormick_relax(p, root_node(p));
    const double x = xl + unit(rng) * (xu - xl), y = yl + unit(rng) * (yu - yl);
    std::vector<double> point(r.lp.cols(), 0.0);
    point[0] = x;
    point[1] = y;
    point[static_cast<std::size_t>(r.products[0].column)] = x * y;
    EXPECT_LE(lp::primal_infeasibility(r.lp, point), 1e-9 * std::max(1.0, std::abs(x * y))) << "trial " << trial;
  }
}

TEST(McCormick, EmptyBoxAndUnfixedGate) {
  const Program p = product_program(0, 1, 0, 1);
  Node n = root_node(p);
  n.lower[0] = 2.0;
  EXPECT_TRUE(mccormick_relax(p, n).empty);

  const NetworkInstance in = tiny(50.0, 0.5);
  const Program full = assemble_program(in, ObjectiveKind::cost);
  EXPECT_THROW(mccormick_relax(full, root_node(full)), std::logic_error);
}

TEST(LowerBound, TinyRootBelowOracle) {
  const NetworkInstance in = tiny();
  const Program p = assemble_program(in, ObjectiveKind::freshwater);
  const BoundResult b = lower_bound(p, fix_regenerator(p, root_node(p), 0));
  ASSERT_EQ(b.status, BoundStatus::bounded);
  EXPECT_LE(b.value, 5.0 + 1e-9);
}

TEST(LowerBound, ExactWhenConcentrationsFixed) {
  const NetworkInstance in = tiny();
  const Program p = assemble_program(in, ObjectiveKind::freshwater);
  Node n = fix_regenerator(p, root_node(p), 0);
  const VariableMap m(in, p.variables);
  for (int v : {m.export_conc(0, 0, 0), m.hub_conc(0, 0)}) n.lower[v] = n.upper[v] = 100.0;
  const BoundResult b = lower_bound(p, n);
  ASSERT_EQ(b.status, BoundStatus::bounded);
  EXPECT_NEAR(b.value, 5.0, 1e-7);
}

TEST(LowerBound, InfeasiblePipePattern) {
  const NetworkInstance in = tiny();
  const Program p = assemble_program(in, ObjectiveKind::freshwater);
  Node n = fix_regenerator(p, root_node(p), 0);
  const VariableMap m(in, p.variables);
  n.lower[m.export_pipe(0, 0)] = 1.0;
  n.upper[m.export_flow(0, 0)] = 0.0;
  EXPECT_EQ(lower_bound(p, n).status, BoundStatus::infeasible);
}

TEST(Heuristic, TinyFindsOracleDesign) {
  const NetworkInstance in = tiny();
  const Program p = assemble_program(in, ObjectiveKind::freshwater);
  const Node n = fix_regenerator(p, root_node(p), 0);
  const auto s = incumbent_heuristic(in, p, n, nullptr);
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(s->objective_value, 5.0, 1e-6);
  EXPECT_TRUE(residuals(in, *s).pass);
}

TEST(Heuristic, UniformSourcesHandDerived) {
  // Both sources at 30 ppm. After the 0.3 regenerator the hub carries 21 ppm,
  // so SK1 (<= 20 ppm, 3 t/h) needs x fresh with 21 (3 - x) <= 60, x = 1/7.
  NetworkInstance in = tiny_pair();
  for (auto& src : in.sources) src.conc[0][0] = 30.0;
  const Program p = assemble_program(in, ObjectiveKind::freshwater);
  const Node n = fix_regenerator(p, root_node(p), 0);
  const auto s = incumbent_heuristic(in, p, n, nullptr);
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(s->objective_value, 1.0 / 7.0, 1e-6);
  EXPECT_LE(lower_bound(p, n).value, s->objective_value + 1e-9);
}

TEST(Heuristic, InfeasibleNode) {
  const NetworkInstance in = load("infeasible_fixture.json");
  const Program p = assemble_program(in, ObjectiveKind::cost);
  EXPECT_FALSE(incumbent_heuristic(in, p, fix_regenerator(p, root_node(p), 0), nullptr).has_value());
}

TEST(Branch, FractionalBinary) {
  const NetworkInstance in = tiny_pair();
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const VariableMap m(in, p.variables);
  const Node n = fix_regenerator(p, root_node(p), 0);
  BoundResult r;
  r.status = BoundStatus::bounded;
  r.point.assign(p.variables.size(), 0.0);
  r.point[m.export_pipe(1, 0)] = 0.4;
  r.point[m.import_pipe(0, 0)] = 0.6;  // same distance, higher id loses
  const BranchDecision d = branch(p, n, r);
  ASSERT_EQ(d.kind, BranchDecision::Kind::binary);
  const int want = std::min(m.export_pipe(1, 0), m.import_pipe(0, 0));
  EXPECT_EQ(d.variable, want);
  ASSERT_EQ(d.children.size(), 2u);
  EXPECT_EQ(d.children[0].upper[want], 0.0);
  EXPECT_EQ(d.children[1].lower[want], 1.0);
}

TEST(Branch, SpatialSplitIsClamped) {
  const Program p = product_program(0, 10, 0, 800);
  const Node n = root_node(p);
  BoundResult r;
  r.status = BoundStatus::bounded;
  r.point = {5.0, 100.0};
  r.products = {Product{0, 1, 2, true}};
  r.product_values = {100.0};  // far from 500
  const BranchDecision d = branch(p, n, r);
  ASSERT_EQ(d.kind, BranchDecision::Kind::spatial);
  EXPECT_EQ(d.variable, 1);
  EXPECT_DOUBLE_EQ(d.split, 200.0);
  ASSERT_EQ(d.children.size(), 2u);
  EXPECT_EQ(d.children[0].upper[1], 200.0);
  EXPECT_EQ(d.children[1].lower[1], 200.0);
  EXPECT_EQ(d.children[0].lower[1], 0.0);
  EXPECT_EQ(d.children[1].upper[1], 800.0);
}

TEST(Branch, ClampProperty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double hi = 1.0 + 1000.0 * u(rng);
    const Program p = product_program(0, 10, 0, hi);
    BoundResult r;
    r.point = {5.0, hi * u(rng)};
    r.products = {Product{0, 1, 2, true}};
    r.product_values = {5.0 * r.point[1] + 1.0};
    const BranchDecision d = branch(p, root_node(p), r);
    ASSERT_EQ(d.kind, BranchDecision::Kind::spatial);
    EXPECT_GE(d.split, 0.25 * hi - 1e-12);
    EXPECT_LE(d.split, 0.75 * hi + 1e-12);
    EXPECT_DOUBLE_EQ(d.split, std::clamp(r.point[1], 0.25 * hi, 0.75 * hi));
  }
}

TEST(Branch, NothingToDo) {
  const Program p = product_program(0, 10, 0, 10);
  BoundResult r;
  r.point = {2.0, 3.0};
  r.products = {Product{0, 1, 2, true}};
  r.product_values = {6.0 + 1e-9};
  const BranchDecision d = branch(p, root_node(p), r);
  EXPECT_EQ(d.kind, BranchDecision::Kind::none);
  EXPECT_TRUE(d.children.empty());
}

TEST(TightenBounds, SourceFlowCapsReuse) {
  const NetworkInstance in = load("eip1.json");
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const VariableMap m(in, p.variables);
  const auto n = tighten_bounds(p, fix_regenerator(p, root_node(p), 4));
  ASSERT_TRUE(n.has_value());
  for (std::size_t j = 0; j < in.sinks.size(); ++j) {
    const int v = m.reuse(0, j, 0);
    if (v >= 0) {
      EXPECT_LE(n->upper[v], 20.0 + 1e-7);
    }
  }
}

TEST(TightenBounds, ClosedPipeEmptiesFlow) {
  const NetworkInstance in = load("eip1.json");
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const VariableMap m(in, p.variables);
  Node n = fix_regenerator(p, root_node(p), 4);
  n.upper[m.export_pipe(1, 0)] = 0.0;
  const auto t = tighten_bounds(p, n);
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->lower[m.export_flow(1, 0)], 0.0);
  EXPECT_LE(t->upper[m.export_flow(1, 0)], 1e-8);
}

TEST(TightenBounds, SoundAndReachesFixedPoint) {
  const NetworkInstance in = tiny_pair();
  const Program p = assemble_program(in, ObjectiveKind::cost);
  std::optional<Node> n = fix_regenerator(p, root_node(p), 1);
  for (int pass = 0; pass < 50 && n; ++pass) {
    auto next = tighten_bounds(p, *n);
    ASSERT_TRUE(next.has_value());
    if (next->lower == n->lower && next->upper == n->upper) break;
    n = next;
  }
  const auto again = tighten_bounds(p, *n);
  ASSERT_TRUE(again.has_value());
  EXPECT_EQ(again->lower, n->lower);
  EXPECT_EQ(again->upper, n->upper);
  // The optimum stays inside the tightened box.
  const SolveReport rep = solve(in, p, tight());
  ASSERT_TRUE(rep.incumbent.has_value());
  if (rep.incumbent->regen_choice[0][1]) {
    const auto x = to_vector(p, *rep.incumbent);
    for (std::size_t v = 0; v < x.size(); ++v) {
      EXPECT_GE(x[v], n->lower[v] - 1e-6);
      EXPECT_LE(x[v], n->upper[v] + 1e-6);
    }
  }
}

TEST(TightenBounds, DetectsEmptyBox) {
  const NetworkInstance in = tiny();
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const VariableMap m(in, p.variables);
  Node n = fix_regenerator(p, root_node(p), 0);
  n.upper[m.fresh(0, 0)] = 0.0;
  n.upper[m.sink_import(0, 0)] = 0.0;
  n.upper[m.reuse(0, 0, 0)] = 1.0;
  EXPECT_FALSE(tighten_bounds(p, n).has_value());
}

TEST(Solve, TinyFreshwaterIsFive) {
  const NetworkInstance in = tiny();
  const SolveReport r = solve(in, assemble_program(in, ObjectiveKind::freshwater), tight());
  ASSERT_TRUE(r.incumbent.has_value());
  EXPECT_EQ(r.termination, Termination::optimal);
  EXPECT_NEAR(r.objective(), 5.0, 1e-6);
  EXPECT_NEAR(r.gap, 0.0, 1e-6);
  EXPECT_TRUE(r.residuals.pass);
}

TEST(Solve, InfeasibleInstance) {
  const NetworkInstance in = load("infeasible_fixture.json");
  const SolveReport r = solve(in, assemble_program(in, ObjectiveKind::cost), tight());
  EXPECT_EQ(r.termination, Termination::infeasible);
  EXPECT_FALSE(r.incumbent.has_value());
}

TEST(Solve, ReportInvariantsOnStagedPair) {
  const NetworkInstance in = tiny_pair(2, true);
  SolverConfig cfg = tight();
  cfg.record_nodes = true;
  const SolveReport r = solve(in, assemble_program(in, ObjectiveKind::cost), cfg);
  ASSERT_TRUE(r.incumbent.has_value());
  EXPECT_LE(r.lower_bound, r.objective() + cfg.absolute_gap);
  EXPECT_TRUE(r.residuals.pass);
  EXPECT_LE(r.residuals.worst_scaled, 1e-6);
  EXPECT_TRUE(logic_holds(in, *r.incumbent));
  // Plant B before entry carries nothing.
  EXPECT_EQ(r.incumbent->export_flow[0][1], 0.0);
  EXPECT_EQ(r.incumbent->fresh[0][1], 0.0);
}

TEST(Solve, BoundsAreMonotoneAlongTree) {
  const NetworkInstance in = tiny_pair(2, false);
  SolverConfig cfg = tight();
  cfg.record_nodes = true;
  const SolveReport r = solve(in, assemble_program(in, ObjectiveKind::cost), cfg);
  ASSERT_FALSE(r.trace.empty());
  std::map<long, double> bound;
  for (const auto& t : r.trace) bound[t.id] = t.bound;
  std::size_t checked = 0;
  for (const auto& t : r.trace) {
    if (t.parent < 0 || !std::isfinite(t.bound)) continue;
    auto it = bound.find(t.parent);
    ASSERT_NE(it, bound.end());
    EXPECT_GE(t.bound, it->second - 1e-6) << "node " << t.id;
    EXPECT_GE(t.bound, t.parent_bound - 1e-6) << "node " << t.id;
    ++checked;
  }
  EXPECT_GT(checked, 0u);
}

TEST(Solve, DeterministicReports) {
  const NetworkInstance in = tiny_pair(2, true);
  const Program p = assemble_program(in, ObjectiveKind::cost);
  SolverConfig cfg = tight();
  cfg.record_nodes = true;
  const SolveReport a = solve(in, p, cfg), b = solve(in, p, cfg);
  EXPECT_EQ(a.termination, b.termination);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_EQ(a.lp_solves, b.lp_solves);
  EXPECT_EQ(a.lower_bound, b.lower_bound);
  EXPECT_EQ(a.gap, b.gap);
  ASSERT_TRUE(a.incumbent && b.incumbent);
  EXPECT_EQ(to_vector(p, *a.incumbent), to_vector(p, *b.incumbent));
  EXPECT_EQ(a.incumbent->objective_value, b.incumbent->objective_value);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].id, b.trace[i].id);
    EXPECT_EQ(a.trace[i].bound, b.trace[i].bound);
  }
  EXPECT_EQ(a.residuals.worst_scaled, b.residuals.worst_scaled);
}

TEST(Solve, WeightScalingKeepsArgmin) {
  const NetworkInstance in = tiny_pair(2, true);
  NetworkInstance scaled = in;
  for (double& w : scaled.scenario.period_weights) w *= 3.0;
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const Program q = assemble_program(scaled, ObjectiveKind::cost);
  const SolveReport a = solve(in, p, tight()), b = solve(scaled, q, tight());
  ASSERT_EQ(a.termination, Termination::optimal);
  ASSERT_EQ(b.termination, Termination::optimal);
  EXPECT_NEAR(b.objective(), 3.0 * a.objective(), 1e-6 * b.objective());
  // Each optimum is optimal for the other weighting too.
  EXPECT_NEAR(weighted_objective(scaled, *a.incumbent, ObjectiveKind::cost), b.objective(), 1e-5 * b.objective());
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.max_nodes = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.relative_gap = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
