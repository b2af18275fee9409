#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "eipw/formulation.hpp"
#include "support.hpp"

using namespace eipw;
using eipw::testing::load;
using eipw::testing::tiny;
using eipw::testing::tiny_pair;

namespace {

const Constraint* find_row(const std::vector<Constraint>& rows, const std::string& name) {
  for (const auto& r : rows)
    if (r.name == name) return &r;
  return nullptr;
}

// Counts derived from the superstructure: per active period, in-plant reuse
// arcs, fresh/import/outlet per stream, three plant flows and a quality per
// contaminant per plant, plus the hub quality and removed mass.
ModelSize expected_size(const NetworkInstance& in) {
  ModelSize s;
  const std::size_t C = in.contaminant_count(), R = in.regenerators.size();
  for (std::size_t t = 0; t < in.period_count(); ++t) {
    std::size_t plants = 0, src = 0, snk = 0, arcs = 0;
    for (std::size_t k = 0; k < in.plants.size(); ++k) plants += in.plant_active(k, t);
    for (std::size_t i = 0; i < in.sources.size(); ++i) src += in.source_active(i, t);
    for (std::size_t j = 0; j < in.sinks.size(); ++j) snk += in.sink_active(j, t);
    for (std::size_t i = 0; i < in.sources.size(); ++i)
      for (std::size_t j = 0; j < in.sinks.size(); ++j)
        arcs += in.reuse_allowed(i, j) && in.source_active(i, t) && in.sink_active(j, t);
    s.continuous += arcs + 2 * snk + src + 3 * plants + C * plants + 2 * C;
    s.binary += 2 * plants + R;
    // eq1, eq2, eq3, eq4, eq5, eq6 x2, eq7 x2, eq8, eq9, eq10, eq11, eq13
    s.constraints += src + snk + C * snk + 2 * plants + 4 * plants + C * plants + 1 + 2 * C + 1;
    if (t + 1 < in.period_count()) s.constraints += R + 2 * plants;
  }
  return s;
}

}  // namespace

TEST(IndexVariables, BoundsAndRoles) {
  const NetworkInstance in = load("eip1.json");
  const auto vars = index_variables(in);
  double total_flow = 0.0, sink_flow = 0.0, max_conc = 0.0;
  for (const auto& s : in.sources) {
    total_flow += s.flow[0];
    max_conc = std::max(max_conc, s.conc[0][0]);
  }
  for (const auto& s : in.sinks) sink_flow += s.flow[0];
  std::set<Role> seen;
  for (std::size_t id = 0; id < vars.size(); ++id) {
    const auto& v = vars[id];
    EXPECT_EQ(v.id, static_cast<int>(id));
    EXPECT_LE(v.lower, v.upper);
    seen.insert(v.role);
    if (is_binary(v.role)) {
      EXPECT_TRUE(v.integral);
      EXPECT_EQ(v.lower, 0.0);
      EXPECT_EQ(v.upper, 1.0);
    } else if (is_concentration(v.role)) {
      EXPECT_DOUBLE_EQ(v.upper, max_conc);
    } else if (v.role != Role::mass_removed) {
      EXPECT_LE(v.upper, std::max(total_flow, sink_flow) + 1e-9) << to_string(v.role);
    }
  }
  EXPECT_EQ(seen.size(), 13u);
}

TEST(IndexVariables, InactivePlantsFixedAtZero) {
  const NetworkInstance in = load("eip1_case2.json");
  const auto vars = index_variables(in);
  std::size_t inactive = 0;
  for (const auto& v : vars) {
    if (!v.inactive) continue;
    ++inactive;
    EXPECT_EQ(v.lower, 0.0);
    EXPECT_EQ(v.upper, 0.0);
  }
  EXPECT_GT(inactive, 0u);
}

TEST(ModelSize, FollowsInPlantReusePolicy) {
  for (const char* file : {"eip1.json", "eip2.json", "eip1_case2.json", "eip2_case2.json"}) {
    const NetworkInstance in = load(file);
    const ModelSize got = model_size(assemble_program(in, ObjectiveKind::cost));
    const ModelSize want = expected_size(in);
    EXPECT_EQ(got.continuous, want.continuous) << file;
    EXPECT_EQ(got.binary, want.binary) << file;
    EXPECT_EQ(got.constraints, want.constraints) << file;
  }
  const ModelSize one = model_size(assemble_program(load("eip1.json"), ObjectiveKind::cost));
  EXPECT_EQ(one.continuous, 134u);
  EXPECT_EQ(one.binary, 14u);
  EXPECT_EQ(one.constraints, 70u);
}

TEST(SourceBalances, RhsIsSourceFlow) {
  const NetworkInstance in1 = load("eip1.json");
  const Program p1 = assemble_program(in1, ObjectiveKind::cost);
  const VariableMap m1(in1, p1.variables);
  const auto rows1 = build_source_balances(in1, m1);
  const Constraint* sr1 = find_row(rows1, "source_balance(SR1,t1)");
  ASSERT_NE(sr1, nullptr);
  EXPECT_EQ(sr1->tag, "eq1");
  EXPECT_EQ(sr1->sense, Sense::eq);
  EXPECT_DOUBLE_EQ(sr1->rhs, 20.0);
  // Five same-plant sinks plus the outlet.
  EXPECT_EQ(sr1->linear.terms().size(), 6u);

  const NetworkInstance in2 = load("eip2.json");
  const Program p2 = assemble_program(in2, ObjectiveKind::cost);
  const auto rows2 = build_source_balances(in2, VariableMap(in2, p2.variables));
  const Constraint* sr8 = find_row(rows2, "source_balance(SR8,t1)");
  ASSERT_NE(sr8, nullptr);
  EXPECT_DOUBLE_EQ(sr8->rhs, 600.0);
}

TEST(SourceBalances, ZeroFlowSourceForcesZero) {
  NetworkInstance in = tiny();
  in.sources[0].flow[0] = 0.0;
  const Program p = assemble_program(in, ObjectiveKind::freshwater);
  const auto rows = build_source_balances(in, VariableMap(in, p.variables));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].rhs, 0.0);
  for (const auto& [id, coef] : rows[0].linear.terms()) {
    EXPECT_GT(coef, 0.0);
    EXPECT_GE(p.variables[id].lower, 0.0);
  }
}

TEST(SinkBalances, RhsAndQuality) {
  const NetworkInstance in = load("eip1.json");
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const auto rows = build_sink_balances_and_quality(in, VariableMap(in, p.variables));
  const Constraint* bal = find_row(rows, "sink_balance(SK5,t1)");
  const Constraint* qual = find_row(rows, "sink_quality(COD,SK5,t1)");
  ASSERT_NE(bal, nullptr);
  ASSERT_NE(qual, nullptr);
  EXPECT_DOUBLE_EQ(bal->rhs, 10.0);
  EXPECT_DOUBLE_EQ(qual->rhs, 4000.0);
  EXPECT_EQ(qual->sense, Sense::le);
  ASSERT_EQ(qual->bilinear.size(), 1u);
  EXPECT_EQ(p.variables[qual->bilinear[0].flow].role, Role::sink_import);
  EXPECT_EQ(p.variables[qual->bilinear[0].conc].role, Role::hub_conc);

  const NetworkInstance in2 = load("eip2.json");
  const Program p2 = assemble_program(in2, ObjectiveKind::cost);
  const auto rows2 = build_sink_balances_and_quality(in2, VariableMap(in2, p2.variables));
  EXPECT_DOUBLE_EQ(find_row(rows2, "sink_balance(SK3,t1)")->rhs, 300.0);
  EXPECT_DOUBLE_EQ(find_row(rows2, "sink_quality(COD,SK3,t1)")->rhs, 300.0 * 37.0);
}

TEST(HubImportExport, PlantWithoutSinks) {
  NetworkInstance in = tiny_pair();
  in.sinks.pop_back();
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const VariableMap m(in, p.variables);
  const auto rows = build_hub_import_export(in, m);
  const Constraint* b = find_row(rows, "plant_import(B,t1)");
  ASSERT_NE(b, nullptr);
  ASSERT_EQ(b->linear.terms().size(), 1u);
  EXPECT_EQ(b->linear.terms()[0].first, m.import_total(1, 0));
  const Constraint* a = find_row(rows, "plant_export(A,t1)");
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->linear.terms().size(), 3u);
}

TEST(PipelineBounds, OffStateForcesZero) {
  const NetworkInstance in = tiny_pair();
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const VariableMap m(in, p.variables);
  const auto rows = build_pipeline_bounds(in, m);
  std::vector<double> x(p.variables.size(), 0.0);
  x[m.import_total(0, 0)] = 0.5;
  const Constraint* hi = find_row(rows, "import_pipe_max(A,t1)");
  ASSERT_NE(hi, nullptr);
  EXPECT_GT(evaluate_lhs(*hi, x), hi->rhs);
  x[m.import_pipe(0, 0)] = 1.0;
  EXPECT_LE(evaluate_lhs(*hi, x), hi->rhs);
  // Below the minimum pipe flow with the pipe open.
  x[m.import_total(0, 0)] = 0.5 * in.economics.hub_flow_lb;
  const Constraint* lo = find_row(rows, "import_pipe_min(A,t1)");
  EXPECT_LT(evaluate_lhs(*lo, x), lo->rhs);
}

TEST(HubQuality, BilinearTermsPairFlowAndConcentration) {
  for (const char* file : {"eip1.json", "eip1_case2.json"}) {
    const NetworkInstance in = load(file);
    const Program p = assemble_program(in, ObjectiveKind::cost);
    for (const auto& row : p.constraints)
      for (const auto& b : row.bilinear) {
        EXPECT_TRUE(is_flow(p.variables[b.flow].role)) << row.name;
        EXPECT_TRUE(is_concentration(p.variables[b.conc].role)) << row.name;
        if (b.gate >= 0) {
          EXPECT_EQ(p.variables[b.gate].role, Role::regen_choice);
        }
      }
  }
}

TEST(HubQuality, HandMassBalance) {
  // One plant exporting 100 t/h at 100 ppm with RR 0.5.
  NetworkInstance in = tiny(50.0, 0.5);
  in.sources[0].flow[0] = 100.0;
  in.sinks[0].flow[0] = 100.0;
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const VariableMap m(in, p.variables);
  std::vector<double> x(p.variables.size(), 0.0);
  x[m.source_outlet(0, 0)] = 100.0;
  x[m.export_flow(0, 0)] = 100.0;
  x[m.import_total(0, 0)] = 100.0;
  x[m.export_conc(0, 0, 0)] = 100.0;
  x[m.hub_conc(0, 0)] = 50.0;
  x[m.mass_removed(0, 0)] = 5000.0;
  x[m.regen_choice(0, 0)] = 1.0;
  for (const auto& row : build_hub_quality(in, m)) EXPECT_NEAR(evaluate_lhs(row, x), row.rhs, 1e-9) << row.name;
}

TEST(LogicConstraints, SinglePeriodHasNoLinking) {
  const NetworkInstance in = load("eip1.json");
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const auto rows = build_logic_constraints(in, VariableMap(in, p.variables));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].tag, "eq13");
}

TEST(LogicConstraints, OnceInstalledStaysInstalled) {
  const NetworkInstance in = load("eip1_case2.json");
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const VariableMap m(in, p.variables);
  const auto rows = build_logic_constraints(in, m);
  std::vector<double> x(p.variables.size(), 0.0);
  for (std::size_t t = 0; t < 3; ++t) x[m.regen_choice(3, t)] = 1.0;
  for (const auto& row : rows) {
    const double lhs = evaluate_lhs(row, x);
    EXPECT_TRUE(row.sense == Sense::eq ? std::abs(lhs - row.rhs) < 1e-12 : lhs >= row.rhs - 1e-12) << row.name;
  }
  // Switching regenerator after t1 breaks eq14.
  x[m.regen_choice(3, 1)] = 0.0;
  x[m.regen_choice(4, 1)] = 1.0;
  bool broken = false;
  for (const auto& row : rows)
    if (row.tag == "eq14" && evaluate_lhs(row, x) < row.rhs - 1e-12) broken = true;
  EXPECT_TRUE(broken);
  // A pipe that was off may open later.
  const Constraint* keep = find_row(rows, "keep_import_pipe(A,t1)");
  ASSERT_NE(keep, nullptr);
  x[m.import_pipe(0, 1)] = 1.0;
  EXPECT_GE(evaluate_lhs(*keep, x), keep->rhs);
}

TEST(Objective, FreshwaterIsLinear) {
  const NetworkInstance in = load("eip1_case2.json");
  const Program p = assemble_program(in, ObjectiveKind::freshwater);
  EXPECT_TRUE(p.objective.bilinear.empty());
  EXPECT_TRUE(p.objective.gated.empty());
  const VariableMap m(in, p.variables);
  for (const auto& [id, coef] : p.objective.linear.terms()) {
    EXPECT_EQ(p.variables[id].role, Role::fresh);
    EXPECT_NEAR(coef, in.scenario.period_weights[p.variables[id].period], 1e-15);
  }
}

TEST(Objective, CostMatchesDirectEvaluation) {
  const NetworkInstance in = load("eip1_case2.json");
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const VariableMap m(in, p.variables);
  Solution s = Solution::zeros(in);
  for (std::size_t t = 0; t < 3; ++t) {
    s.regen_choice[t][2] = 1;
    s.fresh[t][0] = 3.0 + t;
    s.discharge[t][0] = 2.0;
    s.export_flow[t][0] = 4.0;
    s.import_total[t][0] = 4.0;
    s.export_pipe[t][0] = 1;
    s.import_pipe[t][0] = 1;
    s.mass_removed[t][0] = 700.0;
  }
  const std::vector<double> x = to_vector(p, s);
  EXPECT_NEAR(evaluate_objective(p.objective, x), weighted_objective(in, s, ObjectiveKind::cost), 1e-12);

  // Scaling every weight scales the objective.
  NetworkInstance scaled = in;
  for (double& w : scaled.scenario.period_weights) w *= 4.0;
  const Program ps = assemble_program(scaled, ObjectiveKind::cost);
  EXPECT_NEAR(evaluate_objective(ps.objective, x), 4.0 * evaluate_objective(p.objective, x), 1e-12);
}

TEST(Objective, EmptyNetworkCostsNothing) {
  const NetworkInstance in = load("eip1.json");
  const Program p = assemble_program(in, ObjectiveKind::cost);
  Solution s = Solution::zeros(in);
  s.regen_choice[0][0] = 1;
  EXPECT_EQ(evaluate_objective(p.objective, to_vector(p, s)), 0.0);
}

TEST(AssembleProgram, Deterministic) {
  const NetworkInstance in = load("eip2_case2.json");
  const Program a = assemble_program(in, ObjectiveKind::cost);
  const Program b = assemble_program(in, ObjectiveKind::cost);
  ASSERT_EQ(a.variables.size(), b.variables.size());
  ASSERT_EQ(a.constraints.size(), b.constraints.size());
  for (std::size_t i = 0; i < a.variables.size(); ++i) {
    EXPECT_EQ(a.variables[i].role, b.variables[i].role);
    EXPECT_EQ(a.variables[i].upper, b.variables[i].upper);
  }
  for (std::size_t i = 0; i < a.constraints.size(); ++i) {
    EXPECT_EQ(a.constraints[i].name, b.constraints[i].name);
    EXPECT_EQ(a.constraints[i].linear.terms(), b.constraints[i].linear.terms());
  }
}

TEST(AssembleProgram, EveryReferenceIsValid) {
  const NetworkInstance in = load("eip1_case2.json");
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const int n = static_cast<int>(p.variables.size());
  for (const auto& row : p.constraints) {
    for (const auto& [id, coef] : row.linear.terms()) {
      EXPECT_TRUE(id >= 0 && id < n);
      EXPECT_NE(coef, 0.0);
    }
    for (const auto& b : row.bilinear) EXPECT_TRUE(b.flow >= 0 && b.flow < n && b.conc >= 0 && b.conc < n);
  }
}

TEST(LinearExpr, MergesAndDropsZeros) {
  LinearExpr e;
  e.add(3, 1.5);
  e.add(1, 2.0);
  e.add(3, -1.5);
  e.add(2, 0.0);
  ASSERT_EQ(e.terms().size(), 1u);
  EXPECT_EQ(e.terms()[0].first, 1);
}

TEST(Vectorize, RoundTrip) {
  const NetworkInstance in = tiny_pair(2, true);
  const Program p = assemble_program(in, ObjectiveKind::cost);
  std::vector<double> x(p.variables.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = p.variables[i].inactive ? 0.0 : 0.25 * static_cast<double>(i % 7);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (p.variables[i].integral) x[i] = static_cast<double>(i % 2);
  const Solution s = from_vector(in, p, x);
  EXPECT_EQ(to_vector(p, s), x);
}
