#pragma once

// Global solver for the bilinear program: regenerator binaries are fixed by
// enumeration, pipeline binaries and concentration intervals are branched
// on, and every node is bounded by a McCormick LP.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "eipw/formulation.hpp"
#include "eipw/lp.hpp"
#include "eipw/model.hpp"
#include "eipw/verify.hpp"

namespace eipw {

enum class BranchRule { max_violation, max_range };

const char* to_string(BranchRule rule);

struct SolverConfig {
  double absolute_gap = 1e-6;
  double relative_gap = 1e-2;
  std::size_t max_nodes = 200000;
  double time_limit = 300.0;  // seconds
  BranchRule branching = BranchRule::max_violation;
  bool deterministic = true;

  double spatial_clamp = 0.25;       // split point kept inside [25%, 75%]
  double violation_tol = 1e-7;       // |w - x y| below this is exact
  int heuristic_rounds = 50;       // improvement rounds per start at a root
  int node_heuristic_rounds = 3;   // the same below the root
  double residual_tol = 1e-6;
  // Linear equalities with these tags are also multiplied by concentration
  // variables that already appear with one of their variables.
  std::vector<std::string> rlt_tags = {"eq4", "eq5", "eq9"};
  bool record_nodes = false;
  lp::LpConfig lp;

  // Throws std::invalid_argument unless tolerances > 0 and max_nodes >= 1.
  void validate() const;
};

struct Node {
  std::vector<double> lower;
  std::vector<double> upper;
  double parent_bound = -lp::kInf;
  int depth = 0;
  long id = 0;
  long parent = -1;

  bool fixed(int var) const {
    return lower[static_cast<std::size_t>(var)] == upper[static_cast<std::size_t>(var)];
  }
};

// Box of the program's declared bounds.
Node root_node(const Program& program);

// Copy of `node` with every regenerator binary fixed: choice `s` in all
// periods, the others zero.
Node fix_regenerator(const Program& program, const Node& node, std::size_t s);

// A product w = flow * conc appearing in the relaxation.
struct Product {
  int flow = -1;
  int conc = -1;
  int column = -1;  // LP column of w
  bool original = true;  // false when introduced by a multiplied equality
};

struct Relaxation {
  lp::LpProblem lp;  // columns [0, n) are program variables, then products
  std::vector<Product> products;
  bool empty = false;  // the node box is empty
};

// Throws std::logic_error if a gate binary is not fixed in the node.
Relaxation mccormick_relax(const Program& program, const Node& node, const SolverConfig& config = {});

enum class BoundStatus { bounded, infeasible, failed };

struct BoundResult {
  BoundStatus status = BoundStatus::failed;
  double value = -lp::kInf;
  std::vector<double> point;     // program variables at the relaxation optimum
  std::vector<Product> products;
  std::vector<double> product_values;
  int lp_iterations = 0;
};

BoundResult lower_bound(const Program& program, const Node& node, const SolverConfig& config = {});

// Alternating LP heuristic: with the hub outlet quality fixed the design is
// an LP; the quality is then reset from the design and the LP solved again.
// `start` supplies a hub quality in program-vector form. Root nodes (depth 0)
// also sweep the hub-quality interval. LPs solved are added to `lp_solves`.
std::optional<Solution> incumbent_heuristic(const NetworkInstance& instance, const Program& program,
                                            const Node& node, const std::vector<double>* start,
                                            const SolverConfig& config = {}, std::size_t* lp_solves = nullptr);

// Recomputes the dependent flows, qualities and removed mass of `point` from
// its reuse, import and export decisions; the design if it passes the
// residual check.
std::optional<Solution> settle_point(const NetworkInstance& instance, const Program& program, const Node& node,
                                     const std::vector<double>& point, const SolverConfig& config = {});

struct BranchDecision {
  enum class Kind { none, binary, spatial } kind = Kind::none;
  int variable = -1;
  double split = 0.0;
  std::vector<Node> children;
};

// Children are numbered by the caller; ids here are left as in the parent.
BranchDecision branch(const Program& program, const Node& node, const BoundResult& relaxation,
                      const SolverConfig& config = {});

// One pass of interval propagation; nullopt when some interval empties.
std::optional<Node> tighten_bounds(const Program& program, const Node& node);

// `stalled`: the queue emptied but some leaf could not be split further or
// its LP failed, and its bound keeps the gap above tolerance.
enum class Termination { optimal, infeasible, node_limit, time_limit, stalled };

const char* to_string(Termination reason);

struct NodeTrace {
  long id = 0;
  long parent = -1;
  int depth = 0;
  double parent_bound = -lp::kInf;
  double bound = -lp::kInf;  // +inf when pruned as infeasible
};

struct SolveReport {
  std::string model;
  ObjectiveKind objective_kind = ObjectiveKind::cost;
  std::optional<Solution> incumbent;
  double lower_bound = -lp::kInf;
  double gap = lp::kInf;  // relative, (incumbent - bound) / max(1e-9, |incumbent|)
  std::size_t nodes = 0;
  std::size_t lp_solves = 0;
  double wall_time = 0.0;
  Termination termination = Termination::infeasible;
  ResidualReport residuals;
  std::vector<NodeTrace> trace;

  double objective() const { return incumbent ? incumbent->objective_value : lp::kInf; }
};

SolveReport solve(const NetworkInstance& instance, const Program& program, const SolverConfig& config = {});

}  // namespace eipw
