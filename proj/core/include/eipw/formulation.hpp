#pragma once

// Bilinear mixed-integer program for the hub-based park water network.
//
// The only continuous nonlinearity is flow x concentration. Regenerator
// selection multiplies some of those products (removed mass) and the
// removed-mass cost by a binary; such factors are carried as a `gate` and
// must be fixed before relaxation.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "eipw/model.hpp"

namespace eipw {

enum class Role {
  reuse,          // f_R(i,j,t)
  fresh,          // f_F(j,t)
  source_outlet,  // f_W(i,t)
  export_flow,    // f_CH(k,t)
  discharge,      // f_D(k,t)
  import_total,   // g_CH(k,t)
  sink_import,    // f_Imp(j,t)
  export_conc,    // C_exp(c,k,t)
  hub_conc,       // C_mix_CH(c,t)
  mass_removed,   // mrem(c,t)
  export_pipe,    // y(k,t)
  import_pipe,    // l(k,t)
  regen_choice,   // m(s,t)
};

const char* to_string(Role role);
bool is_flow(Role role);
bool is_concentration(Role role);
bool is_binary(Role role);

struct VariableInfo {
  int id = 0;
  Role role = Role::fresh;
  // Entity subscripts: `first` is i, j, k or s; `second` is j for reuse arcs.
  int first = -1;
  int second = -1;
  int contaminant = -1;
  int period = 0;
  double lower = 0.0;
  double upper = 0.0;
  bool integral = false;
  // True when the owning plant has not entered the park yet ([0,0] bounds).
  bool inactive = false;
};

class LinearExpr {
 public:
  // Merges repeated ids; zero coefficients are never stored.
  void add(int var, double coef);
  void add_constant(double value) { constant_ += value; }

  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }
  bool empty() const { return terms_.empty(); }

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

struct BilinearTerm {
  double coef = 0.0;
  int flow = -1;  // var_a
  int conc = -1;  // var_b
  int gate = -1;  // optional binary factor
};

// coef * var * gate, gate a binary.
struct GatedTerm {
  double coef = 0.0;
  int var = -1;
  int gate = -1;
};

enum class Sense { le, eq, ge };

struct Constraint {
  LinearExpr linear;
  std::vector<BilinearTerm> bilinear;
  Sense sense = Sense::eq;
  double rhs = 0.0;
  std::string tag;  // eq1..eq16, logic or bound
  std::string name;
};

struct Objective {
  LinearExpr linear;
  std::vector<BilinearTerm> bilinear;
  std::vector<GatedTerm> gated;
};

struct Program {
  std::vector<VariableInfo> variables;
  std::vector<Constraint> constraints;
  Objective objective;
  ObjectiveKind objective_kind = ObjectiveKind::cost;

  std::size_t continuous_count() const;
  std::size_t binary_count() const;
  std::size_t constraint_count() const { return constraints.size(); }
};

// Dense lookup from (role, subscripts, period) to variable id; -1 when absent.
class VariableMap {
 public:
  VariableMap() = default;
  VariableMap(const NetworkInstance& instance, const std::vector<VariableInfo>& vars);

  int reuse(std::size_t i, std::size_t j, std::size_t t) const { return reuse_[t][i][j]; }
  int fresh(std::size_t j, std::size_t t) const { return fresh_[t][j]; }
  int source_outlet(std::size_t i, std::size_t t) const { return outlet_[t][i]; }
  int export_flow(std::size_t k, std::size_t t) const { return export_[t][k]; }
  int discharge(std::size_t k, std::size_t t) const { return discharge_[t][k]; }
  int import_total(std::size_t k, std::size_t t) const { return import_[t][k]; }
  int sink_import(std::size_t j, std::size_t t) const { return sink_import_[t][j]; }
  int export_conc(std::size_t c, std::size_t k, std::size_t t) const { return export_conc_[t][c][k]; }
  int hub_conc(std::size_t c, std::size_t t) const { return hub_conc_[t][c]; }
  int mass_removed(std::size_t c, std::size_t t) const { return mass_removed_[t][c]; }
  int export_pipe(std::size_t k, std::size_t t) const { return export_pipe_[t][k]; }
  int import_pipe(std::size_t k, std::size_t t) const { return import_pipe_[t][k]; }
  int regen_choice(std::size_t s, std::size_t t) const { return regen_[t][s]; }

 private:
  std::vector<Table<int>> reuse_;
  Table<int> fresh_, outlet_, export_, discharge_, import_, sink_import_;
  std::vector<Table<int>> export_conc_;
  Table<int> hub_conc_, mass_removed_, export_pipe_, import_pipe_, regen_;
};

// One variable per (role, subscripts, period). Reuse arcs exist only inside a
// plant. Variables of plants that have not entered are kept with [0,0] bounds.
std::vector<VariableInfo> index_variables(const NetworkInstance& instance);

std::vector<Constraint> build_source_balances(const NetworkInstance& instance, const VariableMap& vars);
std::vector<Constraint> build_sink_balances_and_quality(const NetworkInstance& instance, const VariableMap& vars);
std::vector<Constraint> build_hub_import_export(const NetworkInstance& instance, const VariableMap& vars);
std::vector<Constraint> build_pipeline_bounds(const NetworkInstance& instance, const VariableMap& vars);
std::vector<Constraint> build_hub_quality(const NetworkInstance& instance, const VariableMap& vars);
std::vector<Constraint> build_logic_constraints(const NetworkInstance& instance, const VariableMap& vars);
Objective build_objective_cost(const NetworkInstance& instance, const VariableMap& vars);
Objective build_objective_freshwater(const NetworkInstance& instance, const VariableMap& vars);

Program assemble_program(const NetworkInstance& instance, ObjectiveKind kind);

// Model size excluding variables of plants that have not entered yet.
struct ModelSize {
  std::size_t continuous = 0;
  std::size_t binary = 0;
  std::size_t constraints = 0;
};
ModelSize model_size(const Program& program);

// Flattens a Solution into a vector indexed by variable id, and back.
std::vector<double> to_vector(const Program& program, const Solution& solution);
Solution from_vector(const NetworkInstance& instance, const Program& program,
                     const std::vector<double>& values);

// Evaluates constraint/objective expressions at a point.
double evaluate_lhs(const Constraint& row, const std::vector<double>& x);
double evaluate_objective(const Objective& objective, const std::vector<double>& x);

}  // namespace eipw
