#include "eipw/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eipw {

const char* to_string(Role role) {
  switch (role) {
    case Role::reuse: return "f_R";
    case Role::fresh: return "f_F";
    case Role::source_outlet: return "f_W";
    case Role::export_flow: return "f_CH";
    case Role::discharge: return "f_D";
    case Role::import_total: return "g_CH";
    case Role::sink_import: return "f_Imp";
    case Role::export_conc: return "C_exp";
    case Role::hub_conc: return "C_mix_CH";
    case Role::mass_removed: return "mrem";
    case Role::export_pipe: return "y";
    case Role::import_pipe: return "l";
    case Role::regen_choice: return "m";
  }
  return "?";
}

bool is_flow(Role role) {
  switch (role) {
    case Role::reuse:
    case Role::fresh:
    case Role::source_outlet:
    case Role::export_flow:
    case Role::discharge:
    case Role::import_total:
    case Role::sink_import:
      return true;
    default:
      return false;
  }
}

bool is_concentration(Role role) { return role == Role::export_conc || role == Role::hub_conc; }

bool is_binary(Role role) {
  return role == Role::export_pipe || role == Role::import_pipe || role == Role::regen_choice;
}

void LinearExpr::add(int var, double coef) {
  if (coef == 0.0) return;
  for (auto it = terms_.begin(); it != terms_.end(); ++it) {
    if (it->first == var) {
      it->second += coef;
      if (it->second == 0.0) terms_.erase(it);
      return;
    }
  }
  terms_.emplace_back(var, coef);
}

std::size_t Program::continuous_count() const {
  return static_cast<std::size_t>(
      std::count_if(variables.begin(), variables.end(), [](const VariableInfo& v) { return !v.integral; }));
}

std::size_t Program::binary_count() const { return variables.size() - continuous_count(); }

namespace {

struct PeriodScale {
  double flow_max = 0.0;
  std::vector<double> conc_max;  // [c]
};

PeriodScale period_scale(const NetworkInstance& in, std::size_t t) {
  PeriodScale scale;
  double source_total = 0.0;
  double sink_total = 0.0;
  for (std::size_t i = 0; i < in.sources.size(); ++i)
    if (in.source_active(i, t)) source_total += in.sources[i].flow[t];
  for (std::size_t j = 0; j < in.sinks.size(); ++j)
    if (in.sink_active(j, t)) sink_total += in.sinks[j].flow[t];
  // A sink may draw more than the park's sources offer (freshwater covers it).
  scale.flow_max = std::max(source_total, sink_total);
  scale.conc_max.assign(in.contaminant_count(), 0.0);
  for (std::size_t c = 0; c < in.contaminant_count(); ++c)
    for (std::size_t i = 0; i < in.sources.size(); ++i)
      if (in.source_active(i, t)) scale.conc_max[c] = std::max(scale.conc_max[c], in.sources[i].conc[c][t]);
  return scale;
}

Constraint make_row(std::string tag, std::string name, Sense sense, double rhs) {
  Constraint row;
  row.tag = std::move(tag);
  row.name = std::move(name);
  row.sense = sense;
  row.rhs = rhs;
  return row;
}

std::string at(std::size_t t) { return ",t" + std::to_string(t + 1) + ")"; }

}  // namespace

std::vector<VariableInfo> index_variables(const NetworkInstance& in) {
  std::vector<VariableInfo> vars;
  auto push = [&vars](Role role, int first, int second, int c, std::size_t t, double lo, double hi, bool active) {
    VariableInfo v;
    v.id = static_cast<int>(vars.size());
    v.role = role;
    v.first = first;
    v.second = second;
    v.contaminant = c;
    v.period = static_cast<int>(t);
    v.integral = is_binary(role);
    v.inactive = !active;
    v.lower = active ? lo : 0.0;
    v.upper = active ? hi : 0.0;
    vars.push_back(v);
  };

  const std::size_t n = in.sources.size();
  const std::size_t m = in.sinks.size();
  const std::size_t K = in.plants.size();
  const std::size_t C = in.contaminant_count();
  for (std::size_t t = 0; t < in.period_count(); ++t) {
    const PeriodScale scale = period_scale(in, t);
    const double F = scale.flow_max;
    double mass_max = 0.0;
    for (std::size_t c = 0; c < C; ++c) mass_max = std::max(mass_max, F * scale.conc_max[c]);

    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (in.reuse_allowed(i, j))
          push(Role::reuse, int(i), int(j), -1, t, 0.0, F, in.source_active(i, t));
    for (std::size_t j = 0; j < m; ++j) push(Role::fresh, int(j), -1, -1, t, 0.0, F, in.sink_active(j, t));
    for (std::size_t i = 0; i < n; ++i) push(Role::source_outlet, int(i), -1, -1, t, 0.0, F, in.source_active(i, t));
    for (std::size_t k = 0; k < K; ++k) push(Role::export_flow, int(k), -1, -1, t, 0.0, F, in.plant_active(k, t));
    for (std::size_t k = 0; k < K; ++k) push(Role::discharge, int(k), -1, -1, t, 0.0, F, in.plant_active(k, t));
    for (std::size_t k = 0; k < K; ++k) push(Role::import_total, int(k), -1, -1, t, 0.0, F, in.plant_active(k, t));
    for (std::size_t j = 0; j < m; ++j) push(Role::sink_import, int(j), -1, -1, t, 0.0, F, in.sink_active(j, t));
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t k = 0; k < K; ++k)
        push(Role::export_conc, int(k), -1, int(c), t, 0.0, scale.conc_max[c], in.plant_active(k, t));
    for (std::size_t c = 0; c < C; ++c) push(Role::hub_conc, -1, -1, int(c), t, 0.0, scale.conc_max[c], true);
    for (std::size_t c = 0; c < C; ++c) push(Role::mass_removed, -1, -1, int(c), t, 0.0, mass_max, true);
    for (std::size_t k = 0; k < K; ++k) push(Role::export_pipe, int(k), -1, -1, t, 0.0, 1.0, in.plant_active(k, t));
    for (std::size_t k = 0; k < K; ++k) push(Role::import_pipe, int(k), -1, -1, t, 0.0, 1.0, in.plant_active(k, t));
    for (std::size_t s = 0; s < in.regenerators.size(); ++s)
      push(Role::regen_choice, int(s), -1, -1, t, 0.0, 1.0, true);
  }
  return vars;
}

VariableMap::VariableMap(const NetworkInstance& in, const std::vector<VariableInfo>& vars) {
  const std::size_t r = in.period_count();
  const std::size_t n = in.sources.size();
  const std::size_t m = in.sinks.size();
  const std::size_t K = in.plants.size();
  const std::size_t C = in.contaminant_count();
  const std::size_t S = in.regenerators.size();
  reuse_.assign(r, Table<int>(n, std::vector<int>(m, -1)));
  fresh_.assign(r, std::vector<int>(m, -1));
  outlet_.assign(r, std::vector<int>(n, -1));
  export_.assign(r, std::vector<int>(K, -1));
  discharge_.assign(r, std::vector<int>(K, -1));
  import_.assign(r, std::vector<int>(K, -1));
  sink_import_.assign(r, std::vector<int>(m, -1));
  export_conc_.assign(r, Table<int>(C, std::vector<int>(K, -1)));
  hub_conc_.assign(r, std::vector<int>(C, -1));
  mass_removed_.assign(r, std::vector<int>(C, -1));
  export_pipe_.assign(r, std::vector<int>(K, -1));
  import_pipe_.assign(r, std::vector<int>(K, -1));
  regen_.assign(r, std::vector<int>(S, -1));
  for (const auto& v : vars) {
    const auto t = static_cast<std::size_t>(v.period);
    const auto a = static_cast<std::size_t>(v.first);
    switch (v.role) {
      case Role::reuse: reuse_[t][a][static_cast<std::size_t>(v.second)] = v.id; break;
      case Role::fresh: fresh_[t][a] = v.id; break;
      case Role::source_outlet: outlet_[t][a] = v.id; break;
      case Role::export_flow: export_[t][a] = v.id; break;
      case Role::discharge: discharge_[t][a] = v.id; break;
      case Role::import_total: import_[t][a] = v.id; break;
      case Role::sink_import: sink_import_[t][a] = v.id; break;
      case Role::export_conc: export_conc_[t][static_cast<std::size_t>(v.contaminant)][a] = v.id; break;
      case Role::hub_conc: hub_conc_[t][static_cast<std::size_t>(v.contaminant)] = v.id; break;
      case Role::mass_removed: mass_removed_[t][static_cast<std::size_t>(v.contaminant)] = v.id; break;
      case Role::export_pipe: export_pipe_[t][a] = v.id; break;
      case Role::import_pipe: import_pipe_[t][a] = v.id; break;
      case Role::regen_choice: regen_[t][a] = v.id; break;
    }
  }
}

std::vector<Constraint> build_source_balances(const NetworkInstance& in, const VariableMap& vars) {
  std::vector<Constraint> rows;
  for (std::size_t t = 0; t < in.period_count(); ++t) {
    for (std::size_t i = 0; i < in.sources.size(); ++i) {
      if (!in.source_active(i, t)) continue;
      auto row = make_row("eq1", "source_balance(" + in.sources[i].id + at(t), Sense::eq, in.sources[i].flow[t]);
      for (std::size_t j = 0; j < in.sinks.size(); ++j)
        if (in.reuse_allowed(i, j)) row.linear.add(vars.reuse(i, j, t), 1.0);
      row.linear.add(vars.source_outlet(i, t), 1.0);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<Constraint> build_sink_balances_and_quality(const NetworkInstance& in, const VariableMap& vars) {
  std::vector<Constraint> rows;
  const auto& cf = in.economics.freshwater_conc;
  for (std::size_t t = 0; t < in.period_count(); ++t) {
    for (std::size_t j = 0; j < in.sinks.size(); ++j) {
      if (!in.sink_active(j, t)) continue;
      const auto& sink = in.sinks[j];
      auto row = make_row("eq2", "sink_balance(" + sink.id + at(t), Sense::eq, sink.flow[t]);
      for (std::size_t i = 0; i < in.sources.size(); ++i)
        if (in.reuse_allowed(i, j)) row.linear.add(vars.reuse(i, j, t), 1.0);
      row.linear.add(vars.fresh(j, t), 1.0);
      row.linear.add(vars.sink_import(j, t), 1.0);
      rows.push_back(std::move(row));
    }
    for (std::size_t c = 0; c < in.contaminant_count(); ++c) {
      for (std::size_t j = 0; j < in.sinks.size(); ++j) {
        if (!in.sink_active(j, t)) continue;
        const auto& sink = in.sinks[j];
        auto row = make_row("eq3", "sink_quality(" + in.contaminants[c] + "," + sink.id + at(t), Sense::le,
                            sink.flow[t] * sink.max_conc[c][t]);
        for (std::size_t i = 0; i < in.sources.size(); ++i)
          if (in.reuse_allowed(i, j)) row.linear.add(vars.reuse(i, j, t), in.sources[i].conc[c][t]);
        row.linear.add(vars.fresh(j, t), cf[c]);
        row.bilinear.push_back({1.0, vars.sink_import(j, t), vars.hub_conc(c, t), -1});
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<Constraint> build_hub_import_export(const NetworkInstance& in, const VariableMap& vars) {
  std::vector<Constraint> rows;
  for (std::size_t t = 0; t < in.period_count(); ++t) {
    for (std::size_t k = 0; k < in.plants.size(); ++k) {
      if (!in.plant_active(k, t)) continue;
      auto row = make_row("eq4", "plant_import(" + in.plants[k] + at(t), Sense::eq, 0.0);
      row.linear.add(vars.import_total(k, t), 1.0);
      for (std::size_t j : in.sinks_of(k)) row.linear.add(vars.sink_import(j, t), -1.0);
      rows.push_back(std::move(row));
    }
    for (std::size_t k = 0; k < in.plants.size(); ++k) {
      if (!in.plant_active(k, t)) continue;
      auto row = make_row("eq5", "plant_export(" + in.plants[k] + at(t), Sense::eq, 0.0);
      for (std::size_t i : in.sources_of(k)) row.linear.add(vars.source_outlet(i, t), 1.0);
      row.linear.add(vars.export_flow(k, t), -1.0);
      row.linear.add(vars.discharge(k, t), -1.0);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<Constraint> build_pipeline_bounds(const NetworkInstance& in, const VariableMap& vars) {
  std::vector<Constraint> rows;
  const double lb = in.economics.hub_flow_lb;
  const double ub = in.hub_flow_upper();
  for (std::size_t t = 0; t < in.period_count(); ++t) {
    for (std::size_t k = 0; k < in.plants.size(); ++k) {
      if (!in.plant_active(k, t)) continue;
      const std::string who = in.plants[k] + at(t);
      auto lo = make_row("eq6", "import_pipe_min(" + who, Sense::ge, 0.0);
      lo.linear.add(vars.import_total(k, t), 1.0);
      lo.linear.add(vars.import_pipe(k, t), -lb);
      auto hi = make_row("eq6", "import_pipe_max(" + who, Sense::le, 0.0);
      hi.linear.add(vars.import_total(k, t), 1.0);
      hi.linear.add(vars.import_pipe(k, t), -ub);
      rows.push_back(std::move(lo));
      rows.push_back(std::move(hi));
    }
    for (std::size_t k = 0; k < in.plants.size(); ++k) {
      if (!in.plant_active(k, t)) continue;
      const std::string who = in.plants[k] + at(t);
      auto lo = make_row("eq7", "export_pipe_min(" + who, Sense::ge, 0.0);
      lo.linear.add(vars.export_flow(k, t), 1.0);
      lo.linear.add(vars.export_pipe(k, t), -lb);
      auto hi = make_row("eq7", "export_pipe_max(" + who, Sense::le, 0.0);
      hi.linear.add(vars.export_flow(k, t), 1.0);
      hi.linear.add(vars.export_pipe(k, t), -ub);
      rows.push_back(std::move(lo));
      rows.push_back(std::move(hi));
    }
  }
  return rows;
}

std::vector<Constraint> build_hub_quality(const NetworkInstance& in, const VariableMap& vars) {
  std::vector<Constraint> rows;
  const std::size_t C = in.contaminant_count();
  for (std::size_t t = 0; t < in.period_count(); ++t) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < in.plants.size(); ++k) {
        if (!in.plant_active(k, t)) continue;
        auto row = make_row("eq8", "export_quality(" + in.contaminants[c] + "," + in.plants[k] + at(t), Sense::eq, 0.0);
        for (std::size_t i : in.sources_of(k)) row.linear.add(vars.source_outlet(i, t), in.sources[i].conc[c][t]);
        row.bilinear.push_back({-1.0, vars.export_flow(k, t), vars.export_conc(c, k, t), -1});
        row.bilinear.push_back({-1.0, vars.discharge(k, t), vars.export_conc(c, k, t), -1});
        rows.push_back(std::move(row));
      }
    }
    auto flow = make_row("eq9", "hub_flow(t" + std::to_string(t + 1) + ")", Sense::eq, 0.0);
    for (std::size_t k = 0; k < in.plants.size(); ++k) {
      if (!in.plant_active(k, t)) continue;
      flow.linear.add(vars.export_flow(k, t), 1.0);
      flow.linear.add(vars.import_total(k, t), -1.0);
    }
    rows.push_back(std::move(flow));

    for (std::size_t c = 0; c < C; ++c) {
      auto mass = make_row("eq10", "hub_mass(" + in.contaminants[c] + at(t), Sense::eq, 0.0);
      for (std::size_t k = 0; k < in.plants.size(); ++k) {
        if (!in.plant_active(k, t)) continue;
        mass.bilinear.push_back({1.0, vars.export_flow(k, t), vars.export_conc(c, k, t), -1});
        mass.bilinear.push_back({-1.0, vars.import_total(k, t), vars.hub_conc(c, t), -1});
      }
      mass.linear.add(vars.mass_removed(c, t), -1.0);
      rows.push_back(std::move(mass));
    }
    // Removal with RR_t = sum_s m(s,t) RR(c,s) substituted in.
    for (std::size_t c = 0; c < C; ++c) {
      auto removed = make_row("eq11", "hub_removal(" + in.contaminants[c] + at(t), Sense::eq, 0.0);
      removed.linear.add(vars.mass_removed(c, t), 1.0);
      for (std::size_t s = 0; s < in.regenerators.size(); ++s) {
        const double rr = in.regenerators[s].removal_ratio[c];
        if (rr == 0.0) continue;
        for (std::size_t k = 0; k < in.plants.size(); ++k) {
          if (!in.plant_active(k, t)) continue;
          removed.bilinear.push_back({-rr, vars.export_flow(k, t), vars.export_conc(c, k, t), vars.regen_choice(s, t)});
        }
      }
      rows.push_back(std::move(removed));
    }
  }
  return rows;
}

std::vector<Constraint> build_logic_constraints(const NetworkInstance& in, const VariableMap& vars) {
  std::vector<Constraint> rows;
  const std::size_t r = in.period_count();
  for (std::size_t t = 0; t < r; ++t) {
    auto one = make_row("eq13", "one_regenerator(t" + std::to_string(t + 1) + ")", Sense::eq, 1.0);
    for (std::size_t s = 0; s < in.regenerators.size(); ++s) one.linear.add(vars.regen_choice(s, t), 1.0);
    rows.push_back(std::move(one));
  }
  // x(t+1) - x(t) >= x(t) - 1, i.e. x(t+1) - 2 x(t) >= -1.
  auto keep = [&rows](const char* tag, const std::string& name, int next, int now) {
    auto row = make_row(tag, name, Sense::ge, -1.0);
    row.linear.add(next, 1.0);
    row.linear.add(now, -2.0);
    rows.push_back(std::move(row));
  };
  for (std::size_t t = 0; t + 1 < r; ++t) {
    for (std::size_t s = 0; s < in.regenerators.size(); ++s)
      keep("eq14", "keep_regenerator(" + std::to_string(in.regenerators[s].index) + at(t),
           vars.regen_choice(s, t + 1), vars.regen_choice(s, t));
    for (std::size_t k = 0; k < in.plants.size(); ++k)
      if (in.plant_active(k, t))
        keep("eq15", "keep_export_pipe(" + in.plants[k] + at(t), vars.export_pipe(k, t + 1), vars.export_pipe(k, t));
    for (std::size_t k = 0; k < in.plants.size(); ++k)
      if (in.plant_active(k, t))
        keep("eq16", "keep_import_pipe(" + in.plants[k] + at(t), vars.import_pipe(k, t + 1), vars.import_pipe(k, t));
  }
  return rows;
}

Objective build_objective_cost(const NetworkInstance& in, const VariableMap& vars) {
  const auto& e = in.economics;
  const double af = annualization_factor(e.interest, e.economic_life);
  const double area_per_flow = 1000.0 / (3600.0 * e.water_density * e.velocity);
  const double to_million = 1e-6;

  Objective obj;
  for (std::size_t t = 0; t < in.period_count(); ++t) {
    const double w = in.scenario.period_weights[t];
    if (w == 0.0) continue;
    for (std::size_t k = 0; k < in.plants.size(); ++k) {
      if (!in.plant_active(k, t)) continue;
      const double per_flow = w * e.distance * af * e.pipe_cost_p * area_per_flow * to_million;
      const double per_pipe = w * e.distance * af * e.pipe_cost_q * to_million;
      obj.linear.add(vars.export_flow(k, t), per_flow);
      obj.linear.add(vars.import_total(k, t), per_flow);
      obj.linear.add(vars.export_pipe(k, t), per_pipe);
      obj.linear.add(vars.import_pipe(k, t), per_pipe);
    }
    for (std::size_t j = 0; j < in.sinks.size(); ++j)
      if (in.sink_active(j, t)) obj.linear.add(vars.fresh(j, t), w * e.annual_hours * e.freshwater_price * to_million);
    for (std::size_t k = 0; k < in.plants.size(); ++k)
      if (in.plant_active(k, t))
        obj.linear.add(vars.discharge(k, t), w * e.annual_hours * e.discharge_price * to_million);
    for (std::size_t s = 0; s < in.regenerators.size(); ++s) {
      const double per_gram = w * e.annual_hours * in.regenerators[s].unit_cost * 1e-3 * to_million;
      if (per_gram == 0.0) continue;
      for (std::size_t c = 0; c < in.contaminant_count(); ++c)
        obj.gated.push_back({per_gram, vars.mass_removed(c, t), vars.regen_choice(s, t)});
    }
  }
  return obj;
}

Objective build_objective_freshwater(const NetworkInstance& in, const VariableMap& vars) {
  Objective obj;
  for (std::size_t t = 0; t < in.period_count(); ++t) {
    const double w = in.scenario.period_weights[t];
    for (std::size_t j = 0; j < in.sinks.size(); ++j)
      if (in.sink_active(j, t)) obj.linear.add(vars.fresh(j, t), w);
  }
  return obj;
}

Program assemble_program(const NetworkInstance& in, ObjectiveKind kind) {
  Program program;
  program.objective_kind = kind;
  program.variables = index_variables(in);
  const VariableMap vars(in, program.variables);
  auto append = [&program](std::vector<Constraint> rows) {
    for (auto& row : rows) program.constraints.push_back(std::move(row));
  };
  append(build_source_balances(in, vars));
  append(build_sink_balances_and_quality(in, vars));
  append(build_hub_import_export(in, vars));
  append(build_pipeline_bounds(in, vars));
  append(build_hub_quality(in, vars));
  append(build_logic_constraints(in, vars));
  program.objective = kind == ObjectiveKind::cost ? build_objective_cost(in, vars) : build_objective_freshwater(in, vars);

  const int count = static_cast<int>(program.variables.size());
  auto check = [count](int id) {
    if (id < 0 || id >= count) throw std::logic_error("constraint references a missing variable");
  };
  for (const auto& row : program.constraints) {
    for (const auto& [id, coef] : row.linear.terms()) check(id);
    for (const auto& b : row.bilinear) {
      check(b.flow);
      check(b.conc);
      if (b.gate >= 0) check(b.gate);
    }
  }
  return program;
}

ModelSize model_size(const Program& program) {
  ModelSize size;
  for (const auto& v : program.variables) {
    if (v.inactive) continue;
    (v.integral ? size.binary : size.continuous) += 1;
  }
  size.constraints = program.constraints.size();
  return size;
}

std::vector<double> to_vector(const Program& program, const Solution& s) {
  std::vector<double> x(program.variables.size(), 0.0);
  for (const auto& v : program.variables) {
    const auto t = static_cast<std::size_t>(v.period);
    const auto a = static_cast<std::size_t>(v.first);
    const auto c = static_cast<std::size_t>(v.contaminant);
    double& out = x[static_cast<std::size_t>(v.id)];
    switch (v.role) {
      case Role::reuse: out = s.reuse[t][a][static_cast<std::size_t>(v.second)]; break;
      case Role::fresh: out = s.fresh[t][a]; break;
      case Role::source_outlet: out = s.source_outlet[t][a]; break;
      case Role::export_flow: out = s.export_flow[t][a]; break;
      case Role::discharge: out = s.discharge[t][a]; break;
      case Role::import_total: out = s.import_total[t][a]; break;
      case Role::sink_import: out = s.sink_import[t][a]; break;
      case Role::export_conc: out = s.export_conc[t][c][a]; break;
      case Role::hub_conc: out = s.hub_conc[t][c]; break;
      case Role::mass_removed: out = s.mass_removed[t][c]; break;
      case Role::export_pipe: out = s.export_pipe[t][a]; break;
      case Role::import_pipe: out = s.import_pipe[t][a]; break;
      case Role::regen_choice: out = s.regen_choice[t][a]; break;
    }
  }
  return x;
}

Solution from_vector(const NetworkInstance& in, const Program& program, const std::vector<double>& x) {
  Solution s = Solution::zeros(in);
  for (const auto& v : program.variables) {
    const auto t = static_cast<std::size_t>(v.period);
    const auto a = static_cast<std::size_t>(v.first);
    const auto c = static_cast<std::size_t>(v.contaminant);
    const double value = x.at(static_cast<std::size_t>(v.id));
    const int bit = value > 0.5 ? 1 : 0;
    switch (v.role) {
      case Role::reuse: s.reuse[t][a][static_cast<std::size_t>(v.second)] = value; break;
      case Role::fresh: s.fresh[t][a] = value; break;
      case Role::source_outlet: s.source_outlet[t][a] = value; break;
      case Role::export_flow: s.export_flow[t][a] = value; break;
      case Role::discharge: s.discharge[t][a] = value; break;
      case Role::import_total: s.import_total[t][a] = value; break;
      case Role::sink_import: s.sink_import[t][a] = value; break;
      case Role::export_conc: s.export_conc[t][c][a] = value; break;
      case Role::hub_conc: s.hub_conc[t][c] = value; break;
      case Role::mass_removed: s.mass_removed[t][c] = value; break;
      case Role::export_pipe: s.export_pipe[t][a] = bit; break;
      case Role::import_pipe: s.import_pipe[t][a] = bit; break;
      case Role::regen_choice: s.regen_choice[t][a] = bit; break;
    }
  }
  s.objective_kind = program.objective_kind;
  s.costs = compute_costs(in, s);
  s.objective_value = weighted_objective(in, s, program.objective_kind);
  return s;
}

double evaluate_lhs(const Constraint& row, const std::vector<double>& x) {
  double total = row.linear.constant();
  for (const auto& [id, coef] : row.linear.terms()) total += coef * x[static_cast<std::size_t>(id)];
  for (const auto& b : row.bilinear) {
    double term = b.coef * x[static_cast<std::size_t>(b.flow)] * x[static_cast<std::size_t>(b.conc)];
    if (b.gate >= 0) term *= x[static_cast<std::size_t>(b.gate)];
    total += term;
  }
  return total;
}

double evaluate_objective(const Objective& objective, const std::vector<double>& x) {
  double total = objective.linear.constant();
  for (const auto& [id, coef] : objective.linear.terms()) total += coef * x[static_cast<std::size_t>(id)];
  for (const auto& b : objective.bilinear) {
    double term = b.coef * x[static_cast<std::size_t>(b.flow)] * x[static_cast<std::size_t>(b.conc)];
    if (b.gate >= 0) term *= x[static_cast<std::size_t>(b.gate)];
    total += term;
  }
  for (const auto& g : objective.gated)
    total += g.coef * x[static_cast<std::size_t>(g.var)] * x[static_cast<std::size_t>(g.gate)];
  return total;
}

}  // namespace eipw
