#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eipw/solver.hpp"

namespace eipw {

namespace {

constexpr double kZeroFlow = 1e-9;

// Hub outlet quality is fixed, so every product with a hub concentration is
// linear. The export products are linearized one of three ways:
//   split:    each source divides freely between export and discharge (a
//             relaxation, used to pick export fractions);
//   fraction: plant k exports the fraction alpha(t,k) of its wastewater;
//   quality:  the plant's wastewater quality is fixed at C_exp.
// The last two are exact restrictions of the design problem.
enum class Linearize { split, fraction, quality };

class DesignLp {
 public:
  DesignLp(const NetworkInstance& in, const Program& program, const VariableMap& vars, int regen)
      : in_(in), program_(program), vars_(vars), regen_(regen) {}

  // `fixed` holds C_mix (and C_exp for the quality mode) in program-vector form.
  lp::LpProblem build(const Node& node, const std::vector<double>& fixed, Linearize mode, const Table<double>& alpha,
                      const std::vector<double>& lower, const std::vector<double>& upper) const {
    const auto& cmix = fixed;
    lp::LpProblem lp;
    const std::size_t n = program_.variables.size();
    for (std::size_t v = 0; v < n; ++v) {
      if (is_concentration(program_.variables[v].role))
        lp.add_column(0.0, cmix[v], cmix[v]);
      else
        lp.add_column(0.0, lower[v], upper[v]);
    }
    auto gate = [&node](int g) { return g < 0 ? 1.0 : node.lower[static_cast<std::size_t>(g)]; };
    for (const auto& [id, coef] : program_.objective.linear.terms()) lp.objective[static_cast<std::size_t>(id)] += coef;
    for (const auto& g : program_.objective.gated) lp.objective[static_cast<std::size_t>(g.var)] += g.coef * gate(g.gate);
    for (const auto& b : program_.objective.bilinear)
      lp.objective[static_cast<std::size_t>(b.flow)] += b.coef * gate(b.gate) * cmix[static_cast<std::size_t>(b.conc)];

    for (const auto& row : program_.constraints) {
      if (row.tag == "eq8" || row.tag == "eq10" || row.tag == "eq11") continue;
      lp::SparseRow sparse;
      for (const auto& [id, coef] : row.linear.terms()) sparse.add(id, coef);
      for (const auto& b : row.bilinear) {
        const double coef = b.coef * gate(b.gate) * cmix[static_cast<std::size_t>(b.conc)];
        if (coef != 0.0) sparse.add(b.flow, coef);
      }
      lp.add_row(std::move(sparse), row.sense, row.rhs - row.linear.constant());
    }

    const std::size_t C = in_.contaminant_count();
    for (std::size_t t = 0; t < in_.period_count(); ++t) {
      // mass[c] collects the exported contaminant load per column.
      std::vector<lp::SparseRow> mass(C);
      lp::SparseRow hub_in;
      for (std::size_t k = 0; k < in_.plants.size(); ++k) {
        if (!in_.plant_active(k, t)) continue;
        const int exp = vars_.export_flow(k, t);
        hub_in.add(vars_.import_total(k, t), 1.0);
        if (mode == Linearize::quality) {
          for (std::size_t c = 0; c < C; ++c) {
            const double ce = fixed[static_cast<std::size_t>(vars_.export_conc(c, k, t))];
            lp::SparseRow quality;
            for (std::size_t i : in_.sources_of(k))
              if (in_.source_active(i, t)) quality.add(vars_.source_outlet(i, t), in_.sources[i].conc[c][t]);
            quality.add(exp, -ce);
            quality.add(vars_.discharge(k, t), -ce);
            lp.add_row(std::move(quality), Sense::eq, 0.0);
            mass[c].add(exp, ce);
          }
          continue;
        }
        lp::SparseRow exported;
        exported.add(exp, 1.0);
        for (std::size_t i : in_.sources_of(k)) {
          if (!in_.source_active(i, t)) continue;
          const int outlet = vars_.source_outlet(i, t);
          if (mode == Linearize::fraction) {
            const double a = alpha[t][k];
            exported.add(outlet, -a);
            for (std::size_t c = 0; c < C; ++c) mass[c].add(outlet, a * in_.sources[i].conc[c][t]);
          } else {
            const int e = lp.add_column(0.0, 0.0, upper[static_cast<std::size_t>(outlet)]);
            const int d = lp.add_column(0.0, 0.0, upper[static_cast<std::size_t>(outlet)]);
            lp::SparseRow split;
            split.add(outlet, 1.0);
            split.add(e, -1.0);
            split.add(d, -1.0);
            lp.add_row(std::move(split), Sense::eq, 0.0);
            exported.add(e, -1.0);
            for (std::size_t c = 0; c < C; ++c) mass[c].add(e, in_.sources[i].conc[c][t]);
          }
        }
        lp.add_row(std::move(exported), Sense::eq, 0.0);
      }
      for (std::size_t c = 0; c < C; ++c) {
        const double rr = regen_ >= 0 ? in_.regenerators[static_cast<std::size_t>(regen_)].removal_ratio[c] : 0.0;
        lp::SparseRow removed, outlet;
        removed.add(vars_.mass_removed(c, t), 1.0);
        for (std::size_t p = 0; p < mass[c].index.size(); ++p) {
          removed.add(mass[c].index[p], -rr * mass[c].value[p]);
          outlet.add(mass[c].index[p], (1.0 - rr) * mass[c].value[p]);
        }
        const double q = cmix[static_cast<std::size_t>(vars_.hub_conc(c, t))];
        for (std::size_t p = 0; p < hub_in.index.size(); ++p) outlet.add(hub_in.index[p], -q);
        lp.add_row(std::move(removed), Sense::eq, 0.0);
        lp.add_row(std::move(outlet), Sense::le, 0.0);
      }
    }
    return lp;
  }

 private:
  const NetworkInstance& in_;
  const Program& program_;
  const VariableMap& vars_;
  int regen_;
};

class Heuristic {
 public:
  Heuristic(const NetworkInstance& in, const Program& program, const Node& node, const SolverConfig& config)
      : in_(in), program_(program), node_(node), config_(config), vars_(in, program.variables) {
    const std::size_t S = in.regenerators.size();
    for (std::size_t s = 0; s < S; ++s) {
      bool all = true;
      for (std::size_t t = 0; t < in.period_count(); ++t) {
        const auto id = static_cast<std::size_t>(vars_.regen_choice(s, t));
        if (node.lower[id] != node.upper[id]) throw std::logic_error("heuristic needs the regenerator fixed");
        all = all && node.lower[id] == 1.0;
      }
      if (all) regen_ = static_cast<int>(s);
    }
  }

  // Seeds: the hub quality of `start`, and at a root node a sweep of the
  // hub-quality interval.
  std::optional<Solution> run(const std::vector<double>* start) {
    std::vector<std::vector<double>> seeds;
    if (start) seeds.push_back(hub_quality(*start, 1.0));
    if (node_.depth == 0)
      for (double share : {0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.65, 0.8, 1.0})
        seeds.push_back(hub_quality(node_.upper, share));
    if (seeds.empty()) seeds.push_back(hub_quality(node_.upper, 0.5));

    std::optional<Solution> best;
    for (const auto& cmix : seeds) {
      auto point = improve(cmix);
      if (!point) continue;
      Solution candidate = from_vector(in_, program_, *point);
      if (residuals(in_, candidate, config_.residual_tol).pass &&
          (!best || candidate.objective_value < best->objective_value))
        best = std::move(candidate);
    }
    return best;
  }

  int lp_solves() const { return lp_solves_; }

  std::optional<Solution> settle(std::vector<double> x) {
    polish(x);
    Solution candidate = from_vector(in_, program_, x);
    if (!residuals(in_, candidate, config_.residual_tol).pass) return std::nullopt;
    return candidate;
  }

 private:
  std::vector<double> hub_quality(const std::vector<double>& from, double share) const {
    std::vector<double> cmix(program_.variables.size(), 0.0);
    for (std::size_t t = 0; t < in_.period_count(); ++t)
      for (std::size_t c = 0; c < in_.contaminant_count(); ++c) {
        const auto id = static_cast<std::size_t>(vars_.hub_conc(c, t));
        cmix[id] = std::max(0.0, share * std::clamp(from[id], node_.lower[id], node_.upper[id]));
      }
    return cmix;
  }

  std::optional<lp::LpSolution> solve(const lp::LpProblem& lp) {
    ++lp_solves_;
    auto sol = lp::solve_lp(lp, config_.lp);
    if (sol.status != lp::LpStatus::optimal) return std::nullopt;
    return sol;
  }

  // Exact design LP for the given linearization: pipeline binaries relaxed,
  // rounded up, then fixed.
  std::optional<std::vector<double>> design(const std::vector<double>& fixed, Linearize mode,
                                            const Table<double>& alpha) {
    const DesignLp builder(in_, program_, vars_, regen_);
    std::vector<double> lower = node_.lower, upper = node_.upper;
    auto relaxed = solve(builder.build(node_, fixed, mode, alpha, lower, upper));
    if (!relaxed || !round_pipes(relaxed->x, lower, upper)) return std::nullopt;
    auto sol = solve(builder.build(node_, fixed, mode, alpha, lower, upper));
    if (!sol) return std::nullopt;
    std::vector<double> x(sol->x.begin(), sol->x.begin() + static_cast<long>(program_.variables.size()));
    for (std::size_t v = 0; v < x.size(); ++v) x[v] = std::clamp(x[v], lower[v], upper[v]);
    polish(x);
    return x;
  }

  Table<double> export_fractions(const std::vector<double>& x) const {
    const std::size_t r = in_.period_count();
    Table<double> alpha(r, std::vector<double>(in_.plants.size(), 0.0));
    for (std::size_t t = 0; t < r; ++t)
      for (std::size_t k = 0; k < in_.plants.size(); ++k) {
        if (!in_.plant_active(k, t)) continue;
        double waste = 0.0;
        for (std::size_t i : in_.sources_of(k)) waste += x[static_cast<std::size_t>(vars_.source_outlet(i, t))];
        const double exported = x[static_cast<std::size_t>(vars_.export_flow(k, t))];
        alpha[t][k] = waste > kZeroFlow ? std::clamp(exported / waste, 0.0, 1.0) : 0.0;
      }
    return alpha;
  }

  // Hub quality of `x` where the hub is in use, `guess` elsewhere.
  std::vector<double> qualities(const std::vector<double>& x, const std::vector<double>& guess) const {
    std::vector<double> fixed = x;
    for (std::size_t t = 0; t < in_.period_count(); ++t)
      for (std::size_t c = 0; c < in_.contaminant_count(); ++c) {
        const auto id = static_cast<std::size_t>(vars_.hub_conc(c, t));
        if (fixed[id] <= 0.0) fixed[id] = guess[id];
      }
    return fixed;
  }

  double objective(const std::vector<double>& x) const { return evaluate_objective(program_.objective, x); }

  // Export fractions from the split relaxation, then alternate between
  // fixed fractions and fixed wastewater qualities. Each step keeps the
  // previous design feasible, so the objective never rises.
  std::optional<std::vector<double>> improve(const std::vector<double>& cmix) {
    const DesignLp builder(in_, program_, vars_, regen_);
    const Table<double> none;
    auto split = solve(builder.build(node_, cmix, Linearize::split, none, node_.lower, node_.upper));
    if (!split) return std::nullopt;
    auto best = design(cmix, Linearize::fraction, export_fractions(split->x));
    if (!best) return std::nullopt;
    double value = objective(*best);
    const int rounds = node_.depth == 0 ? config_.heuristic_rounds : config_.node_heuristic_rounds;
    for (int round = 0; round < rounds; ++round) {
      auto by_quality = design(qualities(*best, cmix), Linearize::quality, none);
      if (!by_quality) break;
      auto by_fraction = design(qualities(*by_quality, cmix), Linearize::fraction, export_fractions(*by_quality));
      const std::vector<double>& next = by_fraction && objective(*by_fraction) <= objective(*by_quality)
                                            ? *by_fraction : *by_quality;
      const double next_value = objective(next);
      if (next_value >= value - 1e-9 * (1.0 + std::abs(value))) {
        if (next_value < value) best = next;
        break;
      }
      value = next_value;
      best = next;
    }
    return best;
  }

  // A pipe carrying flow is built; once built it stays in service.
  bool round_pipes(const std::vector<double>& x, std::vector<double>& lower, std::vector<double>& upper) const {
    const std::size_t r = in_.period_count();
    for (std::size_t k = 0; k < in_.plants.size(); ++k) {
      for (int which = 0; which < 2; ++which) {
        std::vector<double> bit(r, 0.0);
        std::vector<int> ids(r);
        for (std::size_t t = 0; t < r; ++t) {
          ids[t] = which == 0 ? vars_.export_pipe(k, t) : vars_.import_pipe(k, t);
          const auto id = static_cast<std::size_t>(ids[t]);
          const int flow = which == 0 ? vars_.export_flow(k, t) : vars_.import_total(k, t);
          bit[t] = x[id] > kZeroFlow || x[static_cast<std::size_t>(flow)] > kZeroFlow ? 1.0 : 0.0;
          bit[t] = std::clamp(bit[t], node_.lower[id], node_.upper[id]);
        }
        for (std::size_t t = 0; t + 1 < r; ++t)
          if (bit[t] == 1.0 && in_.plant_active(k, t)) bit[t + 1] = 1.0;
        for (std::size_t t = r; t-- > 1;) {
          const auto id = static_cast<std::size_t>(ids[t]);
          if (bit[t] > node_.upper[id]) {
            bit[t] = node_.upper[id];
            bit[t - 1] = std::min(bit[t - 1], bit[t]);
          }
        }
        for (std::size_t t = 0; t < r; ++t) {
          const auto id = static_cast<std::size_t>(ids[t]);
          if (bit[t] < node_.lower[id] || bit[t] > node_.upper[id]) return false;
          lower[id] = upper[id] = bit[t];
        }
      }
    }
    return true;
  }

  double& at(std::vector<double>& x, int id) { return x[static_cast<std::size_t>(id)]; }

  // Re-derive dependent flows from the balances and concentrations from
  // mixing so the design satisfies the equalities to round-off.
  void polish(std::vector<double>& x) {
    for (const auto& v : program_.variables)
      if (is_flow(v.role) && x[static_cast<std::size_t>(v.id)] < kZeroFlow) x[static_cast<std::size_t>(v.id)] = 0.0;
    for (const auto& v : program_.variables)
      if (v.integral) x[static_cast<std::size_t>(v.id)] = std::round(x[static_cast<std::size_t>(v.id)]);

    const std::size_t C = in_.contaminant_count();
    for (std::size_t t = 0; t < in_.period_count(); ++t) {
      for (std::size_t i = 0; i < in_.sources.size(); ++i) {
        if (!in_.source_active(i, t)) continue;
        double out = in_.sources[i].flow[t];
        for (std::size_t j = 0; j < in_.sinks.size(); ++j)
          if (in_.reuse_allowed(i, j)) out -= at(x, vars_.reuse(i, j, t));
        at(x, vars_.source_outlet(i, t)) = std::max(0.0, out);
      }
      for (std::size_t k = 0; k < in_.plants.size(); ++k) {
        if (!in_.plant_active(k, t)) continue;
        double waste = 0.0;
        for (std::size_t i : in_.sources_of(k)) waste += at(x, vars_.source_outlet(i, t));
        double& exp = at(x, vars_.export_flow(k, t));
        exp = std::min(exp, waste);
        at(x, vars_.discharge(k, t)) = waste - exp;
        double imp = 0.0;
        for (std::size_t j : in_.sinks_of(k)) imp += at(x, vars_.sink_import(j, t));
        at(x, vars_.import_total(k, t)) = imp;
      }
      for (std::size_t j = 0; j < in_.sinks.size(); ++j) {
        if (!in_.sink_active(j, t)) continue;
        double fresh = in_.sinks[j].flow[t] - at(x, vars_.sink_import(j, t));
        for (std::size_t i = 0; i < in_.sources.size(); ++i)
          if (in_.reuse_allowed(i, j)) fresh -= at(x, vars_.reuse(i, j, t));
        at(x, vars_.fresh(j, t)) = std::max(0.0, fresh);
      }
      for (std::size_t c = 0; c < C; ++c) {
        double exported_mass = 0.0, hub_in = 0.0;
        for (std::size_t k = 0; k < in_.plants.size(); ++k) {
          if (!in_.plant_active(k, t)) continue;
          double waste = 0.0, mass = 0.0;
          for (std::size_t i : in_.sources_of(k)) {
            waste += at(x, vars_.source_outlet(i, t));
            mass += at(x, vars_.source_outlet(i, t)) * in_.sources[i].conc[c][t];
          }
          double& ce = at(x, vars_.export_conc(c, k, t));
          ce = waste > 0.0 ? mass / waste : 0.0;
          exported_mass += at(x, vars_.export_flow(k, t)) * ce;
          hub_in += at(x, vars_.export_flow(k, t));
        }
        const double rr = regen_ >= 0 ? in_.regenerators[static_cast<std::size_t>(regen_)].removal_ratio[c] : 0.0;
        const double removed = rr * exported_mass;
        at(x, vars_.mass_removed(c, t)) = removed;
        at(x, vars_.hub_conc(c, t)) = hub_in > 0.0 ? (exported_mass - removed) / hub_in : 0.0;
      }
    }
  }

  const NetworkInstance& in_;
  const Program& program_;
  const Node& node_;
  const SolverConfig& config_;
  VariableMap vars_;
  int regen_ = -1;
  int lp_solves_ = 0;
};

}  // namespace

std::optional<Solution> incumbent_heuristic(const NetworkInstance& instance, const Program& program,
                                            const Node& node, const std::vector<double>* start,
                                            const SolverConfig& config, std::size_t* lp_solves) {
  Heuristic h(instance, program, node, config);
  auto result = h.run(start);
  if (lp_solves) *lp_solves += static_cast<std::size_t>(h.lp_solves());
  return result;
}

std::optional<Solution> settle_point(const NetworkInstance& instance, const Program& program, const Node& node,
                                     const std::vector<double>& point, const SolverConfig& config) {
  Heuristic h(instance, program, node, config);
  return h.settle(point);
}

}  // namespace eipw
