#include "eipw/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace eipw {

namespace {

// Accumulates one row: lhs compared against rhs, scale from the largest term.
class Row {
 public:
  Row& add(double term) {
    lhs_ += term;
    biggest_ = std::max(biggest_, std::abs(term));
    return *this;
  }
  double lhs() const { return lhs_; }
  double scale(double rhs) const { return std::max({1.0, std::abs(rhs), biggest_}); }

 private:
  double lhs_ = 0.0;
  double biggest_ = 0.0;
};

class Collector {
 public:
  explicit Collector(ResidualReport& report) : report_(report) {}

  void equal(const std::string& tag, const std::string& entity, const Row& row, double rhs) {
    push(tag, entity, std::abs(row.lhs() - rhs), row.scale(rhs));
  }
  void at_most(const std::string& tag, const std::string& entity, const Row& row, double rhs) {
    push(tag, entity, std::max(0.0, row.lhs() - rhs), row.scale(rhs));
  }
  void at_least(const std::string& tag, const std::string& entity, const Row& row, double rhs) {
    push(tag, entity, std::max(0.0, rhs - row.lhs()), row.scale(rhs));
  }
  void raw(const std::string& tag, const std::string& entity, double residual) { push(tag, entity, residual, 1.0); }

 private:
  void push(const std::string& tag, const std::string& entity, double residual, double scale) {
    if (!std::isfinite(residual)) residual = std::numeric_limits<double>::infinity();
    report_.entries.push_back({tag, entity, residual, scale});
    double& worst = report_.max_by_tag[tag];
    worst = std::max(worst, residual);
    const double scaled = residual / scale;
    if (scaled > report_.worst_scaled) {
      report_.worst_scaled = scaled;
      report_.worst_tag = tag;
      report_.worst_entity = entity;
    }
  }

  ResidualReport& report_;
};

template <class T>
void require_size(const std::vector<T>& v, std::size_t n, const char* what) {
  if (v.size() != n) throw std::invalid_argument(std::string("solution field '") + what + "' has the wrong size");
}

void check_shape(const NetworkInstance& in, const Solution& s) {
  const std::size_t r = in.period_count();
  const std::size_t n = in.sources.size(), m = in.sinks.size(), K = in.plants.size();
  const std::size_t C = in.contaminant_count(), S = in.regenerators.size();
  require_size(s.reuse, r, "reuse");
  require_size(s.fresh, r, "fresh");
  require_size(s.source_outlet, r, "source_outlet");
  require_size(s.export_flow, r, "export_flow");
  require_size(s.discharge, r, "discharge");
  require_size(s.import_total, r, "import_total");
  require_size(s.sink_import, r, "sink_import");
  require_size(s.export_conc, r, "export_conc");
  require_size(s.hub_conc, r, "hub_conc");
  require_size(s.mass_removed, r, "mass_removed");
  require_size(s.import_pipe, r, "import_pipe");
  require_size(s.export_pipe, r, "export_pipe");
  require_size(s.regen_choice, r, "regen_choice");
  for (std::size_t t = 0; t < r; ++t) {
    require_size(s.reuse[t], n, "reuse");
    for (const auto& row : s.reuse[t]) require_size(row, m, "reuse");
    require_size(s.fresh[t], m, "fresh");
    require_size(s.source_outlet[t], n, "source_outlet");
    require_size(s.export_flow[t], K, "export_flow");
    require_size(s.discharge[t], K, "discharge");
    require_size(s.import_total[t], K, "import_total");
    require_size(s.sink_import[t], m, "sink_import");
    require_size(s.export_conc[t], C, "export_conc");
    for (const auto& row : s.export_conc[t]) require_size(row, K, "export_conc");
    require_size(s.hub_conc[t], C, "hub_conc");
    require_size(s.mass_removed[t], C, "mass_removed");
    require_size(s.import_pipe[t], K, "import_pipe");
    require_size(s.export_pipe[t], K, "export_pipe");
    require_size(s.regen_choice[t], S, "regen_choice");
  }
}

std::string label(const std::string& who, std::size_t t) { return who + " t" + std::to_string(t + 1); }

}  // namespace

ResidualReport residuals(const NetworkInstance& in, const Solution& s, double tolerance) {
  check_shape(in, s);
  ResidualReport report;
  report.tolerance = tolerance;
  Collector out(report);

  const std::size_t r = in.period_count();
  const std::size_t C = in.contaminant_count();
  const double lb = in.economics.hub_flow_lb;
  const double ub = in.hub_flow_upper();

  for (std::size_t t = 0; t < r; ++t) {
    // Sign, arc existence and inactive-plant rules.
    for (std::size_t i = 0; i < in.sources.size(); ++i) {
      const bool on = in.source_active(i, t);
      for (std::size_t j = 0; j < in.sinks.size(); ++j) {
        const double f = s.reuse[t][i][j];
        const std::string who = label("reuse " + in.sources[i].id + "->" + in.sinks[j].id, t);
        out.raw("bound", who, std::max(0.0, -f));
        if (in.sources[i].plant != in.sinks[j].plant || !on || !in.sink_active(j, t))
          out.raw(in.sources[i].plant != in.sinks[j].plant ? "bound" : "inactive", who, std::abs(f));
      }
      out.raw("bound", label("outlet " + in.sources[i].id, t), std::max(0.0, -s.source_outlet[t][i]));
      if (!on) out.raw("inactive", label("outlet " + in.sources[i].id, t), std::abs(s.source_outlet[t][i]));
    }
    for (std::size_t j = 0; j < in.sinks.size(); ++j) {
      const std::string who = label("sink " + in.sinks[j].id, t);
      out.raw("bound", who, std::max({0.0, -s.fresh[t][j], -s.sink_import[t][j]}));
      if (!in.sink_active(j, t)) out.raw("inactive", who, std::abs(s.fresh[t][j]) + std::abs(s.sink_import[t][j]));
    }
    for (std::size_t k = 0; k < in.plants.size(); ++k) {
      const std::string who = label("plant " + in.plants[k], t);
      out.raw("bound", who,
              std::max({0.0, -s.export_flow[t][k], -s.discharge[t][k], -s.import_total[t][k]}));
      for (int bit : {s.export_pipe[t][k], s.import_pipe[t][k]})
        out.raw("integrality", who, bit == 0 || bit == 1 ? 0.0 : 1.0);
      if (!in.plant_active(k, t))
        out.raw("inactive", who,
                std::abs(s.export_flow[t][k]) + std::abs(s.discharge[t][k]) + std::abs(s.import_total[t][k]) +
                    s.export_pipe[t][k] + s.import_pipe[t][k]);
    }
    for (std::size_t c = 0; c < C; ++c) out.raw("bound", label("mass removed " + in.contaminants[c], t), std::max(0.0, -s.mass_removed[t][c]));
    for (std::size_t q = 0; q < in.regenerators.size(); ++q) {
      const int bit = s.regen_choice[t][q];
      out.raw("integrality", label("regenerator " + std::to_string(in.regenerators[q].index), t),
              bit == 0 || bit == 1 ? 0.0 : 1.0);
    }

    // Source and sink balances, sink quality.
    for (std::size_t i = 0; i < in.sources.size(); ++i) {
      if (!in.source_active(i, t)) continue;
      Row row;
      for (std::size_t j = 0; j < in.sinks.size(); ++j) row.add(s.reuse[t][i][j]);
      row.add(s.source_outlet[t][i]);
      out.equal("eq1", label("source " + in.sources[i].id, t), row, in.sources[i].flow[t]);
    }
    for (std::size_t j = 0; j < in.sinks.size(); ++j) {
      if (!in.sink_active(j, t)) continue;
      Row row;
      for (std::size_t i = 0; i < in.sources.size(); ++i) row.add(s.reuse[t][i][j]);
      row.add(s.fresh[t][j]).add(s.sink_import[t][j]);
      out.equal("eq2", label("sink " + in.sinks[j].id, t), row, in.sinks[j].flow[t]);
      for (std::size_t c = 0; c < C; ++c) {
        Row q;
        for (std::size_t i = 0; i < in.sources.size(); ++i) q.add(s.reuse[t][i][j] * in.sources[i].conc[c][t]);
        q.add(s.fresh[t][j] * in.economics.freshwater_conc[c]);
        q.add(s.sink_import[t][j] * s.hub_conc[t][c]);
        out.at_most("eq3", label("sink " + in.sinks[j].id + " " + in.contaminants[c], t), q,
                    in.sinks[j].flow[t] * in.sinks[j].max_conc[c][t]);
      }
    }

    // Plant exchange with the hub.
    double hub_in = 0.0, hub_out = 0.0;
    for (std::size_t k = 0; k < in.plants.size(); ++k) {
      if (!in.plant_active(k, t)) continue;
      const std::string who = label("plant " + in.plants[k], t);
      Row imports;
      imports.add(s.import_total[t][k]);
      for (std::size_t j = 0; j < in.sinks.size(); ++j)
        if (in.sinks[j].plant == in.plants[k]) imports.add(-s.sink_import[t][j]);
      out.equal("eq4", who, imports, 0.0);

      Row exports;
      for (std::size_t i = 0; i < in.sources.size(); ++i)
        if (in.sources[i].plant == in.plants[k]) exports.add(s.source_outlet[t][i]);
      exports.add(-s.export_flow[t][k]).add(-s.discharge[t][k]);
      out.equal("eq5", who, exports, 0.0);

      Row g;
      g.add(s.import_total[t][k]);
      out.at_least("eq6", who + " import min", g, lb * s.import_pipe[t][k]);
      out.at_most("eq6", who + " import max", g, ub * s.import_pipe[t][k]);
      Row f;
      f.add(s.export_flow[t][k]);
      out.at_least("eq7", who + " export min", f, lb * s.export_pipe[t][k]);
      out.at_most("eq7", who + " export max", f, ub * s.export_pipe[t][k]);

      for (std::size_t c = 0; c < C; ++c) {
        Row mix;
        for (std::size_t i = 0; i < in.sources.size(); ++i)
          if (in.sources[i].plant == in.plants[k]) mix.add(s.source_outlet[t][i] * in.sources[i].conc[c][t]);
        mix.add(-s.export_flow[t][k] * s.export_conc[t][c][k]);
        mix.add(-s.discharge[t][k] * s.export_conc[t][c][k]);
        out.equal("eq8", who + " " + in.contaminants[c], mix, 0.0);
      }
      hub_in += s.export_flow[t][k];
      hub_out += s.import_total[t][k];
    }
    {
      Row flow;
      flow.add(hub_in).add(-hub_out);
      out.equal("eq9", label("hub", t), flow, 0.0);
    }

    for (std::size_t c = 0; c < C; ++c) {
      double sent = 0.0;
      Row mass;
      for (std::size_t k = 0; k < in.plants.size(); ++k) {
        if (!in.plant_active(k, t)) continue;
        const double term = s.export_flow[t][k] * s.export_conc[t][c][k];
        sent += term;
        mass.add(term).add(-s.import_total[t][k] * s.hub_conc[t][c]);
      }
      mass.add(-s.mass_removed[t][c]);
      const std::string who = label("hub " + in.contaminants[c], t);
      out.equal("eq10", who, mass, 0.0);

      double rr = 0.0;
      for (std::size_t q = 0; q < in.regenerators.size(); ++q) rr += s.regen_choice[t][q] * in.regenerators[q].removal_ratio[c];
      Row removed;
      removed.add(s.mass_removed[t][c]).add(-sent * rr);
      out.equal("eq11", who, removed, 0.0);
    }

    Row one;
    for (int bit : s.regen_choice[t]) one.add(bit);
    out.equal("eq13", label("regenerator choice", t), one, 1.0);

    if (t + 1 < r) {
      for (std::size_t q = 0; q < in.regenerators.size(); ++q) {
        Row keep;
        keep.add(s.regen_choice[t + 1][q]).add(-2.0 * s.regen_choice[t][q]);
        out.at_least("eq14", label("regenerator " + std::to_string(in.regenerators[q].index), t), keep, -1.0);
      }
      for (std::size_t k = 0; k < in.plants.size(); ++k) {
        Row y, l;
        y.add(s.export_pipe[t + 1][k]).add(-2.0 * s.export_pipe[t][k]);
        l.add(s.import_pipe[t + 1][k]).add(-2.0 * s.import_pipe[t][k]);
        out.at_least("eq15", label("export pipe " + in.plants[k], t), y, -1.0);
        out.at_least("eq16", label("import pipe " + in.plants[k], t), l, -1.0);
      }
    }
  }

  report.pass = report.worst_scaled <= tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

namespace {

struct PeriodDesign {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> reuse;  // [i][j]
  std::vector<double> export_flow;         // [k]
  std::vector<double> sink_import;         // [j]
};

// Grid values in [lo, hi]: lo, lo + step, ... and hi itself.
std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  if (hi < lo - 1e-12) return out;
  if (hi < lo) hi = lo;
  for (long n = 0;; ++n) {
    const double v = lo + static_cast<double>(n) * step;
    if (v > hi - 1e-12) break;
    out.push_back(v);
  }
  out.push_back(hi);
  return out;
}

class Oracle {
 public:
  Oracle(const NetworkInstance& in, ObjectiveKind kind, double step) : in_(in), kind_(kind), step_(step) {}

  OracleResult run() {
    const std::size_t r = in_.period_count();
    const std::size_t K = in_.plants.size();
    const std::size_t bits = 2 * K * r;
    OracleResult result;
    result.objective = std::numeric_limits<double>::infinity();

    for (std::size_t s = 0; s < in_.regenerators.size(); ++s) {
      for (std::size_t pattern = 0; pattern < (std::size_t{1} << bits); ++pattern) {
        Table<int> y(r, std::vector<int>(K)), l(r, std::vector<int>(K));
        bool ok = true;
        for (std::size_t t = 0; t < r; ++t)
          for (std::size_t k = 0; k < K; ++k) {
            y[t][k] = static_cast<int>((pattern >> (2 * (t * K + k))) & 1u);
            l[t][k] = static_cast<int>((pattern >> (2 * (t * K + k) + 1)) & 1u);
            if (!in_.plant_active(k, t) && (y[t][k] || l[t][k])) ok = false;
          }
        for (std::size_t t = 0; ok && t + 1 < r; ++t)
          for (std::size_t k = 0; k < K; ++k)
            if ((y[t][k] && !y[t + 1][k]) || (l[t][k] && !l[t + 1][k])) ok = false;
        if (!ok) continue;

        double total = 0.0;
        std::vector<PeriodDesign> designs;
        for (std::size_t t = 0; t < r && ok; ++t) {
          designs.push_back(best_period(t, s, y[t], l[t], result.evaluated));
          ok = std::isfinite(designs.back().objective);
          total += designs.back().objective;
        }
        if (!ok || !(total < result.objective - 1e-12)) continue;
        result.feasible = true;
        result.objective = total;
        result.solution = assemble(designs, s, y, l);
      }
    }
    if (result.feasible) result.objective = weighted_objective(in_, result.solution, kind_);
    return result;
  }

 private:
  PeriodDesign best_period(std::size_t t, std::size_t s, const std::vector<int>& y, const std::vector<int>& l,
                           std::size_t& evaluated) {
    const std::size_t n = in_.sources.size(), m = in_.sinks.size(), K = in_.plants.size();
    PeriodDesign best;
    PeriodDesign cur;
    cur.reuse.assign(n, std::vector<double>(m, 0.0));
    cur.export_flow.assign(K, 0.0);
    cur.sink_import.assign(m, 0.0);

    std::vector<std::pair<std::size_t, std::size_t>> arcs;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (in_.reuse_allowed(i, j) && in_.source_active(i, t) && in_.sink_active(j, t)) arcs.emplace_back(i, j);
    const double lb = in_.economics.hub_flow_lb, ub = in_.hub_flow_upper();

    std::function<void(std::size_t)> imports;
    std::function<void(std::size_t)> exports;
    std::function<void(std::size_t)> reuse;

    std::vector<std::size_t> sinks;
    for (std::size_t j = 0; j < m; ++j)
      if (in_.sink_active(j, t)) sinks.push_back(j);

    auto sink_room = [&](std::size_t j) {
      double room = in_.sinks[j].flow[t];
      for (std::size_t i = 0; i < n; ++i) room -= cur.reuse[i][j];
      return room;
    };
    auto outlet = [&](std::size_t i) {
      double w = in_.sources[i].flow[t];
      for (std::size_t j = 0; j < m; ++j) w -= cur.reuse[i][j];
      return std::max(0.0, w);
    };

    imports = [&](std::size_t idx) {
      double hub = 0.0, placed = 0.0;
      for (double f : cur.export_flow) hub += f;
      for (std::size_t q = 0; q < idx; ++q) placed += cur.sink_import[sinks[q]];
      if (idx + 1 >= sinks.size()) {
        if (!sinks.empty()) {
          const std::size_t j = sinks[idx];
          const double rest = hub - placed;
          if (rest < -1e-12 || rest > sink_room(j) + 1e-12) return;
          cur.sink_import[j] = std::max(0.0, rest);
        } else if (hub > 1e-12) {
          return;
        }
        ++evaluated;
        const double v = evaluate(t, s, y, l);
        if (v < best.objective - 1e-12) {
          best.objective = v;
          best.reuse = cur.reuse;
          best.export_flow = cur.export_flow;
          best.sink_import = cur.sink_import;
        }
        return;
      }
      const std::size_t j = sinks[idx];
      for (double v : grid(0.0, std::min(sink_room(j), hub - placed), step_)) {
        cur.sink_import[j] = v;
        imports(idx + 1);
      }
      cur.sink_import[j] = 0.0;
    };

    exports = [&](std::size_t k) {
      if (k == K) {
        imports(0);
        return;
      }
      if (!in_.plant_active(k, t) || !y[k]) {
        cur.export_flow[k] = 0.0;
        exports(k + 1);
        return;
      }
      double waste = 0.0;
      for (std::size_t i : in_.sources_of(k)) waste += outlet(i);
      for (double v : grid(lb, std::min(ub, waste), step_)) {
        cur.export_flow[k] = v;
        exports(k + 1);
      }
      cur.export_flow[k] = 0.0;
    };

    reuse = [&](std::size_t a) {
      if (a == arcs.size()) {
        exports(0);
        return;
      }
      const auto [i, j] = arcs[a];
      const double cap = std::min(outlet(i), sink_room(j));
      for (double v : grid(0.0, cap, step_)) {
        cur.reuse[i][j] = v;
        reuse(a + 1);
      }
      cur.reuse[i][j] = 0.0;
    };

    current_ = &cur;
    reuse(0);
    return best;
  }

  // Period objective at the current grid point; +inf when infeasible.
  double evaluate(std::size_t t, std::size_t s, const std::vector<int>& y, const std::vector<int>& l) const {
    const PeriodDesign& d = *current_;
    const std::size_t n = in_.sources.size(), m = in_.sinks.size(), K = in_.plants.size();
    const double lb = in_.economics.hub_flow_lb, ub = in_.hub_flow_upper();
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_.source_active(i, t)) continue;
      w[i] = in_.sources[i].flow[t];
      for (std::size_t j = 0; j < m; ++j) w[i] -= d.reuse[i][j];
      w[i] = std::max(0.0, w[i]);
    }
    std::vector<double> g(K, 0.0);
    for (std::size_t j = 0; j < m; ++j)
      if (in_.sink_active(j, t)) g[in_.sink_plant(j)] += d.sink_import[j];
    for (std::size_t k = 0; k < K; ++k) {
      if (!in_.plant_active(k, t)) continue;
      if (l[k] ? (g[k] < lb - 1e-9 || g[k] > ub + 1e-9) : g[k] > 1e-12) return inf;
    }

    const double rr = in_.regenerators[s].removal_ratio[0];
    double hub = 0.0, mass = 0.0, discharge = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (!in_.plant_active(k, t)) continue;
      double waste = 0.0, load = 0.0;
      for (std::size_t i : in_.sources_of(k)) {
        waste += w[i];
        load += w[i] * in_.sources[i].conc[0][t];
      }
      const double cexp = waste > 0.0 ? load / waste : 0.0;
      hub += d.export_flow[k];
      mass += d.export_flow[k] * cexp;
      discharge += waste - d.export_flow[k];
    }
    const double removed = rr * mass;
    const double cmix = hub > 0.0 ? (mass - removed) / hub : 0.0;

    double fresh_total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!in_.sink_active(j, t)) continue;
      double fresh = in_.sinks[j].flow[t] - d.sink_import[j];
      double load = d.sink_import[j] * cmix;
      for (std::size_t i = 0; i < n; ++i) {
        fresh -= d.reuse[i][j];
        load += d.reuse[i][j] * in_.sources[i].conc[0][t];
      }
      if (fresh < -1e-9) return inf;
      fresh = std::max(0.0, fresh);
      load += fresh * in_.economics.freshwater_conc[0];
      const double limit = in_.sinks[j].flow[t] * in_.sinks[j].max_conc[0][t];
      if (load > limit + 1e-9 * std::max(1.0, limit)) return inf;
      fresh_total += fresh;
    }

    const double weight = in_.scenario.period_weights[t];
    if (kind_ == ObjectiveKind::freshwater) return weight * fresh_total;

    const auto& e = in_.economics;
    const double af = annualization_factor(e.interest, e.economic_life);
    double pipes = 0.0, pipe_flow = hub;
    for (std::size_t k = 0; k < K; ++k) {
      pipes += y[k] + l[k];
      pipe_flow += g[k];
    }
    const double invest = e.distance * af * (e.pipe_cost_p * pipe_flow * 1000.0 / (3600.0 * e.water_density * e.velocity) +
                                             e.pipe_cost_q * pipes) * 1e-6;
    const double operate = e.annual_hours * 1e-6 *
                           (fresh_total * e.freshwater_price + discharge * e.discharge_price +
                            in_.regenerators[s].unit_cost * removed * 1e-3);
    return weight * (invest + operate);
  }

  Solution assemble(const std::vector<PeriodDesign>& designs, std::size_t s, const Table<int>& y,
                    const Table<int>& l) const {
    Solution sol = Solution::zeros(in_);
    const std::size_t n = in_.sources.size(), m = in_.sinks.size(), K = in_.plants.size();
    for (std::size_t t = 0; t < designs.size(); ++t) {
      const auto& d = designs[t];
      sol.regen_choice[t][s] = 1;
      const double rr = in_.regenerators[s].removal_ratio[0];
      for (std::size_t i = 0; i < n; ++i) {
        if (!in_.source_active(i, t)) continue;
        double w = in_.sources[i].flow[t];
        for (std::size_t j = 0; j < m; ++j) {
          sol.reuse[t][i][j] = d.reuse[i][j];
          w -= d.reuse[i][j];
        }
        sol.source_outlet[t][i] = std::max(0.0, w);
      }
      double hub = 0.0, mass = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        sol.export_pipe[t][k] = y[t][k];
        sol.import_pipe[t][k] = l[t][k];
        if (!in_.plant_active(k, t)) continue;
        double waste = 0.0, load = 0.0;
        for (std::size_t i : in_.sources_of(k)) {
          waste += sol.source_outlet[t][i];
          load += sol.source_outlet[t][i] * in_.sources[i].conc[0][t];
        }
        sol.export_conc[t][0][k] = waste > 0.0 ? load / waste : 0.0;
        sol.export_flow[t][k] = d.export_flow[k];
        sol.discharge[t][k] = waste - d.export_flow[k];
        hub += d.export_flow[k];
        mass += d.export_flow[k] * sol.export_conc[t][0][k];
      }
      sol.mass_removed[t][0] = rr * mass;
      sol.hub_conc[t][0] = hub > 0.0 ? (mass - rr * mass) / hub : 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (!in_.sink_active(j, t)) continue;
        sol.sink_import[t][j] = d.sink_import[j];
        sol.import_total[t][in_.sink_plant(j)] += d.sink_import[j];
        double fresh = in_.sinks[j].flow[t] - d.sink_import[j];
        for (std::size_t i = 0; i < n; ++i) fresh -= d.reuse[i][j];
        sol.fresh[t][j] = std::max(0.0, fresh);
      }
    }
    sol.objective_kind = kind_;
    sol.costs = compute_costs(in_, sol);
    sol.objective_value = weighted_objective(in_, sol, kind_);
    return sol;
  }

  const NetworkInstance& in_;
  ObjectiveKind kind_;
  double step_;
  const PeriodDesign* current_ = nullptr;
};

}  // namespace

OracleResult brute_force_tiny(const NetworkInstance& instance, ObjectiveKind kind, double grid_step) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid step must be > 0");
  if (instance.plants.size() > 2 || instance.sources.size() > 2 || instance.sinks.size() > 2 ||
      instance.period_count() > 2 || instance.contaminant_count() != 1)
    throw std::invalid_argument("instance exceeds the brute-force guard (2 plants, 2 sources, 2 sinks, 2 periods, 1 contaminant)");
  Oracle oracle(instance, kind, grid_step);
  return oracle.run();
}

// ---------------------------------------------------------------------------
// Reference rows

std::vector<ReferenceRow> parse_reference_csv(const std::string& text) {
  std::vector<ReferenceRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 8) throw std::runtime_error("reference row " + std::to_string(number) + " has too few columns");
    ReferenceRow row;
    row.model = cells[0];
    try {
      row.freshwater = std::stod(cells[1]);
      row.wastewater = std::stod(cells[2]);
      row.removal_ratio = std::stod(cells[3]);
      row.weighted_cost = std::stod(cells[4]);
      row.fresh_cost = std::stod(cells[5]);
      row.waste_cost = std::stod(cells[6]);
      row.pipe_capital = std::stod(cells[7]);
    } catch (const std::exception&) {
      throw std::runtime_error("reference row " + std::to_string(number) + " has a malformed number");
    }
    rows.push_back(row);
  }
  return rows;
}

ReferenceComparison compare_to_reference(const ReferenceRow& run, const ReferenceRow& ref,
                                         const ReferenceSlack& slack) {
  auto rel = [](double a, double b) { return b != 0.0 ? (a - b) / std::abs(b) : (a == 0.0 ? 0.0 : 1.0); };
  ReferenceComparison out;
  out.cost_delta = rel(run.weighted_cost, ref.weighted_cost);
  out.freshwater_delta = rel(run.freshwater, ref.freshwater);
  out.wastewater_delta = rel(run.wastewater, ref.wastewater);
  out.removal_ratio_delta = run.removal_ratio - ref.removal_ratio;
  const bool cost_ok = run.weighted_cost <= ref.weighted_cost * (1.0 + slack.cost);
  const bool flow_ok = std::abs(out.freshwater_delta) <= slack.flow;
  out.pass = cost_ok && flow_ok;

  std::ostringstream text;
  text.setf(std::ios::fixed);
  text.precision(2);
  text << ref.model << ": cost " << run.weighted_cost << " vs " << ref.weighted_cost << " (" << std::showpos
       << 100.0 * out.cost_delta << "%)" << std::noshowpos << ", freshwater " << run.freshwater << " vs "
       << ref.freshwater << " (" << std::showpos << 100.0 * out.freshwater_delta << "%)" << std::noshowpos
       << ", wastewater " << run.wastewater << " vs " << ref.wastewater << " (" << std::showpos
       << 100.0 * out.wastewater_delta << "%)" << std::noshowpos << ", RR " << run.removal_ratio << " vs "
       << ref.removal_ratio << " -> " << (out.pass ? "pass" : "fail");
  out.text = text.str();
  return out;
}

ImpliedEconomics back_calculate(const ReferenceRow& row, const EconomicParams& e, int pipes) {
  if (!(row.freshwater > 0.0) || !(row.wastewater > 0.0) || pipes < 1 || !(e.annual_hours > 0.0))
    throw std::invalid_argument("back-calculation needs positive flows, hours and pipe count");
  ImpliedEconomics out;
  out.freshwater_price = row.fresh_cost * 1e6 / (row.freshwater * e.annual_hours);
  out.discharge_price = row.waste_cost * 1e6 / (row.wastewater * e.annual_hours);
  const double area_per_flow = 1000.0 / (3600.0 * e.water_density * e.velocity);
  // Every unit of hub throughput passes one export and one import pipe.
  const double per_af = e.distance * (e.pipe_cost_p * area_per_flow * 2.0 * row.wastewater + e.pipe_cost_q * pipes);
  out.annualization = row.pipe_capital * 1e6 / per_af;
  return out;
}

}  // namespace eipw
