#include "eipw/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace eipw {

std::size_t NetworkInstance::plant_index(const std::string& plant) const {
  auto it = std::find(plants.begin(), plants.end(), plant);
  if (it == plants.end()) throw std::out_of_range("unknown plant '" + plant + "'");
  return static_cast<std::size_t>(it - plants.begin());
}

std::vector<std::size_t> NetworkInstance::sources_of(std::size_t plant) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < sources.size(); ++i)
    if (sources[i].plant == plants[plant]) out.push_back(i);
  return out;
}

std::vector<std::size_t> NetworkInstance::sinks_of(std::size_t plant) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < sinks.size(); ++j)
    if (sinks[j].plant == plants[plant]) out.push_back(j);
  return out;
}

bool NetworkInstance::plant_active(std::size_t plant, std::size_t t) const {
  return static_cast<int>(t) + 1 >= scenario.plant_entry_period.at(plant);
}

double NetworkInstance::hub_flow_upper() const {
  if (economics.hub_flow_ub) return *economics.hub_flow_ub;
  double total = 0.0;
  for (const auto& src : sources) {
    double peak = 0.0;
    for (double f : src.flow) peak = std::max(peak, f);
    total += peak;
  }
  return total;
}

const char* to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::cost ? "cost" : "freshwater";
}

std::optional<ObjectiveKind> parse_objective_kind(const std::string& text) {
  if (text == "cost") return ObjectiveKind::cost;
  if (text == "freshwater") return ObjectiveKind::freshwater;
  return std::nullopt;
}

Solution Solution::zeros(const NetworkInstance& instance) {
  const std::size_t r = instance.period_count();
  const std::size_t n = instance.sources.size();
  const std::size_t m = instance.sinks.size();
  const std::size_t K = instance.plants.size();
  const std::size_t C = instance.contaminant_count();
  const std::size_t S = instance.regenerators.size();

  Solution s;
  s.reuse.assign(r, Table<double>(n, std::vector<double>(m, 0.0)));
  s.fresh.assign(r, std::vector<double>(m, 0.0));
  s.source_outlet.assign(r, std::vector<double>(n, 0.0));
  s.export_flow.assign(r, std::vector<double>(K, 0.0));
  s.discharge.assign(r, std::vector<double>(K, 0.0));
  s.import_total.assign(r, std::vector<double>(K, 0.0));
  s.sink_import.assign(r, std::vector<double>(m, 0.0));
  s.export_conc.assign(r, Table<double>(C, std::vector<double>(K, 0.0)));
  s.hub_conc.assign(r, std::vector<double>(C, 0.0));
  s.mass_removed.assign(r, std::vector<double>(C, 0.0));
  s.import_pipe.assign(r, std::vector<int>(K, 0));
  s.export_pipe.assign(r, std::vector<int>(K, 0));
  s.regen_choice.assign(r, std::vector<int>(S, 0));
  s.costs.assign(r, CostBreakdown{});
  return s;
}

std::optional<std::size_t> Solution::chosen_regenerator(std::size_t t) const {
  std::optional<std::size_t> chosen;
  for (std::size_t s = 0; s < regen_choice.at(t).size(); ++s) {
    if (regen_choice[t][s] == 1) {
      if (chosen) return std::nullopt;
      chosen = s;
    }
  }
  return chosen;
}

namespace {

class Report {
 public:
  void add(std::string entity, std::string rule, std::string message) {
    out_.push_back({std::move(entity), std::move(rule), std::move(message)});
  }
  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

void check_series(Report& report, const std::string& entity, const std::vector<double>& values,
                  std::size_t periods, const char* negative_rule) {
  if (values.size() != periods) {
    report.add(entity, "period length",
               "has " + std::to_string(values.size()) + " values, expected " +
                   std::to_string(periods));
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      report.add(entity, negative_rule, "value " + std::to_string(v) + " is not >= 0");
      break;
    }
  }
}

void check_conc_table(Report& report, const std::string& entity, const Table<double>& table,
                      std::size_t contaminants, std::size_t periods) {
  if (table.size() != contaminants) {
    report.add(entity, "contaminant length",
               "has " + std::to_string(table.size()) + " contaminant rows, expected " +
                   std::to_string(contaminants));
  }
  for (const auto& row : table) check_series(report, entity, row, periods, "negative concentration");
}

}  // namespace

std::vector<Violation> validate_instance(const NetworkInstance& instance) {
  Report report;
  const std::size_t r = instance.period_count();
  const std::size_t C = instance.contaminant_count();

  if (instance.contaminants.empty()) report.add("contaminants", "missing contaminants", "no contaminant declared");
  if (std::set<std::string>(instance.contaminants.begin(), instance.contaminants.end()).size() != C)
    report.add("contaminants", "duplicate id", "contaminant ids are not unique");

  if (instance.plants.empty()) report.add("plants", "missing plants", "no plant declared");
  std::set<std::string> plant_ids;
  for (const auto& p : instance.plants)
    if (!plant_ids.insert(p).second) report.add("plant " + p, "duplicate id", "plant id repeated");

  std::set<std::string> source_ids;
  for (const auto& src : instance.sources) {
    const std::string entity = "source " + src.id;
    if (!source_ids.insert(src.id).second) report.add(entity, "duplicate id", "source id repeated");
    if (!plant_ids.count(src.plant)) report.add(entity, "unknown plant", "plant '" + src.plant + "' does not exist");
    check_series(report, entity, src.flow, r, "negative flow");
    check_conc_table(report, entity, src.conc, C, r);
  }
  std::set<std::string> sink_ids;
  for (const auto& snk : instance.sinks) {
    const std::string entity = "sink " + snk.id;
    if (!sink_ids.insert(snk.id).second) report.add(entity, "duplicate id", "sink id repeated");
    if (!plant_ids.count(snk.plant)) report.add(entity, "unknown plant", "plant '" + snk.plant + "' does not exist");
    check_series(report, entity, snk.flow, r, "negative flow");
    check_conc_table(report, entity, snk.max_conc, C, r);
  }

  if (instance.regenerators.empty())
    report.add("regenerators", "missing regenerators", "at least one regenerator option is required");
  for (std::size_t s = 0; s < instance.regenerators.size(); ++s) {
    const auto& reg = instance.regenerators[s];
    const std::string entity = "regenerator " + std::to_string(reg.index);
    if (s > 0 && reg.index <= instance.regenerators[s - 1].index)
      report.add(entity, "regenerator order", "catalog must be sorted by strictly increasing index");
    if (reg.removal_ratio.size() != C)
      report.add(entity, "contaminant length", "removal ratio needs one entry per contaminant");
    for (double rr : reg.removal_ratio)
      if (!(rr >= 0.0 && rr < 1.0)) report.add(entity, "removal ratio range", "removal ratio must lie in [0, 1)");
    if (!(reg.unit_cost >= 0.0)) report.add(entity, "negative cost", "unit cost must be >= 0");
  }

  const auto& e = instance.economics;
  const std::pair<const char*, double> nonneg[] = {
      {"distance", e.distance},         {"pipe_cost_p", e.pipe_cost_p},
      {"pipe_cost_q", e.pipe_cost_q},   {"water_density", e.water_density},
      {"velocity", e.velocity},         {"annual_hours", e.annual_hours},
      {"freshwater_price", e.freshwater_price}, {"discharge_price", e.discharge_price}};
  for (const auto& [name, value] : nonneg)
    if (!(value >= 0.0)) report.add(std::string("economics.") + name, "negative parameter", "must be >= 0");
  if (!(e.water_density > 0.0 && e.velocity > 0.0))
    report.add("economics", "pipe sizing", "water density and velocity must be > 0");
  if (!(e.interest > 0.0 && e.interest < 1.0))
    report.add("economics.interest", "interest range", "interest rate must lie in (0, 1)");
  if (!(e.economic_life >= 1.0))
    report.add("economics.economic_life", "economic life", "economic life must be >= 1 year");
  if (e.freshwater_conc.size() != C)
    report.add("economics.freshwater_conc", "contaminant length", "needs one entry per contaminant");
  for (double c : e.freshwater_conc)
    if (!(c >= 0.0)) report.add("economics.freshwater_conc", "negative concentration", "must be >= 0");
  // A derived upper bound below the minimum pipe flow just keeps the hub idle.
  const double ub = e.hub_flow_ub ? *e.hub_flow_ub : std::numeric_limits<double>::infinity();
  if (!(e.hub_flow_lb >= 0.0 && e.hub_flow_lb <= ub))
    report.add("economics.hub_flow", "hub bounds", "requires 0 <= hub_flow_lb <= hub_flow_ub");

  const auto& sc = instance.scenario;
  if (r < 1) report.add("scenario", "period count", "at least one period is required");
  if (sc.period_weights.size() != r)
    report.add("scenario", "weight length",
               std::to_string(sc.period_weights.size()) + " weights for " + std::to_string(r) + " periods");
  for (double w : sc.period_weights)
    if (!(w >= 0.0)) report.add("scenario", "negative weight", "period weights must be >= 0");
  if (sc.plant_entry_period.size() != instance.plants.size()) {
    report.add("scenario", "entry length", "one entry period per plant is required");
  } else {
    for (std::size_t k = 0; k < instance.plants.size(); ++k) {
      int entry = sc.plant_entry_period[k];
      if (entry < 1 || entry > static_cast<int>(r))
        report.add("plant " + instance.plants[k], "entry period", "entry period must lie in [1, period_count]");
    }
  }
  return report.take();
}

std::vector<std::string> active_plants(const NetworkInstance& instance, std::size_t t) {
  if (t >= instance.period_count()) throw std::out_of_range("period out of range");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < instance.plants.size(); ++k)
    if (instance.plant_active(k, t)) out.push_back(instance.plants[k]);
  return out;
}

double annualization_factor(double interest, double economic_life) {
  if (!(interest > 0.0 && interest < 1.0) || !(economic_life >= 1.0))
    throw std::domain_error("annualization factor needs 0 < u < 1 and EL >= 1");
  const double growth = std::pow(1.0 + interest, economic_life);
  return interest * growth / (growth - 1.0);
}

std::vector<CostBreakdown> compute_costs(const NetworkInstance& instance, const Solution& solution) {
  const auto& e = instance.economics;
  const double af = annualization_factor(e.interest, e.economic_life);
  // t/h -> kg/s divided by velocity*density gives the pipe cross-section (m^2).
  const double area_per_flow = 1000.0 / (3600.0 * e.water_density * e.velocity);
  const double to_million = 1e-6;

  std::vector<CostBreakdown> out(instance.period_count());
  for (std::size_t t = 0; t < out.size(); ++t) {
    auto& cost = out[t];
    double pipe_flow = 0.0;
    double pipes = 0.0;
    double discharge = 0.0;
    for (std::size_t k = 0; k < instance.plants.size(); ++k) {
      pipe_flow += solution.export_flow[t][k] + solution.import_total[t][k];
      pipes += solution.export_pipe[t][k] + solution.import_pipe[t][k];
      discharge += solution.discharge[t][k];
    }
    double fresh = 0.0;
    for (double f : solution.fresh[t]) fresh += f;
    double removed = 0.0;
    for (double mr : solution.mass_removed[t]) removed += mr;
    double unit_cost = 0.0;
    for (std::size_t s = 0; s < instance.regenerators.size(); ++s)
      unit_cost += solution.regen_choice[t][s] * instance.regenerators[s].unit_cost;

    cost.investment = e.distance * af * (e.pipe_cost_p * area_per_flow * pipe_flow + e.pipe_cost_q * pipes) * to_million;
    cost.freshwater = e.annual_hours * fresh * e.freshwater_price * to_million;
    cost.discharge = e.annual_hours * discharge * e.discharge_price * to_million;
    // g/h * 1e-3 = kg/h
    cost.regeneration = e.annual_hours * unit_cost * removed * 1e-3 * to_million;
    cost.operating = cost.freshwater + cost.regeneration + cost.discharge;
  }
  return out;
}

double weighted_freshwater(const NetworkInstance& instance, const Solution& solution) {
  double total = 0.0;
  for (std::size_t t = 0; t < instance.period_count(); ++t)
    total += instance.scenario.period_weights[t] *
             std::accumulate(solution.fresh[t].begin(), solution.fresh[t].end(), 0.0);
  return total;
}

double weighted_discharge(const NetworkInstance& instance, const Solution& solution) {
  double total = 0.0;
  for (std::size_t t = 0; t < instance.period_count(); ++t)
    total += instance.scenario.period_weights[t] *
             std::accumulate(solution.discharge[t].begin(), solution.discharge[t].end(), 0.0);
  return total;
}

double weighted_objective(const NetworkInstance& instance, const Solution& solution, ObjectiveKind kind) {
  if (kind == ObjectiveKind::freshwater) return weighted_freshwater(instance, solution);
  const auto costs = compute_costs(instance, solution);
  double total = 0.0;
  for (std::size_t t = 0; t < costs.size(); ++t)
    total += instance.scenario.period_weights[t] * (costs[t].investment + costs[t].operating);
  return total;
}

NetworkInstance truncate_periods(const NetworkInstance& instance, std::size_t periods) {
  if (periods < 1 || periods > instance.period_count())
    throw std::out_of_range("truncation must keep between 1 and period_count periods");
  NetworkInstance out = instance;
  auto cut = [periods](std::vector<double>& v) { v.resize(periods); };
  for (auto& src : out.sources) {
    cut(src.flow);
    for (auto& row : src.conc) cut(row);
  }
  for (auto& snk : out.sinks) {
    cut(snk.flow);
    for (auto& row : snk.max_conc) cut(row);
  }
  out.scenario.period_count = periods;
  // Kept weights are rescaled to the original total so costs stay comparable across r.
  auto& w = out.scenario.period_weights;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  cut(w);
  const double kept = std::accumulate(w.begin(), w.end(), 0.0);
  if (kept > 0.0)
    for (double& x : w) x *= total / kept;
  for (int& entry : out.scenario.plant_entry_period)
    entry = std::min(entry, static_cast<int>(periods));
  return out;
}

}  // namespace eipw
