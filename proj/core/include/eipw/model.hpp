#pragma once

// Domain types for multi-period water network planning in an eco-industrial
// park (EIP) that exchanges water through a centralized regeneration hub.
//
// Units used throughout:
//   flows           tonne/hour (t/h)
//   concentrations  ppm (g per tonne)
//   contaminant mass g/hour
//   money           million dollars per year (M$/yr) unless noted
//
// Periods are 0-based in every C++ interface. Plant entry periods are stored
// 1-based, exactly as they appear in instance files.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace eipw {

template <class T>
using Table = std::vector<std::vector<T>>;

struct SourceSpec {
  std::string id;
  std::string plant;
  std::vector<double> flow;  // [period]
  Table<double> conc;        // [contaminant][period]
};

struct SinkSpec {
  std::string id;
  std::string plant;
  std::vector<double> flow;  // [period]
  Table<double> max_conc;    // [contaminant][period]
};

struct RegeneratorOption {
  int index = 0;
  std::vector<double> removal_ratio;  // [contaminant], fraction removed
  double unit_cost = 0.0;             // $ per kg removed
};

struct EconomicParams {
  double distance = 100.0;        // m
  double pipe_cost_p = 7200.0;
  double pipe_cost_q = 250.0;
  double water_density = 1000.0;  // kg/m^3
  double velocity = 1.0;          // m/s
  double annual_hours = 8000.0;   // h/yr
  double interest = 0.05;         // fraction per year
  double economic_life = 15.0;    // years
  double freshwater_price = 0.5;  // $/t
  double discharge_price = 0.5;   // $/t
  std::vector<double> freshwater_conc;  // [contaminant], ppm
  double hub_flow_lb = 0.1;             // t/h
  // Unset means "derive from the instance": sum over sources of the
  // largest per-period flow.
  std::optional<double> hub_flow_ub;
};

struct Scenario {
  std::size_t period_count = 1;
  std::vector<double> period_weights;
  // Parallel to NetworkInstance::plants; 1-based first active period.
  std::vector<int> plant_entry_period;
};

struct NetworkInstance {
  std::string name;
  std::vector<std::string> contaminants;
  std::vector<std::string> plants;
  std::vector<SourceSpec> sources;
  std::vector<SinkSpec> sinks;
  std::vector<RegeneratorOption> regenerators;
  EconomicParams economics;
  Scenario scenario;

  std::size_t period_count() const { return scenario.period_count; }
  std::size_t contaminant_count() const { return contaminants.size(); }

  // Throws std::out_of_range for unknown ids.
  std::size_t plant_index(const std::string& plant) const;
  std::size_t source_plant(std::size_t i) const { return plant_index(sources[i].plant); }
  std::size_t sink_plant(std::size_t j) const { return plant_index(sinks[j].plant); }

  std::vector<std::size_t> sources_of(std::size_t plant) const;
  std::vector<std::size_t> sinks_of(std::size_t plant) const;

  bool plant_active(std::size_t plant, std::size_t t) const;
  bool source_active(std::size_t i, std::size_t t) const { return plant_active(source_plant(i), t); }
  bool sink_active(std::size_t j, std::size_t t) const { return plant_active(sink_plant(j), t); }

  // In-plant reuse only: a reuse arc exists iff source and sink share a plant.
  bool reuse_allowed(std::size_t i, std::size_t j) const {
    return sources[i].plant == sinks[j].plant;
  }

  double hub_flow_upper() const;
};

enum class ObjectiveKind { cost, freshwater };

const char* to_string(ObjectiveKind kind);
std::optional<ObjectiveKind> parse_objective_kind(const std::string& text);

struct CostBreakdown {
  double investment = 0.0;    // pipelines, M$/yr
  double operating = 0.0;     // fresh + regeneration + discharge, M$/yr
  double freshwater = 0.0;
  double discharge = 0.0;
  double regeneration = 0.0;
};

// Every flow/concentration/binary of a network design, dense over all
// indices. Entries of inactive plants and of cross-plant reuse arcs are 0.
struct Solution {
  std::vector<Table<double>> reuse;  // [t][i][j]
  Table<double> fresh;         // [t][j]
  Table<double> source_outlet; // [t][i]
  Table<double> export_flow;   // [t][k]   f_CH
  Table<double> discharge;     // [t][k]   f_D
  Table<double> import_total;  // [t][k]   g_CH
  Table<double> sink_import;   // [t][j]   f_Imp
  std::vector<Table<double>> export_conc;  // [t][c][k]
  Table<double> hub_conc;      // [t][c]   C_mix_CH
  Table<double> mass_removed;  // [t][c]
  Table<int> import_pipe;      // [t][k]   l
  Table<int> export_pipe;      // [t][k]   y
  Table<int> regen_choice;     // [t][s]   m

  std::vector<CostBreakdown> costs;  // [t], unweighted
  ObjectiveKind objective_kind = ObjectiveKind::cost;
  double objective_value = 0.0;

  // All-zero design shaped for `instance`.
  static Solution zeros(const NetworkInstance& instance);

  // Index of the regenerator selected in period t, or nullopt if none/many.
  std::optional<std::size_t> chosen_regenerator(std::size_t t) const;
};

struct Violation {
  std::string entity;
  std::string rule;
  std::string message;
};

std::vector<Violation> validate_instance(const NetworkInstance& instance);

// 0-based period; throws std::out_of_range when t >= period_count.
std::vector<std::string> active_plants(const NetworkInstance& instance, std::size_t t);

// Capital recovery factor u(1+u)^EL / ((1+u)^EL - 1).
// Throws std::domain_error unless 0 < u < 1 and EL >= 1.
double annualization_factor(double interest, double economic_life);

// Per-period costs of a design, evaluated directly from flows. The
// regeneration cost uses the regenerator selected in each period.
std::vector<CostBreakdown> compute_costs(const NetworkInstance& instance,
                                         const Solution& solution);

// Weighted objective of a design: cost in M$/yr or freshwater in t/h.
double weighted_objective(const NetworkInstance& instance, const Solution& solution,
                          ObjectiveKind kind);

double weighted_freshwater(const NetworkInstance& instance, const Solution& solution);
double weighted_discharge(const NetworkInstance& instance, const Solution& solution);

// Instance restricted to the first `periods` periods; plants entering later
// are clamped to enter in the last kept period. Kept weights are rescaled to
// the original total.
NetworkInstance truncate_periods(const NetworkInstance& instance, std::size_t periods);

}  // namespace eipw
