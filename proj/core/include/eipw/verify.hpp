#pragma once

// Independent checks of network designs.
//
// `residuals` re-derives every balance and logic rule straight from the
// instance data; it never goes through the program builders, so a builder
// bug shows up as a residual. `brute_force_tiny` enumerates binaries and a
// flow grid on very small instances.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eipw/model.hpp"

namespace eipw {

struct ResidualEntry {
  std::string tag;     // eq1..eq16, logic, bound
  std::string entity;
  double residual = 0.0;  // absolute violation, >= 0
  double scale = 1.0;     // max(1, |rhs|)
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;
  std::map<std::string, double> max_by_tag;  // absolute
  std::string worst_tag;
  std::string worst_entity;
  double worst_scaled = 0.0;  // max residual / scale
  double tolerance = 1e-6;
  bool pass = true;

  double max_for(const std::string& tag) const {
    auto it = max_by_tag.find(tag);
    return it == max_by_tag.end() ? 0.0 : it->second;
  }
};

// Throws std::invalid_argument when the solution is not shaped for the instance.
ResidualReport residuals(const NetworkInstance& instance, const Solution& solution,
                         double tolerance = 1e-6);

struct OracleResult {
  bool feasible = false;
  double objective = 0.0;
  Solution solution;
  std::size_t evaluated = 0;  // grid points visited
};

// Guard: <= 2 plants, <= 2 sources, <= 2 sinks, <= 2 periods, 1 contaminant.
// Throws std::invalid_argument when the guard fails or grid_step <= 0.
OracleResult brute_force_tiny(const NetworkInstance& instance, ObjectiveKind kind, double grid_step);

// One line of the published results table.
struct ReferenceRow {
  std::string model;
  double freshwater = 0.0;       // t/h
  double wastewater = 0.0;       // t/h
  double removal_ratio = 0.0;
  double weighted_cost = 0.0;    // M$/yr
  double fresh_cost = 0.0;
  double waste_cost = 0.0;
  double pipe_capital = 0.0;
};

// Rows of a reference CSV (header line, '#' comment lines ignored).
// Throws std::runtime_error on malformed rows.
std::vector<ReferenceRow> parse_reference_csv(const std::string& text);

struct ReferenceSlack {
  double cost = 0.05;
  double flow = 0.02;
};

struct ReferenceComparison {
  bool pass = false;
  double cost_delta = 0.0;        // relative, (run - ref) / ref
  double freshwater_delta = 0.0;  // relative
  double wastewater_delta = 0.0;  // relative, informational
  double removal_ratio_delta = 0.0;
  std::string text;
};

// `run` carries the same columns as the reference (see io::summarize).
// Pass iff run cost <= ref cost * (1 + cost slack) and freshwater is within
// the flow slack.
ReferenceComparison compare_to_reference(const ReferenceRow& run, const ReferenceRow& reference,
                                         const ReferenceSlack& slack = {});

// Economic parameters implied by one published row.
struct ImpliedEconomics {
  double freshwater_price = 0.0;  // $/t, fresh cost / (flow * hours)
  double discharge_price = 0.0;   // $/t
  double annualization = 0.0;     // AF from the pipeline column
};

// The pipeline column alone does not fix the hub throughput; it is taken equal
// to the row's wastewater flow, with `pipes` pipelines installed.
// Throws std::invalid_argument on non-positive flows or pipe count.
ImpliedEconomics back_calculate(const ReferenceRow& row, const EconomicParams& economics, int pipes);

}  // namespace eipw
