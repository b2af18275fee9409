#pragma once

// JSON instance and solution documents, summary CSV, Graphviz export.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "eipw/model.hpp"
#include "eipw/verify.hpp"

namespace eipw {

enum class Severity { error, warning };

struct FileIssue {
  std::string path;
  std::size_t position = 0;  // byte offset, 0 when not applicable
  std::string message;
  Severity severity = Severity::error;

  std::string to_string() const;
};

struct InstanceParse {
  std::optional<NetworkInstance> instance;  // empty when any error was found
  std::vector<FileIssue> issues;

  bool ok() const { return instance.has_value(); }
};

// Instance document:
//   { "name", "contaminants": [..], "plants": [..],
//     "sources": [{"id","plant","flow","conc": {contaminant: value}}],
//     "sinks":   [{"id","plant","flow","max_conc": {contaminant: value}}],
//     "regenerators": [{"index","removal_ratio": {contaminant: value},"unit_cost"}],
//     "economics": {...}, "scenario": {"period_count","period_weights","plant_entry_period": {plant: n}} }
// Per-period values are either a number (same in every period) or an array.
InstanceParse parse_instance(const std::string& bytes, const std::string& path = "<input>");
std::string write_instance(const NetworkInstance& instance);

// Solution document embedding its instance so it can be re-checked alone.
std::string write_solution_report(const Solution& solution, const NetworkInstance& instance);

struct SolutionDocument {
  NetworkInstance instance;
  Solution solution;
};

// Throws std::runtime_error on malformed documents.
SolutionDocument parse_solution_report(const std::string& bytes);

// Table columns of a finished design (weighted over periods).
ReferenceRow summarize(const NetworkInstance& instance, const Solution& solution, const std::string& model);

struct SummaryLine {
  ReferenceRow row;
  std::string status;  // used only when the status column is requested
};

inline const char* kSummaryHeader =
    "model,freshwater_tph,wastewater_tph,removal_ratio,weighted_cost_M,fresh_cost_M,waste_cost_M,pipe_capital_M";

std::string write_summary_csv(const std::vector<ReferenceRow>& rows);
std::string write_summary_csv(const std::vector<SummaryLine>& lines, bool with_status);

// Throws std::out_of_range for an invalid period.
std::string export_network_dot(const Solution& solution, const NetworkInstance& instance, std::size_t t);

}  // namespace eipw
