#include "eipw/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace eipw {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string FileIssue::to_string() const {
  std::string out = path;
  if (position > 0) out += ":" + std::to_string(position);
  out += severity == Severity::error ? ": error: " : ": warning: ";
  out += message;
  return out;
}

namespace {

// Keys that carry documentation only.
bool is_note_key(const std::string& key) { return key == "provenance" || key == "note" || key == "notes"; }

class InstanceReader {
 public:
  InstanceReader(std::string path, std::vector<FileIssue>& issues) : path_(std::move(path)), issues_(issues) {}

  void error(const std::string& message) { issues_.push_back({path_, 0, message, Severity::error}); }
  void warning(const std::string& message) { issues_.push_back({path_, 0, message, Severity::warning}); }

  void known_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) return;
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : obj.items())
      if (!allowed.count(key) && !is_note_key(key)) warning("unknown key '" + key + "' in " + where);
  }

  bool number(const json& v, const std::string& where, double& out) {
    if (!v.is_number()) {
      error(where + " must be a number");
      return false;
    }
    out = v.get<double>();
    return true;
  }

  std::vector<double> series(const json& v, const std::string& where, std::size_t periods) {
    std::vector<double> out;
    if (v.is_number()) return std::vector<double>(periods, v.get<double>());
    if (!v.is_array()) {
      error(where + " must be a number or an array of numbers");
      return out;
    }
    for (const auto& item : v) {
      double x = 0.0;
      if (!number(item, where, x)) return {};
      out.push_back(x);
    }
    return out;
  }

  // {contaminant: value or series}
  Table<double> by_contaminant(const json& v, const std::string& where, const std::vector<std::string>& contaminants,
                               std::size_t periods) {
    Table<double> out;
    if (!v.is_object()) {
      error(where + " must be an object keyed by contaminant");
      return out;
    }
    for (const auto& c : contaminants) {
      if (!v.contains(c)) {
        error(where + " is missing contaminant '" + c + "'");
        out.emplace_back(periods, 0.0);
        continue;
      }
      out.push_back(series(v.at(c), where + "." + c, periods));
    }
    for (const auto& [key, value] : v.items())
      if (std::find(contaminants.begin(), contaminants.end(), key) == contaminants.end() && !is_note_key(key))
        error(where + " names unknown contaminant '" + key + "'");
    return out;
  }

  std::vector<std::string> names(const json& doc, const char* key) {
    std::vector<std::string> out;
    if (!doc.contains(key)) return out;
    const auto& v = doc.at(key);
    if (!v.is_array()) {
      error(std::string(key) + " must be an array of strings");
      return out;
    }
    for (const auto& item : v) {
      if (!item.is_string()) {
        error(std::string(key) + " must be an array of strings");
        return {};
      }
      out.push_back(item.get<std::string>());
    }
    return out;
  }

  std::string text(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) {
      error(where + " is missing '" + key + "'");
      return {};
    }
    if (!obj.at(key).is_string()) {
      error(where + "." + key + " must be a string");
      return {};
    }
    return obj.at(key).get<std::string>();
  }

 private:
  std::string path_;
  std::vector<FileIssue>& issues_;
};

}  // namespace

InstanceParse parse_instance(const std::string& bytes, const std::string& path) {
  InstanceParse result;
  auto& issues = result.issues;
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    issues.push_back({path, e.byte, std::string("malformed document: ") + e.what(), Severity::error});
    return result;
  }
  if (!doc.is_object()) {
    issues.push_back({path, 0, "document must be a JSON object", Severity::error});
    return result;
  }

  InstanceReader rd(path, issues);
  rd.known_keys(doc, "document",
                {"name", "contaminants", "plants", "sources", "sinks", "regenerators", "economics", "scenario"});

  NetworkInstance in;
  if (doc.contains("name") && doc.at("name").is_string()) in.name = doc.at("name").get<std::string>();
  in.plants = rd.names(doc, "plants");
  in.contaminants = rd.names(doc, "contaminants");
  if (in.plants.empty()) rd.error("missing plants");
  if (in.contaminants.empty()) rd.error("missing contaminants");

  // Scenario first: it fixes the period count used to expand scalar series.
  json scenario = doc.contains("scenario") ? doc.at("scenario") : json::object();
  rd.known_keys(scenario, "scenario", {"period_count", "period_weights", "plant_entry_period"});
  std::size_t periods = 1;
  if (scenario.contains("period_count")) {
    const auto& v = scenario.at("period_count");
    if (v.is_number_integer() && v.get<long>() >= 1)
      periods = static_cast<std::size_t>(v.get<long>());
    else
      rd.error("scenario.period_count must be an integer >= 1");
  }
  in.scenario.period_count = periods;
  in.scenario.period_weights = scenario.contains("period_weights")
                                   ? rd.series(scenario.at("period_weights"), "scenario.period_weights", periods)
                                   : std::vector<double>(periods, 1.0);
  in.scenario.plant_entry_period.assign(in.plants.size(), 1);
  if (scenario.contains("plant_entry_period")) {
    const auto& entry = scenario.at("plant_entry_period");
    if (!entry.is_object()) {
      rd.error("scenario.plant_entry_period must be an object keyed by plant");
    } else {
      for (const auto& [plant, value] : entry.items()) {
        if (is_note_key(plant)) continue;
        auto it = std::find(in.plants.begin(), in.plants.end(), plant);
        if (it == in.plants.end()) {
          rd.error("scenario.plant_entry_period names unknown plant '" + plant + "'");
          continue;
        }
        if (!value.is_number_integer()) {
          rd.error("scenario.plant_entry_period." + plant + " must be an integer");
          continue;
        }
        in.scenario.plant_entry_period[static_cast<std::size_t>(it - in.plants.begin())] = value.get<int>();
      }
    }
  }

  auto streams = [&](const char* key, bool source) {
    if (!doc.contains(key)) {
      rd.error(std::string("missing ") + key);
      return;
    }
    const auto& list = doc.at(key);
    if (!list.is_array()) {
      rd.error(std::string(key) + " must be an array");
      return;
    }
    for (std::size_t n = 0; n < list.size(); ++n) {
      const auto& item = list[n];
      const std::string where = std::string(key) + "[" + std::to_string(n) + "]";
      if (!item.is_object()) {
        rd.error(where + " must be an object");
        continue;
      }
      const char* conc_key = source ? "conc" : "max_conc";
      rd.known_keys(item, where, {"id", "plant", "flow", conc_key});
      const std::string id = rd.text(item, "id", where);
      const std::string plant = rd.text(item, "plant", where);
      std::vector<double> flow;
      if (item.contains("flow"))
        flow = rd.series(item.at("flow"), where + ".flow", periods);
      else
        rd.error(where + " is missing 'flow'");
      Table<double> conc;
      if (item.contains(conc_key))
        conc = rd.by_contaminant(item.at(conc_key), where + "." + conc_key, in.contaminants, periods);
      else
        rd.error(where + " is missing '" + conc_key + "'");
      if (source)
        in.sources.push_back({id, plant, flow, conc});
      else
        in.sinks.push_back({id, plant, flow, conc});
    }
  };
  streams("sources", true);
  streams("sinks", false);

  if (!doc.contains("regenerators")) {
    rd.error("missing regenerators");
  } else if (!doc.at("regenerators").is_array()) {
    rd.error("regenerators must be an array");
  } else {
    const auto& list = doc.at("regenerators");
    for (std::size_t n = 0; n < list.size(); ++n) {
      const auto& item = list[n];
      const std::string where = "regenerators[" + std::to_string(n) + "]";
      rd.known_keys(item, where, {"index", "removal_ratio", "unit_cost"});
      RegeneratorOption reg;
      reg.index = static_cast<int>(n + 1);
      if (item.contains("index")) {
        if (item.at("index").is_number_integer())
          reg.index = item.at("index").get<int>();
        else
          rd.error(where + ".index must be an integer");
      }
      if (item.contains("removal_ratio")) {
        const auto& rr = item.at("removal_ratio");
        if (rr.is_number()) {
          reg.removal_ratio.assign(in.contaminants.size(), rr.get<double>());
        } else {
          for (const auto& row : rd.by_contaminant(rr, where + ".removal_ratio", in.contaminants, 1))
            reg.removal_ratio.push_back(row.empty() ? 0.0 : row[0]);
        }
      } else {
        rd.error(where + " is missing 'removal_ratio'");
      }
      if (item.contains("unit_cost"))
        rd.number(item.at("unit_cost"), where + ".unit_cost", reg.unit_cost);
      else
        rd.error(where + " is missing 'unit_cost'");
      in.regenerators.push_back(reg);
    }
  }

  auto& e = in.economics;
  e.freshwater_conc.assign(in.contaminants.size(), 0.0);
  if (doc.contains("economics")) {
    const auto& econ = doc.at("economics");
    rd.known_keys(econ, "economics",
                  {"distance", "pipe_cost_p", "pipe_cost_q", "water_density", "velocity", "annual_hours", "interest",
                   "economic_life", "freshwater_price", "discharge_price", "freshwater_conc", "hub_flow_lb",
                   "hub_flow_ub"});
    const std::pair<const char*, double*> fields[] = {
        {"distance", &e.distance},           {"pipe_cost_p", &e.pipe_cost_p},
        {"pipe_cost_q", &e.pipe_cost_q},     {"water_density", &e.water_density},
        {"velocity", &e.velocity},           {"annual_hours", &e.annual_hours},
        {"interest", &e.interest},           {"economic_life", &e.economic_life},
        {"freshwater_price", &e.freshwater_price}, {"discharge_price", &e.discharge_price},
        {"hub_flow_lb", &e.hub_flow_lb}};
    for (const auto& [key, target] : fields)
      if (econ.contains(key)) rd.number(econ.at(key), std::string("economics.") + key, *target);
    if (econ.contains("hub_flow_ub")) {
      double ub = 0.0;
      if (rd.number(econ.at("hub_flow_ub"), "economics.hub_flow_ub", ub)) e.hub_flow_ub = ub;
    }
    if (econ.contains("freshwater_conc")) {
      const auto& fc = econ.at("freshwater_conc");
      if (fc.is_number()) {
        e.freshwater_conc.assign(in.contaminants.size(), fc.get<double>());
      } else {
        e.freshwater_conc.clear();
        for (const auto& row : rd.by_contaminant(fc, "economics.freshwater_conc", in.contaminants, 1))
          e.freshwater_conc.push_back(row.empty() ? 0.0 : row[0]);
      }
    }
  }

  const bool structural_errors = std::any_of(issues.begin(), issues.end(),
                                             [](const FileIssue& f) { return f.severity == Severity::error; });
  if (!structural_errors) {
    for (const auto& v : validate_instance(in))
      issues.push_back({path, 0, v.entity + ": " + v.rule + ": " + v.message, Severity::error});
  }
  const bool failed = std::any_of(issues.begin(), issues.end(),
                                  [](const FileIssue& f) { return f.severity == Severity::error; });
  if (!failed) result.instance = std::move(in);
  return result;
}

namespace {

ordered series_json(const std::vector<double>& v) {
  if (v.size() == 1) return v.front();
  return v;
}

ordered contaminant_json(const NetworkInstance& in, const Table<double>& table) {
  ordered out = ordered::object();
  for (std::size_t c = 0; c < in.contaminants.size(); ++c) out[in.contaminants[c]] = series_json(table[c]);
  return out;
}

ordered instance_json(const NetworkInstance& in) {
  ordered doc;
  doc["name"] = in.name;
  doc["contaminants"] = in.contaminants;
  doc["plants"] = in.plants;
  doc["sources"] = ordered::array();
  for (const auto& s : in.sources)
    doc["sources"].push_back({{"id", s.id}, {"plant", s.plant}, {"flow", series_json(s.flow)},
                              {"conc", contaminant_json(in, s.conc)}});
  doc["sinks"] = ordered::array();
  for (const auto& s : in.sinks)
    doc["sinks"].push_back({{"id", s.id}, {"plant", s.plant}, {"flow", series_json(s.flow)},
                            {"max_conc", contaminant_json(in, s.max_conc)}});
  doc["regenerators"] = ordered::array();
  for (const auto& r : in.regenerators) {
    ordered rr = ordered::object();
    for (std::size_t c = 0; c < in.contaminants.size(); ++c) rr[in.contaminants[c]] = r.removal_ratio[c];
    doc["regenerators"].push_back({{"index", r.index}, {"removal_ratio", rr}, {"unit_cost", r.unit_cost}});
  }
  const auto& e = in.economics;
  ordered econ;
  econ["distance"] = e.distance;
  econ["pipe_cost_p"] = e.pipe_cost_p;
  econ["pipe_cost_q"] = e.pipe_cost_q;
  econ["water_density"] = e.water_density;
  econ["velocity"] = e.velocity;
  econ["annual_hours"] = e.annual_hours;
  econ["interest"] = e.interest;
  econ["economic_life"] = e.economic_life;
  econ["freshwater_price"] = e.freshwater_price;
  econ["discharge_price"] = e.discharge_price;
  ordered fc = ordered::object();
  for (std::size_t c = 0; c < in.contaminants.size(); ++c) fc[in.contaminants[c]] = e.freshwater_conc[c];
  econ["freshwater_conc"] = fc;
  econ["hub_flow_lb"] = e.hub_flow_lb;
  if (e.hub_flow_ub) econ["hub_flow_ub"] = *e.hub_flow_ub;
  doc["economics"] = econ;
  ordered entry = ordered::object();
  for (std::size_t k = 0; k < in.plants.size(); ++k) entry[in.plants[k]] = in.scenario.plant_entry_period[k];
  doc["scenario"] = {{"period_count", in.scenario.period_count},
                     {"period_weights", in.scenario.period_weights},
                     {"plant_entry_period", entry}};
  return doc;
}

}  // namespace

std::string write_instance(const NetworkInstance& instance) { return instance_json(instance).dump(2) + "\n"; }

std::string write_solution_report(const Solution& s, const NetworkInstance& in) {
  ordered doc;
  doc["format"] = "eipwater-solution";
  doc["version"] = 1;
  doc["objective_kind"] = to_string(s.objective_kind);
  doc["objective_value"] = s.objective_value;
  ordered periods = ordered::array();
  for (std::size_t t = 0; t < s.fresh.size(); ++t) {
    ordered p;
    p["period"] = t + 1;
    p["reuse"] = s.reuse[t];
    p["fresh"] = s.fresh[t];
    p["source_outlet"] = s.source_outlet[t];
    p["export_flow"] = s.export_flow[t];
    p["discharge"] = s.discharge[t];
    p["import_total"] = s.import_total[t];
    p["sink_import"] = s.sink_import[t];
    p["export_conc"] = s.export_conc[t];
    p["hub_conc"] = s.hub_conc[t];
    p["mass_removed"] = s.mass_removed[t];
    p["export_pipe"] = s.export_pipe[t];
    p["import_pipe"] = s.import_pipe[t];
    p["regen_choice"] = s.regen_choice[t];
    const CostBreakdown cost = t < s.costs.size() ? s.costs[t] : CostBreakdown{};
    p["costs"] = {{"investment", cost.investment},
                  {"operating", cost.operating},
                  {"freshwater", cost.freshwater},
                  {"discharge", cost.discharge},
                  {"regeneration", cost.regeneration}};
    periods.push_back(p);
  }
  doc["periods"] = periods;
  doc["instance"] = instance_json(in);
  return doc.dump(2) + "\n";
}

SolutionDocument parse_solution_report(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("malformed solution document: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "eipwater-solution")
    throw std::runtime_error("not a solution document");
  if (!doc.contains("instance")) throw std::runtime_error("solution document has no instance");
  auto parsed = parse_instance(doc.at("instance").dump(), "<solution instance>");
  if (!parsed.ok()) {
    std::string why;
    for (const auto& issue : parsed.issues)
      if (issue.severity == Severity::error) why += "\n  " + issue.message;
    throw std::runtime_error("embedded instance is invalid:" + why);
  }
  SolutionDocument out{std::move(*parsed.instance), {}};
  Solution& s = out.solution;
  try {
    auto kind = parse_objective_kind(doc.at("objective_kind").get<std::string>());
    if (!kind) throw std::runtime_error("unknown objective kind");
    s.objective_kind = *kind;
    s.objective_value = doc.at("objective_value").get<double>();
    for (const auto& p : doc.at("periods")) {
      s.reuse.push_back(p.at("reuse").get<Table<double>>());
      s.fresh.push_back(p.at("fresh").get<std::vector<double>>());
      s.source_outlet.push_back(p.at("source_outlet").get<std::vector<double>>());
      s.export_flow.push_back(p.at("export_flow").get<std::vector<double>>());
      s.discharge.push_back(p.at("discharge").get<std::vector<double>>());
      s.import_total.push_back(p.at("import_total").get<std::vector<double>>());
      s.sink_import.push_back(p.at("sink_import").get<std::vector<double>>());
      s.export_conc.push_back(p.at("export_conc").get<Table<double>>());
      s.hub_conc.push_back(p.at("hub_conc").get<std::vector<double>>());
      s.mass_removed.push_back(p.at("mass_removed").get<std::vector<double>>());
      s.export_pipe.push_back(p.at("export_pipe").get<std::vector<int>>());
      s.import_pipe.push_back(p.at("import_pipe").get<std::vector<int>>());
      s.regen_choice.push_back(p.at("regen_choice").get<std::vector<int>>());
      const auto& c = p.at("costs");
      s.costs.push_back({c.at("investment").get<double>(), c.at("operating").get<double>(),
                         c.at("freshwater").get<double>(), c.at("discharge").get<double>(),
                         c.at("regeneration").get<double>()});
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed solution document: ") + e.what());
  }
  if (s.fresh.size() != out.instance.period_count())
    throw std::runtime_error("solution period count does not match its instance");
  return out;
}

ReferenceRow summarize(const NetworkInstance& in, const Solution& s, const std::string& model) {
  ReferenceRow row;
  row.model = model;
  row.freshwater = weighted_freshwater(in, s);
  row.wastewater = weighted_discharge(in, s);
  const std::size_t last = in.period_count() - 1;
  if (auto reg = s.chosen_regenerator(last)) row.removal_ratio = in.regenerators[*reg].removal_ratio.front();
  const auto costs = compute_costs(in, s);
  for (std::size_t t = 0; t < costs.size(); ++t) {
    const double w = in.scenario.period_weights[t];
    row.weighted_cost += w * (costs[t].investment + costs[t].operating);
    row.fresh_cost += w * costs[t].freshwater;
    row.waste_cost += w * costs[t].discharge;
    row.pipe_capital += w * costs[t].investment;
  }
  return row;
}

namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string out = buf;
  if (out == "-0.00") out = "0.00";
  return out;
}

std::string ratio(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string out = buf;
  while (out.size() > 1 && out.back() == '0') out.pop_back();
  if (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

std::string csv_line(const ReferenceRow& r) {
  return r.model + "," + fixed2(r.freshwater) + "," + fixed2(r.wastewater) + "," + ratio(r.removal_ratio) + "," +
         fixed2(r.weighted_cost) + "," + fixed2(r.fresh_cost) + "," + fixed2(r.waste_cost) + "," +
         fixed2(r.pipe_capital);
}

}  // namespace

std::string write_summary_csv(const std::vector<ReferenceRow>& rows) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : rows) out += csv_line(r) + "\n";
  return out;
}

std::string write_summary_csv(const std::vector<SummaryLine>& lines, bool with_status) {
  std::string out = std::string(kSummaryHeader) + (with_status ? ",status\n" : "\n");
  for (const auto& l : lines) out += csv_line(l.row) + (with_status ? "," + l.status + "\n" : "\n");
  return out;
}

std::string export_network_dot(const Solution& s, const NetworkInstance& in, std::size_t t) {
  if (t >= in.period_count() || t >= s.fresh.size()) throw std::out_of_range("period out of range");
  constexpr double kShown = 5e-7;
  std::ostringstream dot;
  auto q = [](const std::string& id) { return "\"" + id + "\""; };
  dot << "digraph " << q((in.name.empty() ? std::string("network") : in.name) + " t" + std::to_string(t + 1))
      << " {\n  rankdir=LR;\n";
  dot << "  " << q("freshwater") << " [shape=box];\n";
  dot << "  " << q("hub") << " [shape=doublecircle];\n";
  dot << "  " << q("discharge") << " [shape=box];\n";
  for (std::size_t k = 0; k < in.plants.size(); ++k) {
    dot << "  subgraph " << q("cluster_" + in.plants[k]) << " {\n    label=" << q("plant " + in.plants[k]) << ";\n";
    for (std::size_t i : in.sources_of(k)) dot << "    " << q(in.sources[i].id) << " [shape=ellipse];\n";
    for (std::size_t j : in.sinks_of(k)) dot << "    " << q(in.sinks[j].id) << " [shape=invtriangle];\n";
    dot << "  }\n";
  }
  auto edge = [&](const std::string& from, const std::string& to, double flow) {
    if (flow > kShown) dot << "  " << q(from) << " -> " << q(to) << " [label=" << q(fixed2(flow)) << "];\n";
  };
  for (std::size_t i = 0; i < in.sources.size(); ++i)
    for (std::size_t j = 0; j < in.sinks.size(); ++j) edge(in.sources[i].id, in.sinks[j].id, s.reuse[t][i][j]);
  // Plant-level export and discharge are split over the plant's sources in
  // proportion to their outlet flows.
  for (std::size_t k = 0; k < in.plants.size(); ++k) {
    double waste = 0.0;
    for (std::size_t i : in.sources_of(k)) waste += s.source_outlet[t][i];
    for (std::size_t i : in.sources_of(k)) {
      const double share = waste > 0.0 ? s.source_outlet[t][i] / waste : 0.0;
      edge(in.sources[i].id, "hub", share * s.export_flow[t][k]);
      edge(in.sources[i].id, "discharge", share * s.discharge[t][k]);
    }
  }
  for (std::size_t j = 0; j < in.sinks.size(); ++j) {
    edge("freshwater", in.sinks[j].id, s.fresh[t][j]);
    edge("hub", in.sinks[j].id, s.sink_import[t][j]);
  }
  dot << "}\n";
  return dot.str();
}

}  // namespace eipw
