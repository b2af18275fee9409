#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "eipw/io.hpp"
#include "eipw/model.hpp"

namespace eipw::testing {

inline std::string data_path(const std::string& file) { return std::string(EIPW_DATA_DIR) + "/" + file; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline NetworkInstance load(const std::string& file) {
  auto parsed = parse_instance(read_file(data_path(file)), file);
  if (!parsed.ok()) throw std::runtime_error("fixture " + file + " does not parse");
  return *parsed.instance;
}

// One plant, one source (10 t/h, 100 ppm), one sink (10 t/h, <= sink_limit).
// A single regenerator with the given removal ratio.
inline NetworkInstance tiny(double sink_limit = 50.0, double removal = 0.0) {
  NetworkInstance in;
  in.name = "tiny";
  in.contaminants = {"COD"};
  in.plants = {"A"};
  in.sources.push_back({"SR1", "A", {10.0}, {{100.0}}});
  in.sinks.push_back({"SK1", "A", {10.0}, {{sink_limit}}});
  in.regenerators.push_back({1, {removal}, 0.5});
  in.economics.freshwater_conc = {0.0};
  in.scenario.period_count = 1;
  in.scenario.period_weights = {1.0};
  in.scenario.plant_entry_period = {1};
  return in;
}

// Two plants exchanging through the hub, optionally over two periods with
// plant B entering in the second.
inline NetworkInstance tiny_pair(std::size_t periods = 1, bool staged = false) {
  NetworkInstance in;
  in.name = "pair";
  in.contaminants = {"COD"};
  in.plants = {"A", "B"};
  const std::vector<double> f4(periods, 4.0), f3(periods, 3.0);
  in.sources.push_back({"SR1", "A", f4, {std::vector<double>(periods, 40.0)}});
  in.sources.push_back({"SR2", "B", f3, {std::vector<double>(periods, 120.0)}});
  in.sinks.push_back({"SK1", "A", f3, {std::vector<double>(periods, 20.0)}});
  in.sinks.push_back({"SK2", "B", f4, {std::vector<double>(periods, 60.0)}});
  in.regenerators.push_back({1, {0.3}, 0.7});
  in.regenerators.push_back({2, {0.6}, 1.2});
  in.economics.freshwater_conc = {0.0};
  in.economics.hub_flow_lb = 0.5;
  in.scenario.period_count = periods;
  in.scenario.period_weights.assign(periods, 1.0 / static_cast<double>(periods));
  in.scenario.plant_entry_period = {1, staged && periods > 1 ? 2 : 1};
  return in;
}

}  // namespace eipw::testing
