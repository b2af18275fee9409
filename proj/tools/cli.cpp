#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "eipw/formulation.hpp"
#include "eipw/io.hpp"
#include "eipw/verify.hpp"

namespace eipw::cli {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool write_file(const fs::path& path, const std::string& bytes, std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  if (!out) {
    err << "cannot write " << path.string() << "\n";
    return false;
  }
  return true;
}

std::string number(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Loads and validates an instance; prints issues. Returns an exit code on failure.
std::optional<NetworkInstance> load_instance(const std::string& path, std::ostream& err, int& code) {
  auto bytes = slurp(path);
  if (!bytes) {
    err << path << ": cannot read file\n";
    code = kUnreadable;
    return std::nullopt;
  }
  auto parsed = parse_instance(*bytes, path);
  for (const auto& issue : parsed.issues) err << issue.to_string() << "\n";
  if (!parsed.ok()) {
    const bool malformed = !parsed.issues.empty() && parsed.issues.front().message.rfind("malformed", 0) == 0;
    code = malformed ? kUnreadable : kInvalid;
    return std::nullopt;
  }
  code = kOk;
  return std::move(parsed.instance);
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void print_table(const NetworkInstance& in, const Solution& s, std::ostream& out) {
  out << "period  freshwater_tph  wastewater_tph  hub_tph  regenerator  investment_M  operating_M\n";
  for (std::size_t t = 0; t < in.period_count(); ++t) {
    double fresh = 0.0, waste = 0.0, hub = 0.0;
    for (double f : s.fresh[t]) fresh += f;
    for (double f : s.discharge[t]) waste += f;
    for (double f : s.export_flow[t]) hub += f;
    const auto reg = s.chosen_regenerator(t);
    const std::string rr = reg ? number(in.regenerators[*reg].removal_ratio.front(), 2) : "-";
    const CostBreakdown c = t < s.costs.size() ? s.costs[t] : CostBreakdown{};
    std::ostringstream line;
    line << "t" << t + 1;
    std::string row = line.str();
    row.resize(8, ' ');
    auto col = [&row](const std::string& v, std::size_t width) {
      row += std::string(width > v.size() ? width - v.size() : 0, ' ') + v + "  ";
    };
    col(number(fresh), 14);
    col(number(waste), 14);
    col(number(hub), 7);
    col(rr, 11);
    col(number(c.investment, 4), 12);
    col(number(c.operating, 4), 11);
    while (!row.empty() && row.back() == ' ') row.pop_back();
    out << row << "\n";
  }
  const ReferenceRow sum = summarize(in, s, in.name);
  out << "weighted freshwater " << number(sum.freshwater) << " t/h, wastewater " << number(sum.wastewater)
      << " t/h, cost " << number(sum.weighted_cost, 4) << " M$/yr (freshwater " << number(sum.fresh_cost, 4)
      << ", wastewater " << number(sum.waste_cost, 4) << ", pipelines " << number(sum.pipe_capital, 4) << ")\n";
}

bool write_dot_files(const NetworkInstance& in, const Solution& s, const fs::path& dir, const std::string& stem,
                     std::ostream& err) {
  for (std::size_t t = 0; t < in.period_count(); ++t)
    if (!write_file(dir / (stem + ".t" + std::to_string(t + 1) + ".dot"), export_network_dot(s, in, t), err))
      return false;
  return true;
}

}  // namespace

int cmd_validate(const std::vector<std::string>& paths, std::ostream& out, std::ostream& err) {
  int worst = kOk;
  for (const auto& path : paths) {
    int code = kOk;
    auto instance = load_instance(path, err, code);
    if (instance) out << path << ": ok (" << instance->sources.size() << " sources, " << instance->sinks.size()
                      << " sinks, " << instance->plants.size() << " plants, " << instance->period_count()
                      << " periods)\n";
    worst = std::max(worst, code);
  }
  return worst;
}

int cmd_solve(const Invocation& inv, std::ostream& out, std::ostream& err) {
  int code = kOk;
  auto instance = load_instance(inv.paths.at(0), err, code);
  if (!instance) return code;

  const Program program = assemble_program(*instance, inv.objective);
  const SolveReport report = solve(*instance, program, inv.config);

  out << "model " << instance->name << ", objective " << to_string(inv.objective) << "\n";
  out << "termination " << to_string(report.termination) << ", nodes " << report.nodes << ", lp solves "
      << report.lp_solves << "\n";
  if (!report.incumbent) {
    out << "no feasible design found\n";
    return report.termination == Termination::infeasible ? kInfeasible : kNoIncumbent;
  }
  const Solution& s = *report.incumbent;
  const ReferenceRow row = summarize(*instance, s, instance->name);
  out << "objective " << number(report.objective(), inv.objective == ObjectiveKind::cost ? 4 : 2)
      << (inv.objective == ObjectiveKind::cost ? " M$/yr" : " t/h") << ", lower bound "
      << number(report.lower_bound, 4) << ", gap " << number(100.0 * report.gap, 3) << "%\n";
  out << "freshwater " << number(row.freshwater) << " t/h, wastewater " << number(row.wastewater)
      << " t/h, removal ratio " << number(row.removal_ratio, 1) << ", weighted cost " << number(row.weighted_cost, 4)
      << " M$/yr\n";
  out << "residual check " << (report.residuals.pass ? "pass" : "FAIL") << " (worst "
      << report.residuals.worst_scaled;
  if (!report.residuals.worst_tag.empty())
    out << " in " << report.residuals.worst_tag << " " << report.residuals.worst_entity;
  out << ")\n";

  if (!inv.out_dir.empty()) {
    const fs::path dir(inv.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    const std::string stem = stem_of(inv.paths[0]);
    if (!write_file(dir / (stem + ".solution.json"), write_solution_report(s, *instance), err) ||
        !write_file(dir / (stem + ".summary.csv"), write_summary_csv(std::vector<ReferenceRow>{row}), err) ||
        !write_dot_files(*instance, s, dir, stem, err))
      return kUnreadable;
  }
  return kOk;
}

int cmd_report(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const std::string& path = inv.paths.at(0);
  auto bytes = slurp(path);
  if (!bytes) {
    err << path << ": cannot read file\n";
    return kUnreadable;
  }
  SolutionDocument doc;
  try {
    doc = parse_solution_report(*bytes);
  } catch (const std::exception& e) {
    err << path << ": " << e.what() << "\n";
    return kUnreadable;
  }
  const ResidualReport check = residuals(doc.instance, doc.solution, inv.config.residual_tol);
  if (!check.pass) {
    err << path << ": residual check failed: " << check.worst_tag << " at " << check.worst_entity << " (scaled "
        << check.worst_scaled << ")\n";
    return kResidualFailure;
  }
  out << "model " << doc.instance.name << ", objective " << to_string(doc.solution.objective_kind) << " "
      << number(doc.solution.objective_value, 4) << "\n";
  print_table(doc.instance, doc.solution, out);
  if (!inv.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(inv.out_dir, ec);
    std::string stem = stem_of(path);
    if (stem.size() > 9 && stem.substr(stem.size() - 9) == ".solution") stem.resize(stem.size() - 9);
    if (!write_dot_files(doc.instance, doc.solution, inv.out_dir, stem, err)) return kUnreadable;
  }
  return kOk;
}

int cmd_sweep(const Invocation& inv, std::ostream& out, std::ostream& err) {
  int code = kOk;
  auto instance = load_instance(inv.paths.at(0), err, code);
  if (!instance) return code;

  std::vector<SummaryLine> lines;
  bool any = false;
  for (std::size_t r = 1; r <= instance->period_count(); ++r) {
    const NetworkInstance cut = truncate_periods(*instance, r);
    const std::string model = instance->name + " r=" + std::to_string(r);
    SummaryLine line;
    line.row.model = model;
    try {
      const Program program = assemble_program(cut, inv.objective);
      const SolveReport report = solve(cut, program, inv.config);
      line.status = to_string(report.termination);
      if (report.incumbent) {
        line.row = summarize(cut, *report.incumbent, model);
        any = true;
      } else {
        line.status = report.termination == Termination::infeasible ? "infeasible" : "no_incumbent";
      }
    } catch (const std::exception& e) {
      err << model << ": " << e.what() << "\n";
      line.status = "failed";
    }
    lines.push_back(line);
  }
  const std::string csv = write_summary_csv(lines, true);
  out << csv;
  if (!inv.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(inv.out_dir, ec);
    if (!write_file(fs::path(inv.out_dir) / (stem_of(inv.paths[0]) + ".sweep.csv"), csv, err)) return kUnreadable;
  }
  return any ? kOk : kNoIncumbent;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-period water network design for eco-industrial parks"};
  app.require_subcommand(1);

  Invocation inv;
  std::string objective = "cost";
  double gap = inv.config.relative_gap;
  double time_limit = inv.config.time_limit;
  std::size_t max_nodes = inv.config.max_nodes;
  bool deterministic = true;

  auto solver_flags = [&](CLI::App* sub) {
    sub->add_option("--objective", objective, "cost or freshwater")->check(CLI::IsMember({"cost", "freshwater"}));
    sub->add_option("--gap", gap, "relative optimality gap")->check(CLI::PositiveNumber);
    sub->add_option("--time-limit", time_limit, "wall-clock limit in seconds")->check(CLI::PositiveNumber);
    sub->add_option("--max-nodes", max_nodes, "branch-and-bound node limit")->check(CLI::PositiveNumber);
    sub->add_flag("--deterministic,!--no-deterministic", deterministic, "reproducible node order (default on)");
    sub->add_option("--out", inv.out_dir, "output directory");
  };

  auto* validate = app.add_subcommand("validate", "check instance files");
  validate->add_option("paths", inv.paths, "instance files")->required();
  auto* solve_cmd = app.add_subcommand("solve", "design the network for one instance");
  solve_cmd->add_option("instance", inv.paths, "instance file")->required()->expected(1);
  solver_flags(solve_cmd);
  auto* report = app.add_subcommand("report", "re-check and print a solution file");
  report->add_option("solution", inv.paths, "solution file")->required()->expected(1);
  report->add_option("--out", inv.out_dir, "directory for regenerated DOT files");
  auto* sweep = app.add_subcommand("sweep", "solve every leading truncation of the horizon");
  sweep->add_option("instance", inv.paths, "instance file")->required()->expected(1);
  solver_flags(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kInvalid;
  }

  inv.objective = *parse_objective_kind(objective);
  inv.config.relative_gap = gap;
  inv.config.time_limit = time_limit;
  inv.config.max_nodes = max_nodes;
  inv.config.deterministic = deterministic;

  try {
    if (validate->parsed()) return cmd_validate(inv.paths, out, err);
    if (solve_cmd->parsed()) return cmd_solve(inv, out, err);
    if (report->parsed()) return cmd_report(inv, out, err);
    if (sweep->parsed()) return cmd_sweep(inv, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}

}  // namespace eipw::cli
