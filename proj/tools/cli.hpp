#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "eipw/model.hpp"
#include "eipw/solver.hpp"

namespace eipw::cli {

enum ExitCode {
  kOk = 0,
  kInvalid = 1,
  kUnreadable = 2,
  kInfeasible = 3,
  kNoIncumbent = 4,
  kResidualFailure = 5,
};

struct Invocation {
  std::string subcommand;
  std::vector<std::string> paths;
  ObjectiveKind objective = ObjectiveKind::cost;
  SolverConfig config;
  std::string out_dir;  // empty: write nothing
};

int cmd_validate(const std::vector<std::string>& paths, std::ostream& out, std::ostream& err);
int cmd_solve(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_report(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_sweep(const Invocation& inv, std::ostream& out, std::ostream& err);

// Parses argv and dispatches; usage errors return kInvalid.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eipw::cli
