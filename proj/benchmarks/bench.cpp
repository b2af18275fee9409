#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>

#include "eipw/formulation.hpp"
#include "eipw/io.hpp"
#include "eipw/lp.hpp"
#include "eipw/solver.hpp"

using namespace eipw;

namespace {

NetworkInstance load(const char* file) {
  std::ifstream in(std::string(EIPW_DATA_DIR) + "/" + file);
  std::stringstream buf;
  buf << in.rdbuf();
  return *parse_instance(buf.str(), file).instance;
}

// Dense random LP with a known feasible point at x = 1.
lp::LpProblem random_lp(int n, int m, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> coef(-5, 5);
  lp::LpProblem p;
  for (int j = 0; j < n; ++j) p.add_column(coef(rng), 0.0, 10.0);
  for (int i = 0; i < m; ++i) {
    lp::SparseRow row;
    double at_one = 0.0;
    for (int j = 0; j < n; ++j) {
      const int a = coef(rng);
      if (a == 0) continue;
      row.add(j, a);
      at_one += a;
    }
    p.add_row(row, Sense::le, at_one + 3.0);
  }
  return p;
}

void BM_SimplexDense(benchmark::State& state) {
  const auto p = random_lp(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) / 2, 7);
  for (auto _ : state) benchmark::DoNotOptimize(lp::solve_lp(p));
}
BENCHMARK(BM_SimplexDense)->Arg(20)->Arg(80)->Arg(200);

void BM_RootRelaxation(benchmark::State& state) {
  const NetworkInstance in = load(state.range(0) ? "eip1_case2.json" : "eip1.json");
  const Program p = assemble_program(in, ObjectiveKind::cost);
  const Node n = fix_regenerator(p, root_node(p), 4);
  for (auto _ : state) benchmark::DoNotOptimize(lower_bound(p, n));
}
BENCHMARK(BM_RootRelaxation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SolveEip2(benchmark::State& state) {
  const NetworkInstance in = load("eip2.json");
  const Program p = assemble_program(in, ObjectiveKind::freshwater);
  for (auto _ : state) benchmark::DoNotOptimize(solve(in, p));
}
BENCHMARK(BM_SolveEip2)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
