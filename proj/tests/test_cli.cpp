#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "eipw/io.hpp"
#include "support.hpp"

using namespace eipw;
using eipw::testing::data_path;
using eipw::testing::read_file;
using eipw::testing::tiny;
using eipw::testing::tiny_pair;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "eipwater");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("eipw_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& bytes) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << bytes;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ValidateExitCodes) {
  EXPECT_EQ(invoke({"validate", data_path("eip1.json")}).code, 0);
  EXPECT_EQ(invoke({"validate", data_path("eip1.json"), data_path("eip2_case2.json")}).code, 0);

  const Outcome corrupt = invoke({"validate", write("corrupt.json", "{\"plants\": [\"A\"")});
  EXPECT_EQ(corrupt.code, 2);
  EXPECT_EQ(invoke({"validate", path("absent.json")}).code, 2);

  NetworkInstance bad = tiny();
  bad.sources[0].flow[0] = -1.0;
  const Outcome neg = invoke({"validate", write("neg.json", write_instance(bad))});
  EXPECT_EQ(neg.code, 1);
  EXPECT_EQ(std::count(neg.err.begin(), neg.err.end(), '\n'), 1) << neg.err;
  EXPECT_NE(neg.err.find("negative flow"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 1);
  EXPECT_EQ(invoke({"solve"}).code, 1);
  EXPECT_EQ(invoke({"solve", data_path("eip1.json"), "--objective", "water"}).code, 1);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(CliTest, SolveWritesArtifacts) {
  const std::string inst = write("pair.json", write_instance(tiny_pair(2, true)));
  const Outcome r = invoke({"solve", inst, "--objective", "cost", "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("objective "), std::string::npos);
  EXPECT_NE(r.out.find("gap "), std::string::npos);
  EXPECT_NE(r.out.find("nodes "), std::string::npos);
  EXPECT_NE(r.out.find("residual check pass"), std::string::npos);
  for (const char* f : {"pair.solution.json", "pair.summary.csv", "pair.t1.dot", "pair.t2.dot"})
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  // Closed loop: the solution file is accepted back.
  const Outcome rep = invoke({"report", path("out/pair.solution.json"), "--out", path("again")});
  EXPECT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("t2"), std::string::npos);
  EXPECT_EQ(read_file(path("again/pair.t1.dot")), read_file(path("out/pair.t1.dot")));
}

TEST_F(CliTest, SolveInfeasibleAndNoIncumbent) {
  EXPECT_EQ(invoke({"solve", data_path("infeasible_fixture.json")}).code, 3);
  const std::string inst = write("pair.json", write_instance(tiny_pair()));
  const Outcome r = invoke({"solve", inst, "--time-limit", "1e-9"});
  EXPECT_EQ(r.code, 4) << r.out;
}

TEST_F(CliTest, TamperedSolutionIsRejected) {
  const std::string inst = write("tiny.json", write_instance(tiny()));
  ASSERT_EQ(invoke({"solve", inst, "--objective", "freshwater", "--out", path("out")}).code, 0);
  const std::string good = read_file(path("out/tiny.solution.json"));
  auto doc = nlohmann::json::parse(good);
  auto& fresh = doc["periods"][0]["fresh"][0];
  fresh = fresh.get<double>() + 1.0;
  const Outcome r = invoke({"report", write("tampered.json", doc.dump(2))});
  EXPECT_EQ(r.code, 5);
  EXPECT_NE(r.err.find("residual"), std::string::npos);
  EXPECT_EQ(invoke({"report", write("junk.json", "not json")}).code, 2);
  EXPECT_EQ(invoke({"report", path("missing.json")}).code, 2);
}

TEST_F(CliTest, SweepRowsByPeriodCount) {
  const std::string inst = write("pair.json", write_instance(tiny_pair(2, true)));
  const Outcome r = invoke({"sweep", inst, "--out", path("sw")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, first, second, extra;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_FALSE(std::getline(lines, extra));
  EXPECT_EQ(header, std::string(kSummaryHeader) + ",status");
  EXPECT_EQ(first.rfind("pair r=1,", 0), 0u);
  EXPECT_EQ(second.rfind("pair r=2,", 0), 0u);
  EXPECT_TRUE(fs::exists(dir_ / "sw" / "pair.sweep.csv"));

  // A one-period sweep reproduces the solve summary row.
  const std::string single = write("single.json", write_instance(tiny_pair(1)));
  const Outcome sweep = invoke({"sweep", single});
  ASSERT_EQ(invoke({"solve", single, "--out", path("one")}).code, 0);
  const std::string summary = read_file(path("one/single.summary.csv"));
  const std::string solve_row = summary.substr(summary.find('\n') + 1);
  std::string sweep_row = sweep.out.substr(sweep.out.find('\n') + 1);
  sweep_row = sweep_row.substr(sweep_row.find(','));
  EXPECT_EQ(sweep_row.substr(0, sweep_row.rfind(',')), solve_row.substr(solve_row.find(','), solve_row.size() - solve_row.find(',') - 1));
}

TEST_F(CliTest, SweepRecordsFailures) {
  const Outcome r = invoke({"sweep", data_path("infeasible_fixture.json")});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("infeasible"), std::string::npos);
}

TEST_F(CliTest, ExitCodesRepeat) {
  const std::string inst = write("pair.json", write_instance(tiny_pair(2, true)));
  const Outcome a = invoke({"solve", inst, "--objective", "freshwater"});
  const Outcome b = invoke({"solve", inst, "--objective", "freshwater"});
  EXPECT_EQ(a.code, b.code);
  EXPECT_EQ(a.out, b.out);
}
