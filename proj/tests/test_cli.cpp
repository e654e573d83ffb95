#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"

using namespace sptrsv;
using namespace sptrsv::cli;
namespace fs = std::filesystem;

namespace {

const std::string kChain6 = std::string(SPTRSV_TEST_DATA) + "/chain6.mtx";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sptrsv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  RunConfig config() const {
    RunConfig c;
    c.matrix = kChain6;
    return c;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, AnalyzeReportsBaseline) {
  RunConfig c = config();
  c.profile_before = path("before.csv");
  c.strategy = Strategy::avg_cost;  // ignored by analyze
  auto out = run(Command::analyze, c);
  EXPECT_EQ(out.exit_code, 0);
  const auto& r = out.report;
  EXPECT_EQ(r["n"], 6);
  EXPECT_EQ(r["nnz_lower"], 11);
  EXPECT_EQ(r["strategy"], "none");
  EXPECT_EQ(r["num_levels_before"], 5);
  EXPECT_EQ(r["num_levels_after"], 5);
  EXPECT_DOUBLE_EQ(r["avg_level_cost_before"].get<double>(), 3.2);
  EXPECT_EQ(r["total_level_cost_before"], 16);
  EXPECT_EQ(r["rows_rewritten"], 0);
  EXPECT_EQ(slurp(path("before.csv")), "level,rows,cost\n0,1,1\n1,2,6\n2,1,3\n3,1,3\n4,1,3\n");
}

TEST_F(CliTest, TransformAvg) {
  RunConfig c = config();
  c.strategy = Strategy::avg_cost;
  c.profile_after = path("after.csv");
  c.dump = path("dump.txt");
  c.report = path("report.json");
  auto out = run(Command::transform, c);
  EXPECT_EQ(out.report["num_levels_after"], 4);
  EXPECT_EQ(out.report["total_level_cost_after"], 15);
  EXPECT_EQ(out.report["rows_rewritten"], 1);
  EXPECT_EQ(out.report["max_rewriting_distance_used"], 1);
  EXPECT_EQ(out.report["barriers"], 3);
  EXPECT_EQ(slurp(path("after.csv")), "level,rows,cost\n0,1,1\n1,2,6\n2,2,5\n3,1,3\n");
  EXPECT_NE(slurp(path("dump.txt")).find("\n3 2 rewritten 0.75 1:0.25\n"), std::string::npos);
  EXPECT_EQ(nlohmann::ordered_json::parse(slurp(path("report.json"))), out.report);

  c.strategy = Strategy::none;
  EXPECT_THROW(run(Command::transform, c), std::invalid_argument);
}

TEST_F(CliTest, SolveVerifies) {
  RunConfig c = config();
  c.strategy = Strategy::avg_cost;
  c.tol = 1e-12;
  c.workers = 3;
  c.solution = path("x.txt");
  auto out = run(Command::solve, c);
  EXPECT_EQ(out.exit_code, 0);
  EXPECT_EQ(out.report["barriers"], 3);
  EXPECT_TRUE(out.report["verify"]["pass"].get<bool>());
  EXPECT_EQ(slurp(path("x.txt")), "1\n1\n1\n1\n1\n1\n");
}

TEST_F(CliTest, SolveWithCustomRhs) {
  {
    std::ofstream f(path("b.txt"));
    f << "2\n3\n3\n1\n1\n1\n";
  }
  RunConfig c = config();
  c.rhs = path("b.txt");
  c.strategy = Strategy::manual;
  c.group_size = 3;
  c.solution = path("x.txt");
  EXPECT_EQ(run(Command::solve, c).exit_code, 0);
  // x = 1, 2, 2.5, 1.75, 1, 1.375 by hand
  EXPECT_EQ(slurp(path("x.txt")), "1\n2\n2.5\n1.75\n1\n1.375\n");
}

TEST_F(CliTest, CodegenIsReproducible) {
  RunConfig c = config();
  c.strategy = Strategy::avg_cost;
  c.emit = path("a.c");
  auto first = run(Command::codegen, c);
  c.emit = path("b.c");
  auto second = run(Command::codegen, c);
  const std::string a = slurp(path("a.c"));
  EXPECT_EQ(a, slurp(path("b.c")));
  EXPECT_EQ(first.report["code_size_bytes"], a.size());
  EXPECT_EQ(first.report, second.report);
  EXPECT_NE(a.find("void calculate3(double* x)"), std::string::npos);
  EXPECT_EQ(a.find("void calculate4("), std::string::npos);

  RunConfig none = config();
  none.emit = path("plain.c");
  auto plain = run(Command::codegen, none);
  EXPECT_LT(first.report["code_size_bytes"].get<std::size_t>(), plain.report["code_size_bytes"].get<std::size_t>());

  RunConfig missing = config();
  EXPECT_THROW(run(Command::codegen, missing), std::invalid_argument);
}

TEST_F(CliTest, BadInputsThrow) {
  RunConfig c = config();
  c.matrix = path("nope.mtx");
  EXPECT_ANY_THROW(run(Command::analyze, c));

  {
    std::ofstream f(path("bad.mtx"));
    f << "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n3 1 1\n";
  }
  c.matrix = path("bad.mtx");
  EXPECT_THROW(run(Command::analyze, c), ParseError);

  {
    std::ofstream f(path("nodiag.mtx"));
    f << "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n2 1 1\n";
  }
  c.matrix = path("nodiag.mtx");
  EXPECT_THROW(run(Command::analyze, c), MatrixError);
  c.substitute_diagonal = true;
  EXPECT_EQ(run(Command::analyze, c).report["num_levels_before"], 2);

  RunConfig g = config();
  g.strategy = Strategy::manual;
  g.group_size = 1;
  EXPECT_THROW(run(Command::transform, g), std::invalid_argument);

  RunConfig r = config();
  r.rhs = path("short.txt");
  {
    std::ofstream f(*r.rhs);
    f << "1\n2\n";
  }
  EXPECT_THROW(run(Command::solve, r), ParseError);
}

TEST_F(CliTest, FailedVerificationSetsExitCode) {
  // a fan of 40 rows, then a 100-row chain with ratio 1.5: folding it whole loses the answer
  {
    std::ofstream f(path("chain.mtx"));
    f << "%%MatrixMarket matrix coordinate real general\n141 141 281\n1 1 1\n";
    for (int r = 2; r <= 41; ++r) f << r << " 1 -1\n" << r << ' ' << r << " 1\n";
    for (int r = 42; r <= 141; ++r) f << r << ' ' << r - 1 << " -1.5\n" << r << ' ' << r << " 1\n";
  }
  RunConfig c = config();
  c.matrix = path("chain.mtx");
  c.strategy = Strategy::manual;
  c.group_size = 1000;
  auto out = run(Command::solve, c);
  EXPECT_EQ(out.exit_code, 1);
  EXPECT_FALSE(out.report["verify"]["pass"].get<bool>());

  c.guards.max_rewriting_distance = 5;
  out = run(Command::solve, c);
  EXPECT_EQ(out.exit_code, 0);
  EXPECT_LE(out.report["max_rewriting_distance_used"].get<std::size_t>(), 5u);
}
