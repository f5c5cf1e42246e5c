#include "commands.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dpsc/dataset.hpp"
#include "dpsc/dp.hpp"
#include "dpsc/partition.hpp"

namespace fs = std::filesystem;

namespace dpsc::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpsc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string synth(const std::string& name = "data.csv") {
    const auto r = cli({"synth", "--train-classes", "3", "--test-classes", "2", "--dim", "2",
                        "--min-size", "10", "--max-size", "20", "--seed", "3", "--out", path(name)});
    EXPECT_EQ(r.code, kOk) << r.err;
    return path(name);
  }
  fs::path dir_;
};

TEST_F(CliTest, SynthIsDeterministicWithDisjointLabels) {
  const std::vector<std::string> args{"synth", "--train-classes", "5", "--test-classes", "5",
                                      "--dim", "64", "--seed", "1", "--min-size", "30",
                                      "--max-size", "300", "--out"};
  auto a = args;
  a.push_back(path("a.csv"));
  auto b = args;
  b.push_back(path("b.csv"));
  ASSERT_EQ(cli(a).code, kOk);
  ASSERT_EQ(cli(b).code, kOk);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  const Dataset data = load_dataset(path("a.csv"));
  std::set<std::string> train;
  std::set<std::string> test;
  for (const auto& item : data.items) (item.split == Split::train ? train : test).insert(*item.label);
  for (const auto& l : train) EXPECT_EQ(test.count(l), 0u);
  for (std::size_t s : data.gold(Split::test).cluster_sizes()) {
    EXPECT_GE(s, 30u);
    EXPECT_LE(s, 300u);
  }
}

TEST_F(CliTest, SynthJsonFormat) {
  ASSERT_EQ(cli({"synth", "--out", path("d.json"), "--min-size", "2", "--max-size", "3"}).code, kOk);
  EXPECT_EQ(slurp(path("d.json")).front(), '{');
}

TEST_F(CliTest, RunWritesOutputsDeterministically) {
  const std::string data = synth();
  auto run = [&](const std::string& out) {
    return cli({"run", "--data", data, "--out-dir", path(out), "--variant", "m1", "--chains", "2",
                "--iters", "200", "--seed", "7", "--baseline", "coarse,fine,kmeans,cdp"});
  };
  const auto a = run("a");
  ASSERT_EQ(a.code, kOk) << a.err;
  ASSERT_EQ(run("b").code, kOk);
  for (const char* f : {"prediction.tsv", "chains.csv", "gold.tsv", "baseline_coarse.tsv",
                        "baseline_fine.tsv", "baseline_kmeans.tsv", "baseline_cdp.tsv"}) {
    ASSERT_TRUE(fs::exists(path(std::string("a/") + f))) << f;
    EXPECT_EQ(slurp(path(std::string("a/") + f)), slurp(path(std::string("b/") + f))) << f;
  }
  const std::string log = slurp(path("a/chains.csv"));
  EXPECT_EQ(log.rfind("chain,iteration,joint_log_score\n", 0), 0u);
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 1 + 2 * 200);
  const Partition pred = read_partition(fs::path(path("a/prediction.tsv")));
  EXPECT_TRUE(pred.same_items(read_partition(fs::path(path("a/gold.tsv")))));
}

TEST_F(CliTest, RunValidationListsAllProblems) {
  const std::string data = synth();
  const auto r = cli({"run", "--data", data, "--out-dir", path("o"), "--iters", "0", "--chains",
                      "0", "--variant", "m9", "--baseline", "svm"});
  EXPECT_EQ(r.code, kValidationError);
  EXPECT_EQ(r.err.rfind("ERROR:2:", 0), 0u);
  for (const char* word : {"iter", "chains", "m9", "svm"}) {
    EXPECT_NE(r.err.find(word), std::string::npos) << word << " in " << r.err;
  }
  EXPECT_FALSE(fs::exists(path("o/prediction.tsv")));
}

TEST_F(CliTest, RunRejectsBadThreadCap) {
  const std::string data = synth();
  setenv("DPSC_THREADS", "zero", 1);
  const auto r = cli({"run", "--data", data, "--out-dir", path("o"), "--iters", "10"});
  unsetenv("DPSC_THREADS");
  EXPECT_EQ(r.code, kValidationError);
  EXPECT_NE(r.err.find("DPSC_THREADS"), std::string::npos);
}

TEST_F(CliTest, MissingDataIsValidationError) {
  const auto r = cli({"run", "--data", path("nope.csv"), "--out-dir", path("o")});
  EXPECT_EQ(r.code, kValidationError);
  EXPECT_EQ(cli({}).code, kValidationError);
  EXPECT_EQ(cli({"bogus"}).code, kValidationError);
  EXPECT_EQ(cli({"--help"}).code, kOk);
}

TEST_F(CliTest, ScorePerfectAndFine) {
  {
    std::ofstream g(path("gold.tsv"));
    g << "a\tx\nb\tx\nc\ty\nd\ty\n";
    std::ofstream f(path("fine.tsv"));
    f << "a\t1\nb\t2\nc\t3\nd\t4\n";
  }
  const auto r = cli({"score", "--gold", path("gold.tsv"), "--hyp", path("gold.tsv"), path("fine.tsv")});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::istringstream lines(r.out);
  std::string header;
  std::string perfect;
  std::string fine;
  std::getline(lines, header);
  std::getline(lines, perfect);
  std::getline(lines, fine);
  EXPECT_EQ(header, "hypothesis,RI,P,R,F,CED,NES,VI,NVI,CED_HG");
  EXPECT_EQ(perfect.substr(perfect.find(',')),
            ",1.000000,1.000000,1.000000,1.000000,0,1.000000,0.000000,1.000000,0");
  EXPECT_NE(fine.find(",1.000000,0.000000,0.000000,"), std::string::npos) << fine;

  const auto j = cli({"score", "--gold", path("gold.tsv"), "--hyp", path("fine.tsv"), "--format", "json"});
  ASSERT_EQ(j.code, kOk);
  EXPECT_NE(j.out.find("\"P\": 1.0"), std::string::npos) << j.out;
}

TEST_F(CliTest, ScoreMismatchedItems) {
  {
    std::ofstream g(path("gold.tsv"));
    g << "a\tx\nb\tx\n";
    std::ofstream h(path("hyp.tsv"));
    h << "a\tx\nc\tx\n";
  }
  const auto r = cli({"score", "--gold", path("gold.tsv"), "--hyp", path("hyp.tsv")});
  EXPECT_EQ(r.code, kValidationError);
}

TEST_F(CliTest, DpfitCrpPoolBandCoversEmpirical) {
  Rng rng(2);
  write_partition(fs::path(path("pool.tsv")), crp_sample(2.0, 500, rng));
  const auto r = cli({"dpfit", "--pool", path("pool.tsv"), "--resamples", "200", "--seed", "1"});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "N,dp_mean,dp_lo,dp_hi,emp_mean,emp_lo,emp_hi");
  int rows = 0;
  int covered = 0;
  while (std::getline(lines, line)) {
    double v[7];
    std::istringstream fields(line);
    char comma;
    fields >> v[0];
    for (int i = 1; i < 7; ++i) fields >> comma >> v[i];
    ++rows;
    covered += v[4] >= v[2] && v[4] <= v[3];
  }
  EXPECT_EQ(rows, 10);
  EXPECT_GE(covered, 10 * 95 / 100);
}

TEST_F(CliTest, DpfitSingleClassPool) {
  {
    std::ofstream p(path("pool.tsv"));
    for (int i = 0; i < 50; ++i) p << "i" << i << "\tonly\n";
  }
  const auto r = cli({"dpfit", "--pool", path("pool.tsv"), "--grid", "2,5", "--resamples", "50",
                      "--out", path("curve.csv")});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::istringstream lines(slurp(path("curve.csv")));
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  const double dp_mean = std::stod(line.substr(line.find(',') + 1));
  EXPECT_LT(dp_mean, 1.3);
  EXPECT_EQ(cli({"dpfit"}).code, kValidationError);
  EXPECT_EQ(cli({"dpfit", "--pool", path("pool.tsv"), "--grid", "x"}).code, kValidationError);
}

TEST(DpscBinary, ExitCodes) {
  const std::string exe = DPSC_EXE;
  EXPECT_EQ(std::system(("\"" + exe + "\" --help > /dev/null").c_str()), 0);
  const int status = std::system(("\"" + exe + "\" run --data /nonexistent --out-dir /tmp/x 2> /dev/null").c_str());
  EXPECT_EQ(WEXITSTATUS(status), kValidationError);
}

}  // namespace
}  // namespace dpsc::cli
