#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>

#include "lrmc/instance.hpp"
#include "lrmc/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lrmc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Exit status of `lrmc <args>`, stderr discarded.
  static int run(const std::string& args) {
    const std::string cmd = std::string(LRMC_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

std::string fixture(const std::string& name) { return std::string(LRMC_DATA_DIR) + "/" + name; }

}  // namespace

TEST_F(Cli, GenIsDeterministic) {
  ASSERT_EQ(run("gen --K 20 --m 10 --Q0 3 --seed 1 --out " + path("a.json")), 0);
  ASSERT_EQ(run("gen --K 20 --m 10 --Q0 3 --seed 1 --out " + path("b.json")), 0);
  EXPECT_EQ(lrmc::read_file(path("a.json")), lrmc::read_file(path("b.json")));
  const auto inst = lrmc::read_instance(lrmc::read_file(path("a.json")));
  for (const auto& d : inst.destinations()) EXPECT_EQ(d.cached.size(), 10u);
  EXPECT_EQ(run("gen --K 20 --m 20 --Q0 3 --out " + path("c.json")), 2);
}

TEST_F(Cli, SolveFig2AndVerifyDesign) {
  ASSERT_EQ(run("solve " + fixture("fig2.json") + " --out " + path("r.json") + " --design " +
                path("d.json") + " --trace " + path("t.csv")),
            0);
  const auto doc = json::parse(lrmc::read_file(path("r.json")));
  EXPECT_EQ(doc.at("achieved_rank"), 2);
  EXPECT_DOUBLE_EQ(doc.at("rates").at("symmetric_rate").get<double>(), 0.5);
  EXPECT_EQ(doc.at("alignment").at("feasible"), true);
  EXPECT_EQ(run("verify " + fixture("fig2.json") + " " + path("d.json") + " --out " + path("v.json")), 0);
  EXPECT_EQ(json::parse(lrmc::read_file(path("v.json"))).at("alignment").at("feasible"), true);
  EXPECT_TRUE(fs::file_size(path("t.csv")) > 0);
}

TEST_F(Cli, NoCacheNeedsOneUsePerMessage) {
  lrmc::write_file(path("i.json"), lrmc::write_instance(lrmc::random_unicast_instance(3, 0, 1, 1)));
  ASSERT_EQ(run("solve " + path("i.json") + " --out " + path("r.json")), 0);
  EXPECT_EQ(json::parse(lrmc::read_file(path("r.json"))).at("achieved_rank"), 3);
}

TEST_F(Cli, ExitCodes) {
  lrmc::write_file(path("bad.json"), "{\"K\": 2, \"streams\": [1,");
  EXPECT_EQ(run("solve " + path("bad.json")), 2);
  EXPECT_EQ(run("solve " + path("missing.json")), 4);
  EXPECT_EQ(run("solve " + fixture("fig2.json") + " --algorithm lmafit"), 2);
  EXPECT_EQ(run("solve " + fixture("fig2.json") + " --max-rank 1 --out " + path("r.json")), 3);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("solve " + fixture("fig2.json") + " --out /nonexistent/dir/r.json"), 4);
}

TEST_F(Cli, VerifyRejectsBrokenDesign) {
  ASSERT_EQ(run("solve " + fixture("fig2.json") + " --out " + path("r.json") + " --design " + path("d.json")), 0);
  auto design = json::parse(lrmc::read_file(path("d.json")));
  design["precoders"][2][0][0] = design["precoders"][2][0][0].get<double>() + 0.5;
  lrmc::write_file(path("d2.json"), design.dump());
  EXPECT_EQ(run("verify " + fixture("fig2.json") + " " + path("d2.json") + " --out " + path("v.json")), 3);
  EXPECT_EQ(json::parse(lrmc::read_file(path("v.json"))).at("alignment").at("feasible"), false);
}

TEST_F(Cli, BenchZeroIterationsAndDeterminism) {
  ASSERT_EQ(run("bench --K 6 --m 2 --Q0 2 --rank 3 --max-iters 0 --out " + path("b0.csv")), 0);
  const auto csv = lrmc::read_file(path("b0.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const std::string args = "bench --K 8 --m 3 --Q0 2 --rank 5 --max-iters 10 --no-timing --out ";
  ASSERT_EQ(run(args + path("b1.csv")), 0);
  ASSERT_EQ(run(args + path("b2.csv")), 0);
  EXPECT_EQ(lrmc::read_file(path("b1.csv")), lrmc::read_file(path("b2.csv")));
  EXPECT_EQ(run("bench --K 6 --m 2 --Q0 2 --rank 20 --out " + path("b3.csv")), 2);
}

TEST_F(Cli, SweepWritesRowsAndSummary) {
  ASSERT_EQ(run("sweep --K 6 --Q0 1 --sizes 0,4-5 --trials 2 --algorithms rtr,embcg --no-timing --out " +
                path("s.csv")),
            0);
  const auto csv = lrmc::read_file(path("s.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 2 * 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "cache_size,trial,algorithm,achieved_rank,symmetric_rate,converged,iters,elapsed_ms");
  const auto summary = lrmc::read_file(path("s.csv.summary.csv"));
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 1 + 3 * 2);
  EXPECT_EQ(run("sweep --K 6 --sizes 6 --trials 1 --out " + path("x.csv")), 2);
}
