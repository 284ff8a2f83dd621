#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "chainscan/bench.hpp"

namespace {

struct Run {
  int status;
  std::string out;
};

Run run_with_env(const std::string& env, const std::string& args) {
  const std::string cmd = env + " " + CHAINSCAN_CLI_PATH + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, {}};
  std::string out;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

Run run(const std::string& args) { return run_with_env("", args); }

int lines(const std::string& s) {
  int count = 0;
  for (char c : s) count += c == '\n';
  return count;
}

TEST(Cli, ChainedCellValidates) {
  const auto r = run("--algo chained --dtype i32 --n 1048576 --op add --runs 3 --workers 2");
  EXPECT_EQ(r.status, 0);
  ASSERT_EQ(lines(r.out), 2);
  EXPECT_NE(r.out.find("chained,i32,add,1048576,2,32,8,32,3,"), std::string::npos);
  EXPECT_NE(r.out.find(",true,false\n"), std::string::npos);
}

TEST(Cli, EmptySequentialCell) {
  const auto r = run("--algo sequential --n 0 --format json");
  EXPECT_EQ(r.status, 0);
  const auto records = chainscan::bench::records_from_json(r.out);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].n, 0u);
  EXPECT_TRUE(records[0].validated);
}

TEST(Cli, CrossProductOfCells) {
  const auto r = run("--algo matrix --algo blelloch --dtype i64 --dtype f32 --n 1000 --n 4096 --runs 1");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(lines(r.out), 9);
}

TEST(Cli, SameSeedSameValidationOutcome) {
  const auto a = run("--algo chained --dtype f32 --n 100000 --seed 5 --runs 1 --workers 3");
  const auto b = run("--algo chained --dtype f32 --n 100000 --seed 5 --runs 1 --workers 3");
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.status, b.status);
}

TEST(Cli, WorkersFromEnvironment) {
  const auto r = run_with_env("CHAINSCAN_WORKERS=5", "--n 5000 --runs 1 --format json");
  EXPECT_EQ(r.status, 0);
  const auto records = chainscan::bench::records_from_json(r.out);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].workers, 5u);
  const auto flag = run_with_env("CHAINSCAN_WORKERS=2", "--n 5000 --runs 1 --workers 3 --format json");
  EXPECT_EQ(chainscan::bench::records_from_json(flag.out).at(0).workers, 3u);
}

TEST(Cli, InjectedSlotFaultFailsValidation) {
#ifndef CHAINSCAN_FAULT_INJECTION
  GTEST_SKIP() << "built without fault injection";
#endif
  const auto r = run("--algo chained --dtype i32 --n 1000000 --runs 1 --workers 2 --inject-slot-fault 0");
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(lines(r.out), 1);  // header only, the failed record is withheld
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("--algo quicksort").status, 2);
  EXPECT_EQ(run("--dtype u8").status, 2);
  EXPECT_EQ(run("--n 10 --n-preset paper").status, 2);
  EXPECT_EQ(run("--n-preset huge").status, 2);
  EXPECT_EQ(run("--workers 0 --n 10").status, 2);
  EXPECT_EQ(run("--warp-width 3 --n 10").status, 2);
  EXPECT_EQ(run("--format xml --n 10").status, 2);
  EXPECT_EQ(run("--bogus").status, 2);
  EXPECT_EQ(run("simulate --blocks 8 --resident 2 --policy cyclic:3").status, 2);
  EXPECT_EQ(run("simulate --blocks 8 --resident 2").status, 2);
}

TEST(Cli, UnwritableOutputIsIoError) {
  EXPECT_EQ(run("--n 100 --runs 1 --output /nonexistent-dir/out.csv").status, 3);
}

TEST(Cli, OutputFile) {
  const auto path = std::filesystem::temp_directory_path() / "chainscan_cli_test.csv";
  EXPECT_EQ(run("--n 100 --runs 1 --output " + path.string()).status, 0);
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(lines(text.str()), 2);
  EXPECT_EQ(text.str().substr(0, text.str().find('\n')), chainscan::bench::kCsvHeader);
  std::filesystem::remove(path);
}

TEST(Cli, SimulateCyclicNeverDeadlocks) {
  const auto r = run("simulate --blocks 64 --resident 4 --policy cyclic:4 --seeds 1000");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("deadlock_fraction=0.000\n"), std::string::npos);
  EXPECT_EQ(r.out.find("witness_seed"), std::string::npos);
}

TEST(Cli, SimulateFullResidency) {
  const auto r = run("simulate --blocks 4 --resident 4 --policy one-to-one --seeds 100");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("deadlock_fraction=0.000\n"), std::string::npos);
}

TEST(Cli, SimulateOneToOnePrintsVerifiedWitness) {
  const auto r = run("simulate --blocks 64 --resident 4 --policy one-to-one --seeds 1000");
  EXPECT_EQ(r.status, 0);
  const auto at = r.out.find("deadlock_fraction=");
  ASSERT_NE(at, std::string::npos);
  EXPECT_GT(std::stod(r.out.substr(at + 18)), 0.99);
  EXPECT_NE(r.out.find("verified=true"), std::string::npos);
  EXPECT_NE(r.out.find("event=block"), std::string::npos);
}

}  // namespace
