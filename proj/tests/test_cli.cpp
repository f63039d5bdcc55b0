#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = GRKNEG_SCRATCH;

struct Result {
  int code;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with `args`, returning its exit code and stdout.
Result run(const std::string& args) {
  fs::create_directories(kScratch);
  const fs::path out = kScratch / "stdout.txt";
  const std::string cmd = std::string("\"") + GRKNEG_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          (kScratch / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

std::string path(const std::string& name) { return "\"" + (kScratch / name).string() + "\""; }

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, ListTasks) {
  const Result r = run("list-tasks");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out), 15u);
  EXPECT_NE(r.out.find("Ion2,ionosphere,Bad,2,351,32,88,no"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("Seed1,seeds,Kama,3,210,7,49,yes"), std::string::npos) << r.out;
}

TEST(Cli, TrainPredictRoundTrip) {
  ASSERT_EQ(run("train --task Iris1 --method grk7 --neg-budget 5 --s 1 --nu 0.1 --out " + path("a.json")).code, 0);
  const Result p = run("predict --model " + path("a.json") + " --data iris");
  ASSERT_EQ(p.code, 0);
  EXPECT_EQ(lines(p.out), 151u);
  EXPECT_EQ(p.out.substr(0, p.out.find('\n')), "index,decision,predicted,label");

  // Unlabelled raw file: the first 3 iris rows without the label column.
  std::ofstream(kScratch / "raw.csv") << "5.1,3.5,1.4,0.2\n4.9,3.0,1.4,0.2\n6.3,3.3,6.0,2.5\n";
  const Result raw = run("predict --model " + path("a.json") + " --data " + path("raw.csv"));
  ASSERT_EQ(raw.code, 0);
  EXPECT_EQ(lines(raw.out), 4u);
  EXPECT_NE(raw.out.find("\n0,"), std::string::npos);
  EXPECT_NE(raw.out.find(",1\n"), std::string::npos);   // setosa rows accepted
  EXPECT_NE(raw.out.find(",-1\n"), std::string::npos);  // virginica row rejected
}

TEST(Cli, FixedSeedGivesIdenticalModelFiles) {
  for (const char* name : {"s1.json", "s2.json"}) {
    ASSERT_EQ(run("--seed 7 train --data sonar --target-class M --method grk7 --neg-budget 10 --s 10 --nu 0.05 "
                  "--out " + path(name))
                  .code,
              0);
  }
  EXPECT_EQ(slurp(kScratch / "s1.json"), slurp(kScratch / "s2.json"));
  ASSERT_EQ(run("--seed 8 train --data sonar --target-class M --method grk7 --neg-budget 10 --s 10 --nu 0.05 "
                "--out " + path("s3.json"))
                .code,
            0);
  EXPECT_NE(slurp(kScratch / "s1.json"), slurp(kScratch / "s3.json"));
}

TEST(Cli, TrainFromUserCsv) {
  std::ofstream f(kScratch / "user.csv");
  for (int i = 0; i < 20; ++i) f << (i % 7) * 0.1 << ',' << (i % 5) * 0.2 << ",in\n";
  for (int i = 0; i < 10; ++i) f << 5 + i << ',' << 5 - i << ",out\n";
  f.close();
  EXPECT_EQ(run("train --data " + path("user.csv") + " --target-class in --method ocsvm --s 1 --nu 0.2 --out " +
                path("user.json"))
                .code,
            0);
  EXPECT_EQ(run("predict --model " + path("user.json") + " --data " + path("user.csv") + " --label-column -1").code,
            0);
}

TEST(Cli, UsageErrors) {
  const std::string out = " --out " + path("never.json");
  EXPECT_EQ(run("train --task Iris1 --method binary-svm --variant 7 --s 1 --c 1" + out).code, 2);
  EXPECT_EQ(run("train --task Iris1 --method grk --variant 12 --s 1 --nu 0.1" + out).code, 2);
  EXPECT_EQ(run("train --task Iris1 --method grk3 --variant 7 --s 1 --nu 0.1" + out).code, 2);
  EXPECT_EQ(run("train --task Iris1 --method svm --s 1 --nu 0.1" + out).code, 2);
  EXPECT_EQ(run("train --task Iris1 --method ocsvm --s 1 --c 0.1" + out).code, 2);
  EXPECT_EQ(run("train --task Iris1 --method ocsvm --s 1" + out).code, 2);
  EXPECT_EQ(run("train --task Iris1 --method ocsvm --auto-cv --s 1" + out).code, 2);
  EXPECT_EQ(run("train --task Iris1 --method ocsvm --s 1 --nu 0.1").code, 2);
  EXPECT_EQ(run("train --task Iris9 --method ocsvm --s 1 --nu 0.1" + out).code, 2);
  EXPECT_EQ(run("train --task Iris1 --method svdd --s 1 --nu 0.1" + out).code, 2);
  EXPECT_EQ(run("train --task Iris1 --method ocsvm --neg-budget 0 --s 1 --nu 0.1" + out).code, 2);
  EXPECT_EQ(run("train --data iris --target-class Iris-foo --method ocsvm --s 1 --nu 0.1" + out).code, 2);
  EXPECT_EQ(run("reproduce --budgets \"\" --out " + path("r")).code, 2);
  EXPECT_EQ(run("reproduce --methods grk7 --budgets 5 --repeats 9 --out " + path("r")).code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_FALSE(fs::exists(kScratch / "never.json"));
}

TEST(Cli, RuntimeFailureExitsOne) {
  std::ofstream(kScratch / "bad.json") << "{}";
  EXPECT_EQ(run("predict --model " + path("bad.json") + " --data iris").code, 1);
  // nu * P < 1 is infeasible for 35 positives.
  EXPECT_EQ(run("evaluate --task Iris1 --method ocsvm --s 1 --nu 0.01").code, 1);
}

TEST(Cli, EvaluatePrintsRecord) {
  const Result r = run("evaluate --task Iris1 --method svm --neg-budget 5 --s 1 --c 10 --repeat 2");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out), 2u);
  EXPECT_EQ(r.out.rfind("method,task,budget,repeat,s,param", 0), 0u);
  EXPECT_NE(r.out.find("\nsvm,Iris1,5,2,1,10,"), std::string::npos) << r.out;
}

TEST(Cli, ReproduceWritesStableOutputs) {
  const std::string args = "reproduce --quiet --methods ocsvm,grk7 --budgets 5 --tasks Iris1,Happ2 --repeats 2 --out ";
  ASSERT_EQ(run(args + path("rep1")).code, 0);
  ASSERT_EQ(run(args + path("rep2")).code, 0);
  for (const char* f : {"results.csv", "summary.csv", "summary.md", "fig1_a.csv", "fig1_b.csv", "fig1_c.csv",
                        "fig1_d.csv", "missing.txt"}) {
    ASSERT_TRUE(fs::exists(kScratch / "rep1" / f)) << f;
    EXPECT_EQ(slurp(kScratch / "rep1" / f), slurp(kScratch / "rep2" / f)) << f;
  }
  EXPECT_EQ(lines(slurp(kScratch / "rep1" / "results.csv")), 9u);
  EXPECT_EQ(slurp(kScratch / "rep1" / "missing.txt"), "");
}
