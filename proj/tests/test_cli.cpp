#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" TTBENCH_PATH "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ttbench_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, SimulateWritesCsv) {
  const fs::path out = scratch("sim");
  ASSERT_EQ(run("simulate --steps 3 --seed 4 --out " + out.string()), 0);
  const std::string traj = slurp(out / "trajectory.csv");
  EXPECT_EQ(traj.substr(0, traj.find('\n')), "t,c,x,y,vx,vy");
  EXPECT_EQ(std::count(traj.begin(), traj.end(), '\n'), 1 + 4 * 4);
  const std::string frames = slurp(out / "frames.csv");
  EXPECT_EQ(std::count(frames.begin(), frames.end(), '\n'), 1 + 3 * 25);
}

TEST(Cli, SeedEnvironmentVariable) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b"), c = scratch("seed_c");
  ASSERT_EQ(run("simulate --steps 2 --out " + a.string(), "TT_SEED=11"), 0);
  ASSERT_EQ(run("simulate --steps 2 --seed 11 --out " + b.string()), 0);
  ASSERT_EQ(run("simulate --steps 2 --out " + c.string(), "TT_SEED=12"), 0);
  EXPECT_EQ(slurp(a / "frames.csv"), slurp(b / "frames.csv"));
  EXPECT_NE(slurp(a / "frames.csv"), slurp(c / "frames.csv"));
  EXPECT_EQ(run("simulate --steps 2 --out " + a.string(), "TT_SEED=abc"), 2);
}

TEST(Cli, BenchmarkWritesOutputs) {
  const fs::path out = scratch("bench");
  ASSERT_EQ(run("benchmark --tracks 1 --steps 2 --variant tt_nonlinear bpf --particles 200 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "steps.csv"));
  EXPECT_TRUE(fs::exists(out / "omat_per_step.csv"));
  EXPECT_TRUE(fs::exists(out / "summary.json"));
}

TEST(Cli, TrackWritesEstimates) {
  const fs::path out = scratch("track");
  ASSERT_EQ(run("track --steps 2 --out " + out.string()), 0);
  const std::string est = slurp(out / "estimates.csv");
  EXPECT_EQ(est.substr(0, est.find('\n')), "variant,t,c,x_est,y_est,x_true,y_true");
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path dir = scratch("badcfg");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"grid": {"rows": 1}})";
  std::ofstream(dir / "broken.json") << "{not json";
  EXPECT_EQ(run("simulate --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()), 2);
  EXPECT_EQ(run("simulate --config " + (dir / "broken.json").string() + " --out " + (dir / "o").string()), 2);
  EXPECT_EQ(run("benchmark --variant nope --out " + (dir / "o").string()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Cli, IoErrorsExitThree) {
  const fs::path dir = scratch("io");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  // A regular file where the output directory should go.
  EXPECT_EQ(run("simulate --steps 1 --out " + (dir / "file" / "sub").string()), 3);
  EXPECT_EQ(run("simulate --config " + (dir / "missing.json").string()), 3);
}
