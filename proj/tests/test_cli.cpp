#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "helpers.hpp"
#include "qtraj/io.hpp"

using namespace qtraj;
using namespace qtraj::testing;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(QTRAJ_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("qtraj_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate is byte-identical for the same seed") {
  TempDir dir;
  REQUIRE(run("atom --detection heterodyne --output " + (dir / "het.json")) == 0);
  const std::string common = "simulate --model " + (dir / "het.json") +
                             " --mode posterior --seed 7 --t-final 0.5 --dt 1e-3 --trajectories 20";
  REQUIRE(run(common + " --output " + (dir / "a")) == 0);
  REQUIRE(run(common + " --output " + (dir / "b")) == 0);
  CHECK(slurp(dir / "a/trajectory.csv") == slurp(dir / "b/trajectory.csv"));
  CHECK(slurp(dir / "a/ensemble.csv") == slurp(dir / "b/ensemble.csv"));
  CHECK(slurp(dir / "a/ensemble.csv").rfind("# qtraj version=", 0) == 0);
}

TEST_CASE("atom file round trip equals in-process generation") {
  TempDir dir;
  REQUIRE(run("atom --detection homodyne --phi 1.5707963267948966 --rabi 1.3 --output " +
              (dir / "hom.json")) == 0);
  REQUIRE(run("simulate --model " + (dir / "hom.json") +
              " --mode posterior --seed 11 --t-final 0.3 --dt 1e-3 --initial e1 --output " +
              (dir / "run")) == 0);
  const auto m = homodyne(1.5707963267948966, 1.3);
  CHECK(model_hash(m.description()) == model_hash(load_model_description(dir / "hom.json")));
  const auto traj = simulate_posterior(m, QuantumState(ground()), TimeGrid(0.3, 1e-3), 11);
  const RunMetadata meta{"simulate", model_hash(m.description()), 11, "kraus", 1e-3,
                         "mode=posterior"};
  std::ostringstream expected;
  write_posterior_csv(expected, meta, traj);
  CHECK(slurp(dir / "run/trajectory.csv") == expected.str());
}

TEST_CASE("exit codes") {
  TempDir dir;
  {
    const ModelDescription d = [] {
      ModelDescription x = empty_description(2);
      x.diffusive_ops = {sz()};
      return x;
    }();
    save_model(dir / "dephase.json", d);
  }
  CHECK(run("equilibrium --model " + (dir / "dephase.json")) == 2);
  CHECK(run("simulate --model " + (dir / "dephase.json") + " --t-final 0.1") == 1);  // no seed
  CHECK(run("simulate --model " + (dir / "missing.json") + " --seed 1") == 1);
  CHECK(run("simulate --bogus-flag") == 1);
  CHECK(run("atom --detection heterodyne --rabi 0") == 1);
  CHECK(run("atom --detection sideways") == 1);
  CHECK(run("equilibrium --model " + (dir / "dephase.json") + " --output " + (dir / "eq")) == 2);
  {
    std::ofstream bad(dir / "bad.json");
    bad << R"({"dimension": 2, "hamiltonian": [[0, 1], [0, 0]]})";
  }
  CHECK(run("check --model " + (dir / "bad.json")) == 1);
}

TEST_CASE("check report on the heterodyne model") {
  TempDir dir;
  REQUIRE(run("atom --detection heterodyne --output " + (dir / "het.json")) == 0);
  REQUIRE(run("check --model " + (dir / "het.json") + " --seed 3 --output " + (dir / "c")) == 0);
  const std::string report = slurp(dir / "c/check.txt");
  for (const char* line : {"pure_preserving=true", "obstruction=false",
                           "ellipticity.elliptic=100", "ellipticity.e1=false",
                           "lie_rank_full.e1=true"}) {
    CHECK_MESSAGE(report.find(line) != std::string::npos, line);
  }
}

TEST_CASE("invariant and master commands write their outputs") {
  TempDir dir;
  REQUIRE(run("atom --detection heterodyne --output " + (dir / "het.json")) == 0);
  REQUIRE(run("invariant --model " + (dir / "het.json") +
              " --seed 5 --t-final 2 --dt 1e-3 --burn-in 0.5 --bins-polar 6 --bins-azimuth 8"
              " --output " + (dir / "inv")) == 0);
  const std::string hist = slurp(dir / "inv/histogram.csv");
  CHECK(hist.find("theta_index,phi_index,dwell_time,count") != std::string::npos);
  const std::string ergodic = slurp(dir / "inv/ergodic.txt");
  CHECK(ergodic.find("sigma_z.residual=") != std::string::npos);
  CHECK(ergodic.find("distance=") != std::string::npos);

  REQUIRE(run("master --model " + (dir / "het.json") + " --t-final 1 --dt 0.25 --initial e1 --output " +
              (dir / "m")) == 0);
  std::istringstream in(slurp(dir / "m/master.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2 + 5);
}

}
