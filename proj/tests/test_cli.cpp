#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sparsevar/app/csv.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SPARSEVAR_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sparsevar_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("exit codes distinguish usage, data and success") {
    const fs::path dir = scratch("codes");
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("fit --method ols --input x.csv") == 1);
    CHECK(run("fit --input " + (dir / "missing.csv").string()) == 2);
    sparsevar::app::write_file((dir / "ragged.csv").string(), "t,a,b\n1,2\n");
    CHECK(run("fit --method ls --lags 1 --input " + (dir / "ragged.csv").string()) == 2);
    sparsevar::app::write_file((dir / "bad.json").string(), "{\"T\": -4}");
    CHECK(run("bench --config " + (dir / "bad.json").string()) == 1);

    const auto sim = (dir / "sim.csv").string();
    CHECK(run("simulate --seed 3 --length 60 --out " + sim) == 0);
    CHECK(run("fit --method ls --lags 2 --input " + sim + " --out " + (dir / "fit.json").string()) == 0);
    CHECK(run("irf --fit " + (dir / "fit.json").string() + " --horizon 5 --out " + (dir / "girf.csv").string()) == 0);
    CHECK(slurp(dir / "girf.csv").rfind("impulse,response,horizon,value,lower,upper\n", 0) == 0);
  }

  TEST_CASE("numerical failures exit with 3") {
    const fs::path dir = scratch("numeric");
    // Two identical columns make the least squares Gram matrix singular.
    std::ostringstream csv;
    csv << "t,a,b\n";
    for (int t = 1; t <= 30; ++t) csv << t << "," << std::sin(t * 0.7) << "," << std::sin(t * 0.7) << "\n";
    sparsevar::app::write_file((dir / "dup.csv").string(), csv.str());
    CHECK(run("fit --method ls --lags 1 --input " + (dir / "dup.csv").string()) == 3);
  }

  TEST_CASE("simulate is byte-reproducible") {
    const fs::path dir = scratch("repro");
    CHECK(run("simulate --seed 11 --length 40 --out " + (dir / "a.csv").string()) == 0);
    CHECK(run("simulate --seed 11 --length 40 --out " + (dir / "b.csv").string()) == 0);
    CHECK(run("simulate --seed 12 --length 40 --out " + (dir / "c.csv").string()) == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.csv") != slurp(dir / "c.csv"));
  }
}
