#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

#ifndef WPCN_CLI_PATH
#error "WPCN_CLI_PATH must point at the wpcn executable"
#endif

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WPCN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("wpcn_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("exit codes") {
  TempDir tmp;
  CHECK(run_cli("show-config --preset baseline") == 0);
  CHECK(run_cli("") != 0);
  CHECK(run_cli("analyze") == 2);
  CHECK(run_cli("analyze --preset nope") == 2);
  CHECK(run_cli("simulate --preset small --slots 0 --out " + (tmp / "x.csv")) == 2);
  CHECK(run_cli("oracle --preset access-sweep --out " + (tmp / "x.csv")) == 3);

  {
    std::ofstream bad(tmp / "bad.ini");
    bad << "[network]\ncapacity = 1\n[group a]\ncount = 2\nharvest_units = 1\n";
  }
  CHECK(run_cli("analyze --config " + (tmp / "bad.ini")) == 2);
}

TEST_CASE("simulate writes the result and side files, reproducibly") {
  TempDir tmp;
  const std::string args = "simulate --preset small --slots 20000 --seed 3 --out ";
  REQUIRE(run_cli(args + (tmp / "a.csv")) == 0);
  REQUIRE(run_cli(args + (tmp / "b.csv")) == 0);
  for (const char* tag : {"", ".eda", ".flatness", ".tally"}) {
    CAPTURE(tag);
    const auto a = slurp(tmp / (std::string("a") + tag + ".csv"));
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(tmp / (std::string("b") + tag + ".csv")));
  }
  REQUIRE(run_cli("simulate --preset small --slots 20000 --seed 4 --out " + (tmp / "c.csv")) == 0);
  CHECK(slurp(tmp / "a.csv") != slurp(tmp / "c.csv"));
}

TEST_CASE("config files and presets are interchangeable") {
  TempDir tmp;
  const std::string cfg = tmp / "f8.ini";
  REQUIRE(std::system((std::string(WPCN_CLI_PATH) + " show-config --preset access-sweep > " + cfg).c_str()) == 0);
  REQUIRE(run_cli("analyze --config " + cfg + " --out " + (tmp / "a.csv")) == 0);
  REQUIRE(run_cli("analyze --preset access-sweep --out " + (tmp / "b.csv")) == 0);
  CHECK(slurp(tmp / "a.csv") == slurp(tmp / "b.csv"));
  CHECK(run_cli("analyze --preset access-sweep --config " + cfg) != 0);
}

TEST_CASE("oracle and compare produce their side files") {
  TempDir tmp;
  REQUIRE(run_cli("oracle --preset small --out " + (tmp / "o.csv")) == 0);
  CHECK(slurp(tmp / "o.csv").find("small,oracle,2,0.3000000000,4,0.230896892897") != std::string::npos);
  CHECK(fs::exists(tmp / "o.conditionals.csv"));
  REQUIRE(run_cli("compare --preset small --slots 20000 --out " + (tmp / "c.csv")) == 0);
  CHECK(fs::exists(tmp / "c.errors.csv"));
  CHECK(fs::exists(tmp / "c.summary.csv"));
}
