#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gpwells/asymptotics.hpp"
#include "gpwells/field_io.hpp"

namespace fs = std::filesystem;
using namespace gpwells;

namespace {

const fs::path kWork = fs::temp_directory_path() / "gpwells_cli_test";

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Run {
  int status;
  std::string out, err;
};

Run cli(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path out = kWork / "stdout.txt", err = kWork / "stderr.txt";
  const std::string cmd = std::string(GPWELLS_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

std::string potential(const std::string& name) { return std::string(GPWELLS_POTENTIALS) + "/" + name; }

}  // namespace

TEST_CASE("potential-info on two disks") {
  const Run r = cli("potential-info --potential " + potential("two_disks.txt"));
  CHECK(r.status == 0);
  CHECK(r.out.find("R = 1\n") != std::string::npos);
  CHECK(r.out.find("Lambda = {0}") != std::string::npos);
}

TEST_CASE("failures produce a machine-readable error line and a nonzero exit") {
  Run r = cli("solve --potential " + (kWork / "missing.txt").string() + " --a 1");
  CHECK(r.status != 0);
  CHECK(r.err.rfind("error: kind=configuration message=\"", 0) == 0);
  r = cli("solve --potential " + potential("single_disk.txt") + " --a frac:1.5");
  CHECK(r.status != 0);
  CHECK(r.err.find("kind=configuration") != std::string::npos);
  r = cli("solve --potential " + potential("single_disk.txt") + " --a 1 --grid-n 32");
  CHECK(r.status != 0);
  CHECK(r.err.find("kind=resolution") != std::string::npos);
  r = cli("sweep --potential " + potential("single_disk.txt") + " --a-list 3,2 --grid-L 3");
  CHECK(r.status != 0);
  r = cli("");
  CHECK(r.status != 0);
  CHECK(r.err.find("error: kind=usage") != std::string::npos);
}

TEST_CASE("townes writes a reloadable profile and the identity report") {
  const fs::path dir = kWork / "townes";
  const Run r = cli("townes --out " + dir.string());
  CHECK(r.status == 0);
  const TownesProfile p = load_profile((dir / "townes_profile.txt").string());
  CHECK(p.a_star == doctest::Approx(11.7008965245).epsilon(1e-9));
  CHECK(slurp(dir / "townes_identities.txt").find("a_star = ") != std::string::npos);
}

TEST_CASE("solve writes a summary and a reloadable field") {
  const fs::path dir = kWork / "solve";
  const Run r = cli("solve --potential " + potential("single_disk.txt") + " --a frac:0.9 --grid-L 3 --out " +
                    dir.string());
  CHECK(r.status == 0);
  const std::string summary = slurp(dir / "ground_state.txt");
  CHECK(summary.find("converged = true") != std::string::npos);
  const FieldD u = load_field((dir / "ground_state.gpf").string());
  CHECK(std::abs(mass(u) - 1.0) < 1e-12);
}

TEST_CASE("sweep reruns are byte-identical and every artifact reloads") {
  const std::string args = "sweep --potential " + potential("single_disk.txt") +
                           " --a-list frac:0.5,frac:0.9,frac:0.99 --grid-L 3 --out ";
  const fs::path d1 = kWork / "sweep1", d2 = kWork / "sweep2";
  REQUIRE(cli(args + d1.string()).status == 0);
  REQUIRE(cli(args + d2.string()).status == 0);
  const std::string csv = slurp(d1 / "sweep.csv");
  CHECK(!csv.empty());
  CHECK(csv == slurp(d2 / "sweep.csv"));
  const auto recs = read_sweep_csv((d1 / "sweep.csv").string());
  REQUIRE(recs.size() == 3);
  for (int i = 0; i < 3; ++i) {
    const FieldD u = load_field((d1 / ("record_00" + std::to_string(i) + ".gpf")).string());
    CHECK(encode_field(u) == slurp(d2 / ("record_00" + std::to_string(i) + ".gpf")));
  }
  for (const char* svg : {"energy_ratio.svg", "eps_ratio.svg", "zbar.svg"}) {
    const std::string s = slurp(d1 / svg);
    CHECK(s.rfind("<svg", 0) == 0);
    CHECK(s.find("</svg>") != std::string::npos);
  }
}

TEST_CASE("cold parallel sweep matches the sequential cold sweep") {
  const std::string args = "sweep --cold --potential " + potential("single_disk.txt") +
                           " --a-list frac:0.3,frac:0.6,frac:0.8 --grid-L 3 --out ";
  const fs::path d1 = kWork / "cold1", d2 = kWork / "cold3";
  REQUIRE(cli("--help").status == 0);
  REQUIRE(std::system(("GPWELLS_THREADS=1 " + std::string(GPWELLS_CLI) + " " + args + d1.string() + " > /dev/null").c_str()) == 0);
  REQUIRE(std::system(("GPWELLS_THREADS=3 " + std::string(GPWELLS_CLI) + " " + args + d2.string() + " > /dev/null").c_str()) == 0);
  CHECK(slurp(d1 / "sweep.csv") == slurp(d2 / "sweep.csv"));
}

TEST_CASE("verify runs a selected criterion") {
  const Run r = cli("verify --criteria 1");
  CHECK(r.status == 0);
  CHECK(r.out.find("criterion 1 [PASS]") != std::string::npos);
}
