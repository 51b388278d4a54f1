#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "tvcap/error.hpp"
#include "tvcap/scenario.hpp"

namespace fs = std::filesystem;
using namespace tvcap;

namespace {

struct Outcome {
  int status = -1;
  std::string output;
};

Outcome tvcap_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + TVCAP_CLI_PATH + "\" " + args + " 2>&1";
  Outcome out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.output.append(buf, got);
  const int raw = pclose(pipe);
  out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tvcap_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("run fig1a") {
  const fs::path out = scratch("fig1a");
  const Outcome r = tvcap_cli("run fig1a --out " + q(out));
  CHECK(r.status == 0);
  CHECK(r.output.find("fig1a: PASS") != std::string::npos);
  CHECK(fs::exists(out / "report.txt"));
  CHECK(fs::exists(out / "summary.csv"));
  CHECK(fs::exists(out / "trace.csv"));
  const std::string report = slurp(out / "report.txt");
  CHECK(report.find("PASS") != std::string::npos);
  CHECK(report.find("rel_rms_error") != std::string::npos);
}

TEST_CASE("missing scenario file") {
  const fs::path out = scratch("missing");
  const Outcome r = tvcap_cli("run does_not_exist.json --out " + q(out));
  CHECK(r.status == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("malformed and invalid files") {
  const fs::path dir = scratch("files");
  fs::create_directories(dir);
  std::ofstream(dir / "broken.json") << "{\"kind\": \"circuit\",";
  CHECK(tvcap_cli("validate " + q(dir / "broken.json")).status == 2);

  std::ofstream(dir / "zero_rl.json") << R"({"kind": "circuit", "circuit": {"target":
      {"type": "lossy-inductance", "L_eq_H": -1e-6, "R_L_ohm": 0.0, "R_C_ohm": 1.0}}})";
  const Outcome z = tvcap_cli("validate " + q(dir / "zero_rl.json"));
  CHECK(z.status == 3);
  CHECK(z.output.find("R_L") != std::string::npos);
  CHECK(z.output.find("divi") != std::string::npos);

  std::ofstream(dir / "unknown.json") << R"({"kind": "circuit", "circuit": {"R_s": 10}})";
  CHECK(tvcap_cli("validate " + q(dir / "unknown.json")).status == 3);

  CHECK(tvcap_cli("validate fig1b --override circuit.target.R_L_ohm=0").status == 3);
  CHECK(tvcap_cli("validate fig1b --override circuit.no_such_key=1").status == 3);
  CHECK(tvcap_cli("frobnicate").status == 2);
}

TEST_CASE("list and validate") {
  const Outcome l = tvcap_cli("list");
  CHECK(l.status == 0);
  std::size_t n = 0;
  std::istringstream lines(l.output);
  for (std::string line; std::getline(lines, line);) n += line.find(".json") != std::string::npos;
  CHECK(n >= 8);
  for (const char* name : {"fig1a", "fig1b", "fig1c", "stability_suite", "fig2_invisible", "fig2_fdtd",
                           "appendixB_no_absorber", "appendixC_power", "appendixA_variants"}) {
    CHECK(l.output.find(name) != std::string::npos);
  }

  const Outcome v = tvcap_cli("validate fig1b");
  CHECK(v.status == 0);
  CHECK(v.output.find("ok") != std::string::npos);
}

TEST_CASE("expected failures pass") {
  const fs::path out = scratch("static");
  const Outcome r = tvcap_cli("run fig2_invisible --override modulation=off --quiet --out " + q(out));
  CHECK(r.status == 0);
  const std::string report = slurp(out / "report.txt");
  CHECK(report.find("expected") != std::string::npos);
}

TEST_CASE("failing checks exit 1") {
  const fs::path out = scratch("strict");
  const Outcome r = tvcap_cli("run fig1c --quiet --override checks=[{\\\"metric\\\":\\\"rel_rms_error\\\",\\\"max\\\":1e-9}] --out " + q(out));
  CHECK(r.status == 1);
  CHECK(slurp(out / "report.txt").find("FAIL") != std::string::npos);
}

TEST_CASE("overrides touch only the named parameter") {
  const fs::path file = cli::default_scenario_dir() / "fig1a.json";
  const cli::Scenario base = cli::load_scenario(file);
  const cli::Scenario changed = cli::load_scenario(file, {"circuit.R_s_ohm=12.5"});
  cli::Json patched = base.doc;
  patched["circuit"]["R_s_ohm"] = 12.5;
  CHECK(changed.doc == patched);
  CHECK(changed.doc != base.doc);
  CHECK_THROWS_AS(cli::load_scenario(file, {"circuit.R_s_ohm"}), Error);
}

TEST_CASE("reruns are byte identical") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  REQUIRE(tvcap_cli("run fig1c --quiet --out " + q(a)).status == 0);
  REQUIRE(tvcap_cli("run fig1c --quiet --out " + q(b)).status == 0);
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
  CHECK_FALSE(slurp(a / "trace.csv").empty());
}
