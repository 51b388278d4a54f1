// tvcap: run, list and validate bundled scenarios.
//
// exit codes: 0 ok, 1 a declared check failed, 2 parse error, 3 validation error

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tvcap/csv.hpp"
#include "tvcap/error.hpp"
#include "tvcap/scenario.hpp"

namespace fs = std::filesystem;
using namespace tvcap;

namespace {

enum Exit : int { ok = 0, check_failure = 1, parse_failure = 2, invalid = 3 };

int exit_for(const Error& e) { return e.code() == Errc::parse_error ? parse_failure : invalid; }

// A bare name like "fig1a" resolves to <scenario dir>/fig1a.json when it is not a file itself.
fs::path resolve(const std::string& arg, const fs::path& dir) {
  const fs::path p(arg);
  if (fs::exists(p)) return p;
  if (!p.has_parent_path()) {
    fs::path candidate = dir / p;
    if (!candidate.has_extension()) candidate += ".json";
    if (fs::exists(candidate)) return candidate;
  }
  return p;
}

std::string show(const cli::MetricValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return csv::format_double(*d);
  return std::get<std::string>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-varying capacitor emulation scenarios"};
  app.require_subcommand(1);

  std::string file;
  std::string out_dir;
  std::vector<std::string> overrides;
  bool quiet = false;
  std::string scenario_dir = cli::default_scenario_dir().string();

  auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
  run->add_option("scenario", file, "Scenario file or bundled scenario name")->required();
  run->add_option("--out", out_dir, "Output directory (default runs/<name>)");
  run->add_option("--override", overrides, "Replace a parameter: dotted.path=value (repeatable)");
  run->add_flag("--quiet", quiet, "Only print the final verdict");
  run->add_option("--scenario-dir", scenario_dir, "Where bundled scenario names are looked up");

  auto* list = app.add_subcommand("list", "List bundled scenarios");
  list->add_option("--scenario-dir", scenario_dir, "Scenario directory");

  auto* validate = app.add_subcommand("validate", "Check a scenario without running it");
  validate->add_option("scenario", file, "Scenario file or bundled scenario name")->required();
  validate->add_option("--override", overrides, "Replace a parameter: dotted.path=value (repeatable)");
  validate->add_option("--scenario-dir", scenario_dir, "Where bundled scenario names are looked up");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : parse_failure;
  }

  try {
    if (*list) {
      const auto infos = cli::list_scenarios(scenario_dir);
      for (const auto& s : infos) {
        std::cout << std::left << std::setw(28) << s.file << std::setw(10) << s.kind << s.description << '\n';
      }
      std::cout << infos.size() << " scenarios in " << scenario_dir << '\n';
      return ok;
    }

    const cli::Scenario s = cli::load_scenario(resolve(file, scenario_dir), overrides);
    if (*validate) {
      cli::validate_scenario(s);
      std::cout << s.file.string() << ": ok (" << s.kind << ")\n";
      return ok;
    }

    const cli::RunResult r = cli::run_scenario(s);
    const fs::path dir = out_dir.empty() ? fs::path("runs") / s.name : fs::path(out_dir);
    cli::write_artifacts(dir, s, r);
    if (!quiet) {
      for (const auto& m : r.metrics) std::cout << "  " << m.name << " = " << show(m.value) << '\n';
      for (const auto& c : r.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.condition << " (observed " << c.observed
                  << ")" << (c.expected_fail ? " [expected to fail]" : "") << '\n';
      }
    }
    std::cout << s.name << ": " << (r.all_passed() ? "PASS" : "FAIL") << " (" << r.checks.size() << " checks, "
              << std::fixed << std::setprecision(2) << r.wall_seconds << " s) -> " << dir.string() << '\n';
    return r.all_passed() ? ok : check_failure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_for(e);
  }
}
