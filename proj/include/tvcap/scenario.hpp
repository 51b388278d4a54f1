#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace tvcap::cli {

using Json = nlohmann::ordered_json;

// A scenario file merged onto the defaults of its kind, with overrides applied.
// `doc` is the fully materialized tree that gets echoed into the report.
struct Scenario {
  std::string name;
  std::string kind;  // circuit | stability | sheet | fdtd | sweep
  Json doc;
  std::filesystem::path file;
};

// Full default tree for a kind. Objects merge key by key; any other value is
// replaced wholesale by the file.
Json defaults_for(const std::string& kind);

// Parse errors (missing file, bad JSON) raise Errc::parse_error; unknown keys,
// wrong types and bad override paths raise Errc::validation_error.
Scenario load_scenario(const std::filesystem::path& file, const std::vector<std::string>& overrides = {});
Scenario scenario_from_json(const Json& raw, const std::filesystem::path& file,
                            const std::vector<std::string>& overrides = {});

// "a.b.c=value"; value is parsed as JSON, falling back to a plain string.
void apply_override(Json& doc, const std::string& assignment);

// Builds every module spec the scenario refers to and checks its preconditions
// without running anything. Throws tvcap::Error.
void validate_scenario(const Scenario& s);

using MetricValue = std::variant<double, std::string>;

struct Metric {
  std::string name;
  MetricValue value;
};

struct CheckResult {
  std::string name;
  std::string metric;
  std::string condition;
  bool condition_met = false;
  bool expected_fail = false;
  bool passed = false;  // condition_met != expected_fail
  std::string observed;
};

struct Trace {
  std::string file;  // e.g. "trace.csv"
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

struct RunResult {
  std::vector<Metric> metrics;
  std::vector<CheckResult> checks;
  std::vector<Trace> traces;
  std::vector<std::string> notes;  // free text blocks for the report (stability reasons, ...)
  double wall_seconds = 0.0;

  bool all_passed() const;
  const MetricValue* find(const std::string& name) const;
};

RunResult run_scenario(const Scenario& s);

// report.txt, summary.csv and every trace CSV under `dir`.
void write_artifacts(const std::filesystem::path& dir, const Scenario& s, const RunResult& r);

struct ScenarioInfo {
  std::string file;
  std::string name;
  std::string kind;
  std::string description;
};

std::vector<ScenarioInfo> list_scenarios(const std::filesystem::path& dir);
std::filesystem::path default_scenario_dir();

}  // namespace tvcap::cli
