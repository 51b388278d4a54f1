#include "tvcap/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "plan.hpp"
#include "scenario_internal.hpp"
#include "tvcap/error.hpp"

namespace tvcap::cli {

namespace {

const char* const kKinds[] = {"circuit", "stability", "sheet", "fdtd", "sweep"};

bool known_kind(const std::string& k) {
  return std::any_of(std::begin(kKinds), std::end(kKinds), [&](const char* x) { return k == x; });
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool is_index(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

Json defaults_for(const std::string& kind) {
  require(known_kind(kind), Errc::validation_error,
          "kind must be one of circuit, stability, sheet, fdtd, sweep (got '" + kind + "')");
  Json d{{"name", ""},
         {"kind", kind},
         {"description", ""},
         {"checks", Json::array()},
         {"outputs", {{"traces", true}, {"trace_stride", nullptr}}}};
  if (kind == "circuit") {
    d["circuit"] = plan::circuit_block_defaults();
  } else if (kind == "stability") {
    d["stability"] = plan::stability_block_defaults();
  } else if (kind == "sheet") {
    d["sheet"] = plan::sheet_block_defaults();
    d["modulation"] = "on";
    d["t_end_periods"] = nullptr;
    d["settle_periods"] = 2;
    d["compare_variants"] = false;
  } else if (kind == "fdtd") {
    d["sheet"] = plan::sheet_block_defaults();
    d["sheet"]["variant"] = "two-dielectric-slabs";
    d["fdtd"] = plan::fdtd_block_defaults();
    d["modulation"] = "on";
    d["t_end_periods"] = nullptr;
    d["settle_periods"] = 10;
  } else {
    d["base"] = nullptr;
    d["parameter"] = "";
    d["values"] = Json::array();
  }
  return d;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, Errc::validation_error,
          "override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  require(key != "kind", Errc::validation_error, "the scenario kind cannot be overridden");

  Json* node = &doc;
  const std::vector<std::string> parts = split_path(key);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::string& part = parts[k];
    Json* next = nullptr;
    if (node->is_object()) {
      const auto it = node->find(part);
      if (it != node->end()) next = &*it;
    } else if (node->is_array() && is_index(part)) {
      const std::size_t idx = std::stoul(part);
      if (idx < node->size()) next = &(*node)[idx];
    }
    require(next != nullptr, Errc::validation_error, "override key '" + key + "' does not name a scenario parameter");
    node = next;
  }
  *node = value;
}

Scenario scenario_from_json(const Json& raw, const std::filesystem::path& file,
                            const std::vector<std::string>& overrides) {
  require(raw.is_object(), Errc::validation_error, "scenario must be a JSON object");
  const auto kind_it = raw.find("kind");
  require(kind_it != raw.end() && kind_it->is_string(), Errc::validation_error, "scenario needs a string 'kind'");
  const std::string kind = kind_it->get<std::string>();
  Json doc = plan::merged(defaults_for(kind), raw, "");
  if (doc["name"].get<std::string>().empty()) doc["name"] = file.stem().string();
  for (const std::string& o : overrides) apply_override(doc, o);
  require(doc["name"].is_string(), Errc::validation_error, "name must be a string");
  return Scenario{doc["name"].get<std::string>(), kind, std::move(doc), file};
}

Scenario load_scenario(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  std::ifstream in(file);
  require(static_cast<bool>(in), Errc::parse_error, "cannot open scenario file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Json raw;
  try {
    raw = Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    fail(Errc::parse_error, file.string() + ": " + e.what());
  }
  return scenario_from_json(raw, file, overrides);
}

namespace detail {

std::vector<Json> parsed_checks(const Scenario& s) {
  const Json& checks = s.doc.at("checks");
  require(checks.is_array(), Errc::validation_error, "checks must be an array");
  std::vector<Json> out;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    const std::string w = "checks." + std::to_string(k);
    Json c = plan::merged(plan::check_defaults(), checks[k], w);
    require(!plan::text(c, "metric", w).empty(), Errc::validation_error, w + ".metric must not be empty");
    const bool has_bound = !c["max"].is_null() || !c["min"].is_null() || !c["equals"].is_null() ||
                           !c["target"].is_null() || !c["monotone"].is_null();
    require(has_bound, Errc::validation_error, w + " needs one of max, min, equals, target or monotone");
    if (!c["target"].is_null()) {
      require(!c["tol"].is_null() || !c["rel_tol"].is_null(), Errc::validation_error,
              w + ": target needs tol or rel_tol");
    }
    for (const char* key : {"max", "min", "target", "tol", "rel_tol"}) {
      require(c[key].is_null() || c[key].is_number(), Errc::validation_error, w + "." + key + " must be a number");
    }
    if (!c["monotone"].is_null()) {
      const std::string m = plan::text(c, "monotone", w);
      require(m == "increasing" || m == "decreasing", Errc::validation_error,
              w + ".monotone must be 'increasing' or 'decreasing'");
      require(s.kind == "sweep", Errc::validation_error, w + ": monotone checks need a sweep scenario");
    }
    require(c["expect_fail_if"].is_null() || c["expect_fail_if"].is_object(), Errc::validation_error,
            w + ".expect_fail_if must be an object of parameter paths and values");
    if (c["name"].get<std::string>().empty()) c["name"] = c["metric"];
    out.push_back(std::move(c));
  }
  return out;
}

Scenario sweep_base(const Scenario& s) {
  const Json& base = s.doc.at("base");
  if (base.is_string()) {
    const std::filesystem::path p = s.file.parent_path() / base.get<std::string>();
    return load_scenario(p);
  }
  require(base.is_object(), Errc::validation_error, "sweep base must be a file name or an inline scenario");
  return scenario_from_json(base, s.file, {});
}

std::vector<Scenario> sweep_members(const Scenario& s) {
  const Scenario base = sweep_base(s);
  require(base.kind != "sweep", Errc::validation_error, "a sweep cannot sweep another sweep");
  const std::string param = plan::text(s.doc, "parameter", "");
  require(!param.empty(), Errc::validation_error, "sweep needs a parameter path");
  const Json& values = s.doc.at("values");
  require(values.is_array() && !values.empty(), Errc::validation_error, "sweep needs a non-empty values array");
  std::vector<Scenario> out;
  for (const Json& v : values) {
    Scenario m = base;
    apply_override(m.doc, param + "=" + v.dump());
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace detail

void validate_scenario(const Scenario& s) {
  const Json& d = s.doc;
  require(d.at("outputs").at("traces").is_boolean(), Errc::validation_error, "outputs.traces must be true or false");
  const Json& stride = d.at("outputs").at("trace_stride");
  require(stride.is_null() || (stride.is_number_integer() && stride.get<long long>() >= 1), Errc::validation_error,
          "outputs.trace_stride must be a positive integer");
  detail::parsed_checks(s);

  if (s.kind == "circuit") {
    plan::validate(plan::circuit_plan(d.at("circuit"), "circuit"));
  } else if (s.kind == "stability") {
    const plan::StabilityPlan p = plan::stability_plan(d.at("stability"), "stability");
    require(!p.cases.empty() || !p.transients.empty(), Errc::validation_error,
            "stability scenario needs at least one case or transient");
  } else if (s.kind == "sheet" || s.kind == "fdtd") {
    const SheetSpec spec = plan::sheet_spec(d.at("sheet"), "sheet");
    const bool on = plan::modulation_flag(d);
    const std::optional<double> periods = plan::optional_number(d, "t_end_periods", "");
    plan::count(d, "settle_periods", "");
    double stop = sheet_stop_time(spec);
    if (s.kind == "fdtd") {
      require(spec.variant == SheetVariant::two_dielectric_slabs, Errc::validation_error,
              "fdtd scenarios model the two-dielectric-slabs variant");
      stop = fdtd_stop_time(spec, plan::fdtd_options(d.at("fdtd"), "fdtd"));
    } else {
      plan::flag(d, "compare_variants", "");
    }
    if (periods) {
      require(*periods > 0.0, Errc::validation_error, "t_end_periods must be positive");
      if (on) {
        require(*periods * spec.source.period() <= stop * (1.0 + 1e-12), Errc::validation_error,
                "t_end_periods runs past 90% of the C_R zero crossing (" +
                    std::to_string(stop / spec.source.period()) + " periods allowed)");
      }
    }
  } else {
    for (const Scenario& m : detail::sweep_members(s)) validate_scenario(m);
  }
}

std::filesystem::path default_scenario_dir() {
#ifdef TVCAP_SCENARIO_DIR
  return TVCAP_SCENARIO_DIR;
#else
  return "scenarios";
#endif
}

std::vector<ScenarioInfo> list_scenarios(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), Errc::io_error, "scenario directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json" && e.path().filename() != "schema.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ScenarioInfo> out;
  for (const auto& f : files) {
    const Scenario s = load_scenario(f);
    out.push_back({f.filename().string(), s.name, s.kind, s.doc.at("description").get<std::string>()});
  }
  return out;
}

}  // namespace tvcap::cli
