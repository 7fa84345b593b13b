#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

#include "csgrav/core.hpp"

/// Run specifications and machine-readable reports for the CLI. Specs
/// and reports are JSON; every randomized quantity is reproducible from
/// (spec, seed), and the canonical report bytes carry no volatile data
/// unless timing is explicitly requested.
namespace csgrav {

struct SpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunSpec {
  std::string command;  // verify | correspond | chern | extremize
  std::uint64_t seed = 42;
  std::vector<double> signature = {-1.0, 1.0, 1.0};
  int chart_dim = 3;
  std::vector<double> periods = {1.0, 1.0, 1.0};

  struct FieldSpec {
    std::string kind = "trig-random";  // flat | trig-random | perturbed-flat
    int max_frequency = 1;
    double amplitude = 0.3;
    double magnitude = 0.01;  // perturbed-flat only
  } field;

  std::vector<int> grid = {33, 33, 33};
  std::map<std::string, double> tolerances;  // overrides for named checks

  struct Solver {
    int max_iters = 500;
    double step0 = 0.5;
    double tol = 1e-12;
  } solver;

  int sections = 20;       // correspond: number of sampled sections
  int sample_points = 200;  // pointwise checks
  int directions = 50;      // stationarity directions

  double tolerance_or(const std::string& name, double fallback) const {
    auto it = tolerances.find(name);
    return it == tolerances.end() ? fallback : it->second;
  }
};

/// Per-check record. mode "max": pass iff measured <= tolerance;
/// mode "min": pass iff measured >= tolerance (nondegeneracy bounds).
struct CheckResult {
  std::string name;
  std::string anchor;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string mode = "max";
  bool pass = false;

  static CheckResult bounded(std::string name, std::string anchor, double measured,
                             double tolerance) {
    CheckResult c{std::move(name), std::move(anchor), measured, tolerance, "max", false};
    c.pass = measured <= tolerance;
    return c;
  }

  static CheckResult at_least(std::string name, std::string anchor, double measured,
                              double tolerance) {
    CheckResult c{std::move(name), std::move(anchor), measured, tolerance, "min", false};
    c.pass = measured >= tolerance;
    return c;
  }
};

namespace reportio {

using json = nlohmann::json;

inline RunSpec parse_spec(const json& j) {
  if (!j.is_object()) throw SpecError("spec: top level must be an object");
  RunSpec spec;
  if (!j.contains("command") || !j.at("command").is_string())
    throw SpecError("spec: missing string field 'command'");
  spec.command = j.at("command").get<std::string>();
  if (spec.command != "verify" && spec.command != "correspond" && spec.command != "chern" &&
      spec.command != "extremize")
    throw SpecError("spec: unknown command '" + spec.command + "'");

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      throw SpecError("spec: 'seed' must be an unsigned integer");
    spec.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("signature")) {
    spec.signature = j.at("signature").get<std::vector<double>>();
    for (double v : spec.signature)
      if (v != 1.0 && v != -1.0) throw SpecError("spec: signature entries must be +-1");
  }
  if (j.contains("chart")) {
    const json& c = j.at("chart");
    if (c.contains("dim")) spec.chart_dim = c.at("dim").get<int>();
    if (c.contains("periods")) spec.periods = c.at("periods").get<std::vector<double>>();
  }
  if (spec.chart_dim < 3 || spec.chart_dim > 4)
    throw SpecError("spec: chart.dim must be 3 or 4");
  if (static_cast<int>(spec.periods.size()) != spec.chart_dim)
    throw SpecError("spec: chart.periods length must match chart.dim");
  for (double p : spec.periods)
    if (!(p > 0.0)) throw SpecError("spec: chart.periods must be positive");

  if (j.contains("field_spec")) {
    const json& f = j.at("field_spec");
    if (f.contains("kind")) spec.field.kind = f.at("kind").get<std::string>();
    if (spec.field.kind != "flat" && spec.field.kind != "trig-random" &&
        spec.field.kind != "perturbed-flat")
      throw SpecError("spec: field_spec.kind must be flat, trig-random or perturbed-flat");
    if (f.contains("max_frequency")) spec.field.max_frequency = f.at("max_frequency").get<int>();
    if (f.contains("amplitude")) spec.field.amplitude = f.at("amplitude").get<double>();
    if (f.contains("magnitude")) spec.field.magnitude = f.at("magnitude").get<double>();
    if (spec.field.max_frequency < 0) throw SpecError("spec: max_frequency must be >= 0");
  }
  if (j.contains("grid")) {
    spec.grid = j.at("grid").get<std::vector<int>>();
    if (static_cast<int>(spec.grid.size()) != spec.chart_dim)
      throw SpecError("spec: grid length must match chart.dim");
    for (int n : spec.grid)
      if (n < 2) throw SpecError("spec: grid counts must be >= 2");
  } else {
    spec.grid.assign(spec.chart_dim, spec.chart_dim == 3 ? 33 : 9);
  }
  if (j.contains("tolerances")) {
    for (const auto& [key, value] : j.at("tolerances").items()) {
      if (!value.is_number()) throw SpecError("spec: tolerances must be numbers");
      const double tol = value.get<double>();
      if (tol < 0.0) throw SpecError("spec: tolerances must be >= 0");
      spec.tolerances[key] = tol;
    }
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    if (s.contains("max_iters")) spec.solver.max_iters = s.at("max_iters").get<int>();
    if (s.contains("step0")) spec.solver.step0 = s.at("step0").get<double>();
    if (s.contains("tol")) spec.solver.tol = s.at("tol").get<double>();
    if (spec.solver.max_iters < 0 || !(spec.solver.step0 > 0.0))
      throw SpecError("spec: solver.max_iters >= 0 and solver.step0 > 0 required");
  }
  if (j.contains("sections")) spec.sections = j.at("sections").get<int>();
  if (j.contains("sample_points")) spec.sample_points = j.at("sample_points").get<int>();
  if (j.contains("directions")) spec.directions = j.at("directions").get<int>();
  if (spec.sections < 1 || spec.sample_points < 1 || spec.directions < 1)
    throw SpecError("spec: sections, sample_points and directions must be >= 1");
  return spec;
}

inline json spec_to_json(const RunSpec& spec) {
  json j;
  j["command"] = spec.command;
  j["seed"] = spec.seed;
  j["signature"] = spec.signature;
  j["chart"] = {{"dim", spec.chart_dim}, {"periods", spec.periods}};
  j["field_spec"] = {{"kind", spec.field.kind},
                     {"max_frequency", spec.field.max_frequency},
                     {"amplitude", spec.field.amplitude},
                     {"magnitude", spec.field.magnitude}};
  j["grid"] = spec.grid;
  j["tolerances"] = spec.tolerances;
  j["solver"] = {{"max_iters", spec.solver.max_iters},
                 {"step0", spec.solver.step0},
                 {"tol", spec.solver.tol}};
  j["sections"] = spec.sections;
  j["sample_points"] = spec.sample_points;
  j["directions"] = spec.directions;
  return j;
}

inline json checks_to_json(const std::vector<CheckResult>& checks) {
  json arr = json::array();
  for (const CheckResult& c : checks)
    arr.push_back({{"name", c.name},
                   {"anchor", c.anchor},
                   {"measured", c.measured},
                   {"tolerance", c.tolerance},
                   {"mode", c.mode},
                   {"status", c.pass ? "PASS" : "FAIL"}});
  return arr;
}

inline json make_report(const RunSpec& spec, const std::vector<CheckResult>& checks,
                        const json& payload, const std::vector<std::string>& warnings) {
  int pass = 0, fail = 0;
  for (const CheckResult& c : checks) (c.pass ? pass : fail)++;
  json report;
  report["command"] = spec.command;
  report["spec"] = spec_to_json(spec);
  report["environment"] = {{"version", "0.1.0"},
#ifdef CSGRAV_BUILD_ID
                           {"build", CSGRAV_BUILD_ID}};
#else
                           {"build", "dev"}};
#endif
  report["checks"] = checks_to_json(checks);
  report["summary"] = {{"pass", pass}, {"fail", fail}, {"status", fail == 0 ? "PASS" : "FAIL"}};
  if (!warnings.empty()) report["warnings"] = warnings;
  if (!payload.is_null()) report["results"] = payload;
  return report;
}

}  // namespace reportio
}  // namespace csgrav
