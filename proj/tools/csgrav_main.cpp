// Command-line front end: runs the verification suites from a JSON run
// specification and writes a machine-readable report. Exit codes:
//   0  every check passed
//   1  at least one check failed
//   2  invalid input (flags, spec file, schema)
//   3  internal error
#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include "csgrav/checks.hpp"

namespace {

using csgrav::RunSpec;
using csgrav::SpecError;
using json = nlohmann::json;

struct CommonOpts {
  std::string spec_path;
  std::string out_path;
  std::string csv_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool quiet = false;
  bool timing = false;
};

void emit_error(int code, const std::string& message) {
  json err = {{"error", message}, {"code", code}};
  std::cout << err.dump(2) << "\n";
}

int run_subcommand(const std::string& command, const CommonOpts& opts) {
  RunSpec spec;
  try {
    if (!opts.spec_path.empty()) {
      std::ifstream in(opts.spec_path);
      if (!in) throw SpecError("cannot open spec file: " + opts.spec_path);
      json j = json::parse(in);
      spec = csgrav::reportio::parse_spec(j);
      if (spec.command != command)
        throw SpecError("spec command '" + spec.command + "' does not match subcommand '" +
                        command + "'");
    } else {
      spec = csgrav::checks::default_spec(command);
    }
    if (opts.seed) spec.seed = *opts.seed;
  } catch (const json::exception& e) {
    emit_error(2, std::string("invalid spec JSON: ") + e.what());
    return 2;
  } catch (const SpecError& e) {
    emit_error(2, e.what());
    return 2;
  }

  csgrav::threads::set(opts.threads);
  const auto t0 = std::chrono::steady_clock::now();
  csgrav::checks::SuiteResult result;
  try {
    std::ofstream csv;
    std::ostream* csv_stream = nullptr;
    if (command == "extremize") {
      std::string path = opts.csv_path;
      if (path.empty())
        path = opts.out_path.empty() ? "extremize_history.csv" : opts.out_path + ".csv";
      csv.open(path);
      if (!csv) {
        emit_error(2, "cannot open CSV output: " + path);
        return 2;
      }
      csv_stream = &csv;
    }
    result = csgrav::checks::run_command(spec, csv_stream);
  } catch (const SpecError& e) {
    emit_error(2, e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error(3, std::string("internal error: ") + e.what());
    return 3;
  }

  json report = csgrav::reportio::make_report(spec, result.checks, result.payload,
                                              result.warnings);
  if (opts.timing)
    report["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string text = report.dump(2) + "\n";
  if (!opts.out_path.empty()) {
    std::ofstream out(opts.out_path);
    if (!out) {
      emit_error(2, "cannot open report output: " + opts.out_path);
      return 2;
    }
    out << text;
  } else {
    std::cout << text;
  }

  if (!opts.quiet) {
    for (const auto& c : result.checks)
      std::cerr << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (measured " << c.measured
                << (c.mode == "max" ? " <= " : " >= ") << c.tolerance << ")\n";
    for (const auto& w : result.warnings) std::cerr << "[WARN] " << w << "\n";
  }
  for (const auto& c : result.checks)
    if (!c.pass) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gauge/gravity identity verification suite"};
  app.require_subcommand(1);

  CommonOpts opts;
  const std::vector<std::string> commands = {"verify", "correspond", "chern", "extremize"};
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--spec", opts.spec_path, "JSON run specification");
    sub->add_option("--out", opts.out_path, "report output path (stdout when omitted)");
    sub->add_option("--seed", opts.seed, "seed override");
    sub->add_option("--threads", opts.threads, "worker count (output is identical for any)");
    sub->add_flag("--quiet", opts.quiet, "suppress per-check console lines");
    sub->add_flag("--timing", opts.timing,
                  "include wall time in the report (breaks byte reproducibility)");
    if (name == "extremize")
      sub->add_option("--csv", opts.csv_path, "iteration history CSV path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    emit_error(2, std::string("invalid arguments: ") + e.what());
    return 2;
  }

  for (const std::string& name : commands)
    if (app.get_subcommand(name)->parsed()) return run_subcommand(name, opts);
  emit_error(2, "no subcommand given");
  return 2;
}
