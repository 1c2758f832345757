#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "checks.hpp"
#include "output.hpp"
#include "qtp/errors.hpp"
#include "qtp/tolerances.hpp"
#include "scenario.hpp"

namespace fs = std::filesystem;
using namespace qtp;
using namespace qtp::cli;

namespace {

enum Exit { kOk = 0, kFail = 1, kParse = 2, kSchema = 3, kPhysics = 4, kNumeric = 5 };

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("QTP_OUT_DIR"); env && *env) return env;
  return ".";
}

void emit(const OutputFile& f) { std::printf("wrote %s (sha256 %s)\n", f.path.c_str(), f.sha256.c_str()); }

OutputFile save(const fs::path& path, const std::string& bytes) {
  write_file(path.string(), bytes);
  return {path.string(), sha256_hex(bytes), bytes.size()};
}

int run_command(const std::string& file, const std::string& out_flag, bool plot, bool dry_run,
                const std::string& cli_profile) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  report.scenario = file;
  report.dry_run = dry_run;
  const fs::path dir = output_dir(out_flag);

  auto fail = [&](int code, const char* kind, const std::string& msg) {
    report.exit_code = code;
    report.error_kind = kind;
    report.error = msg;
    std::fprintf(stderr, "error (%s): %s\n", kind, msg.c_str());
  };

  try {
    Scenario s = load_scenario(file);
    if (!cli_profile.empty()) s.tolerance_profile.clear();
    apply_tolerances(s);
    if (dry_run) {
      report.status = "ok";
      report.exit_code = kOk;
      std::printf("scenario %s is valid\n", file.c_str());
    } else {
      const RunOutput out = execute(s);
      fs::create_directories(dir);
      const std::string csv = format_csv(out.table);
      report.outputs.push_back(save(dir / s.output, csv));
      if (plot) {
        const fs::path svg = (dir / s.output).replace_extension(".svg");
        report.outputs.push_back(save(svg, format_svg(out.table, fs::path(file).filename().string())));
      }
      report.normalization = out.normalization;
      report.warnings = out.warnings;
      report.results = out.scalars;
      report.status = "ok";
      report.exit_code = kOk;
      for (const auto& o : report.outputs) emit(o);
      for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
  } catch (const ParseError& e) {
    fail(kParse, "parse", e.what());
  } catch (const SchemaError& e) {
    fail(kSchema, "schema", e.what());
  } catch (const IndefiniteKernelError& e) {
    fail(kPhysics, "physics", e.what());
    report.min_eigenvalue = e.min_eigenvalue();
    report.witness = e.witness();
  } catch (const PreconditionError& e) {
    fail(kPhysics, "physics", e.what());
  } catch (const NumericError& e) {
    fail(kNumeric, "numeric", e.what());
  } catch (const std::exception& e) {
    fail(kFail, "internal", e.what());
  }

  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    fs::create_directories(dir);
    write_file((dir / "report.json").string(), format_report(report));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: cannot write report: %s\n", e.what());
    if (report.exit_code == kOk) report.exit_code = kFail;
  }
  return report.exit_code;
}

int verify_command(const std::string& suite, bool as_json) {
  std::vector<checks::CheckResult> results;
  try {
    results = checks::run_suite(suite);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kParse;
  }
  bool ok = true;
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    ok = ok && r.pass;
    if (as_json)
      j.push_back({{"check", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
    else
      std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
  }
  if (as_json) std::cout << j.dump(2) << "\n";
  return ok ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtp: time-of-arrival and detection probabilities from detector kernels"};
  app.require_subcommand(1);
  int threads = 0;
  std::string profile;
  app.add_option("--threads", threads, "OpenMP thread count")->check(CLI::PositiveNumber);
  app.add_option("--tolerance-profile", profile, "tolerance profile")->check(CLI::IsMember({"default", "strict"}));

  auto* run = app.add_subcommand("run", "run a scenario file");
  std::string file, out;
  bool plot = false, dry = false;
  run->add_option("file", file, "scenario (JSON)")->required();
  run->add_option("--out", out, "output directory (default: $QTP_OUT_DIR or .)");
  run->add_flag("--plot", plot, "also write an SVG plot");
  run->add_flag("--dry-run", dry, "validate the scenario only");

  auto* verify = app.add_subcommand("verify", "run a built-in verification suite");
  std::string suite;
  bool as_json = false;
  std::string suites;
  for (const auto& n : checks::suite_names()) suites += (suites.empty() ? "" : ", ") + n;
  verify->add_option("suite", suite, "one of: " + suites)->required();
  verify->add_flag("--json", as_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  if (threads > 0) omp_set_num_threads(threads);
  if (!profile.empty()) set_tolerance_profile(profile);

  if (*run) return run_command(file, out, plot, dry, profile);
  return verify_command(suite, as_json);
}
