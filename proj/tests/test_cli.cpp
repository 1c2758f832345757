#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "checks.hpp"
#include "output.hpp"
#include "scenario.hpp"

namespace fs = std::filesystem;
using namespace qtp::cli;

namespace {

const std::string kScalar = R"({
  "particle": {"type": "scalar", "mass": 1.0, "p0": 10.0, "sigma": 1.0,
               "grid": {"min": 5.0, "max": 15.0, "n": 64}},
  "detector": {"kernel": {"type": "exp_decay", "C": 1.0, "a": 0.05, "b": 0.02}},
  "run": {"L": 100.0, "n_t": 128, "output": "toa.csv"}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("qtp_cli_test_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + QTP_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string scenario(const std::string& name) { return std::string(QTP_SCENARIO_DIR) + "/" + name; }

}  // namespace

TEST_CASE("parse_scenario accepts a valid scalar scenario") {
  const Scenario s = parse_scenario(kScalar);
  CHECK(std::holds_alternative<ScalarRun>(s.particle));
  CHECK(s.L == 100.0);
  CHECK(s.n_t == 128);
  CHECK(s.output == "toa.csv");
  const RunOutput out = execute(s);
  CHECK(out.table.rows.size() == 128);
  REQUIRE(out.normalization);
  CHECK(*out.normalization == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("unknown keys are reported together") {
  std::string text = kScalar;
  text.replace(text.find("\"mass\""), 6, "\"zzz\": 1, \"mass\"");
  text.replace(text.find("\"run\""), 5, "\"bogus\": 0, \"run\"");
  try {
    parse_scenario(text);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("particle.zzz") != std::string::npos);
    CHECK(msg.find("bogus") != std::string::npos);
  }
}

TEST_CASE("malformed JSON and missing files are parse errors") {
  CHECK_THROWS_AS(parse_scenario("{\"particle\": "), ParseError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ParseError);
}

TEST_CASE("schema violations") {
  std::string text = kScalar;
  text.replace(text.find("\"exp_decay\""), 11, "\"no_such_kernel\"");
  CHECK_THROWS_AS(parse_scenario(text), SchemaError);
}

TEST_CASE("format_csv writes %.17g rows with LF endings") {
  Table t;
  t.columns = {"t", "P"};
  t.rows = {{0.1, 1.0 / 3.0}, {2.0, -1e-300}};
  const std::string csv = format_csv(t);
  CHECK(csv == "t,P\n0.10000000000000001,0.33333333333333331\n2,-1e-300\n");
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(format_csv(t) == csv);
}

TEST_CASE("sha256_hex") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("run writes a reproducible CSV and a report") {
  TempDir a, b;
  REQUIRE(run_cli("run " + scenario("scalar_expdecay.json") + " --out " + a.path.string()) == 0);
  REQUIRE(run_cli("run " + scenario("scalar_expdecay.json") + " --out " + b.path.string()) == 0);
  const std::string csv = slurp(a.path / "toa.csv");
  CHECK(!csv.empty());
  CHECK(csv == slurp(b.path / "toa.csv"));

  const auto report = nlohmann::json::parse(slurp(a.path / "report.json"));
  CHECK(report["status"] == "ok");
  CHECK(report["exit_code"] == 0);
  REQUIRE(report["outputs"].size() == 1);
  CHECK(report["outputs"][0]["sha256"] == sha256_hex(csv));
}

TEST_CASE("dry run validates without writing results") {
  TempDir d;
  CHECK(run_cli("run " + scenario("scalar_expdecay.json") + " --dry-run --out " + d.path.string()) == 0);
  CHECK(!fs::exists(d.path / "toa.csv"));
}

TEST_CASE("exit codes") {
  TempDir d;
  const fs::path bad_json = d.path / "bad.json";
  const fs::path unknown = d.path / "unknown.json";
  {
    std::ofstream(bad_json) << "{ not json";
    std::string text = kScalar;
    text.replace(text.find("\"mass\""), 6, "\"zzz\": 1, \"mass\"");
    std::ofstream(unknown) << text;
  }
  CHECK(run_cli("run " + bad_json.string() + " --out " + d.path.string()) == 2);
  CHECK(run_cli("run " + unknown.string() + " --out " + d.path.string()) == 3);

  CHECK(run_cli("run " + scenario("scalar_indefinite.json") + " --out " + d.path.string()) == 4);
  const auto report = nlohmann::json::parse(slurp(d.path / "report.json"));
  CHECK(report["error_kind"] == "physics");
  CHECK(report["min_eigenvalue"].get<double>() < 0.0);
  CHECK(!report["witness"].empty());

  CHECK(run_cli("verify no_such_suite") == 2);
}

TEST_CASE("every bundled scenario runs") {
  for (const auto& entry : fs::directory_iterator(QTP_SCENARIO_DIR)) {
    const std::string name = entry.path().filename().string();
    if (name == "scalar_indefinite.json") continue;
    TempDir d;
    CAPTURE(name);
    CHECK(run_cli("run " + entry.path().string() + " --out " + d.path.string()) == 0);
  }
}

TEST_CASE("verify suites pass") {
  for (const auto& suite : qtp::checks::suite_names()) {
    CAPTURE(suite);
    CHECK(run_cli("verify " + suite) == 0);
  }
}
