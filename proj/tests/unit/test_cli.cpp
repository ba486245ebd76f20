#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fdspde/cli.hpp"

using namespace fdspde;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / "fdspde_cli" / name;
  fs::remove_all(d);
  return d;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("config merge is strict") {
  const auto base = default_cli_config();
  CHECK_THROWS(merge_cli_config(base, {{"nosuch", {{"a", 1}}}}));
  CHECK_THROWS(merge_cli_config(base, {{"grid", {{"nosuch", 1}}}}));
  const auto m = merge_cli_config(base, {{"grid", {{"n", 32}}}});
  CHECK(m["grid"]["n"] == 32);
  CHECK(m["grid"]["c"] == base["grid"]["c"]);
}

TEST_CASE("converge writes a report with provenance") {
  const auto dir = fresh_dir("converge");
  const auto r = cli({"converge", "--levels", "4,8", "--ref", "16", "--plan-horizon", "0.0625",
                      "--plan-samples", "16", "--workers", "1", "--output-dir", dir.string()});
  REQUIRE(r.code == kExitOk);
  const auto report = read_json(dir / "converge_report.json");
  CHECK(report["per_level"].size() == 2);
  CHECK(report["effective_config"]["plan"]["levels"] == nlohmann::json{4, 8});
  CHECK(report.contains("build_id"));
  CHECK(fs::exists(dir / "converge.csv"));
  CHECK(fs::exists(dir / "converge.csv.meta.json"));
}

TEST_CASE("converge assertion band") {
  const auto dir = fresh_dir("assert");
  const auto r = cli({"converge", "--levels", "4,8", "--ref", "16", "--plan-horizon", "0.0625",
                      "--plan-samples", "8", "--workers", "1", "--tolerances-slope-min", "5",
                      "--tolerances-slope-max", "6", "--assert", "--output-dir", dir.string()});
  CHECK(r.code == kExitAssertion);
}

TEST_CASE("ou-error sweep") {
  const auto dir = fresh_dir("ou");
  const auto r = cli({"ou-error", "--output-dir", dir.string(), "--assert"});
  REQUIRE(r.code == kExitOk);
  std::ifstream in(dir / "ou_error.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,t,error_sq");
  const auto s = read_json(dir / "ou_error_summary.json");
  CHECK(s["slope"].get<double>() < -0.8);
}

TEST_CASE("verify exit codes") {
  const auto dir = fresh_dir("verify");
  CHECK(cli({"verify", "--only", "cfl,summation", "--output-dir", dir.string()}).code == kExitOk);
  CHECK(read_json(dir / "verify_report.json")["pass"] == true);
  CHECK(cli({"verify", "--only", "cfl", "--plan-cfl-c-list", "0.6", "--output-dir", dir.string()}).code ==
        kExitLemma);
  CHECK(cli({"verify", "--only", "bogus", "--output-dir", dir.string()}).code == kExitConfig);
}

TEST_CASE("simulate and noise round trip") {
  const auto dir = fresh_dir("sim");
  const auto r = cli({"simulate", "--grid-n", "8", "--plan-horizon", "0.0625", "--plan-snapshot-times",
                      "0,0.0625", "--output-dir", dir.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(dir / "simulate_manifest.json"));
  const auto noise = cli({"noise", "dump", "--grid-n", "8", "--plan-horizon", "0.0625", "--output-dir",
                          dir.string()});
  REQUIRE(noise.code == kExitOk);
  CHECK(fs::exists(dir / "noise.bin"));
  CHECK(cli({"noise", "load", "--output-dir", dir.string()}).code == kExitOk);
}

TEST_CASE("configuration errors") {
  CHECK(cli({"converge", "--config", "/nonexistent/config.json"}).code == kExitConfig);
  CHECK(cli({"converge", "--grid-c", "0.6", "--output-dir", fresh_dir("bad").string()}).code == kExitConfig);
  CHECK(cli({"frobnicate"}).code == kExitConfig);
  CHECK(cli({"--help"}).code == kExitOk);
}
