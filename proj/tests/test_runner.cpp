#include "dispatchlab/runner.hpp"

#include <cstdlib>
#include <set>

#include <doctest.h>

#include "dispatchlab/errors.hpp"
#include "support.hpp"

using namespace dispatchlab;
using testsupport::TempDir;
using testsupport::read_file;
using testsupport::write_file;

namespace {

RunSpec small_spec(const std::filesystem::path& out) {
  RunSpec spec;
  spec.source.n_requests = 60;
  spec.source.n_drivers = 5;
  spec.source.duration_s = 3600.0;
  spec.source.seed = 3;
  spec.policies = {PolicyKind::LEAD};
  spec.config.eta_g_per_km = 5.0;
  spec.batch_minutes_axis = {5.0};
  spec.eta_axis = {5.0};
  spec.lev_pct_axis = {0.0};
  spec.out_dir = out;
  return spec;
}

std::filesystem::path only_run_dir(const std::filesystem::path& policy_dir) {
  REQUIRE(std::filesystem::exists(policy_dir));
  std::vector<std::filesystem::path> entries;
  for (const auto& e : std::filesystem::directory_iterator(policy_dir)) {
    entries.push_back(e.path());
  }
  REQUIRE(entries.size() == 1);
  return entries.front();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DISPATCH_LAB_CLI_PATH) + " " + args +
                          " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("fingerprint: FNV-1a reference vectors") {
  CHECK(fingerprint("") == "cbf29ce484222325");
  CHECK(fingerprint("a") == "af63dc4c8601ec8c");
  CHECK(fingerprint("foobar") == "85944171f73967e8");
}

TEST_CASE("manifest: round-trips through parse and re-serialization") {
  RunSpec spec = small_spec("unused");
  spec.config.utility_mode = UtilityMode::paper;
  spec.config.fairness_scope = FairnessScope::matched_only;
  spec.source.lev_pct = 15.0;
  const SingleRun run{spec.source, PolicyKind::TORA, spec.config};

  const std::string manifest = manifest_json(run, "deadbeef00000000");
  const SingleRun back = parse_manifest(manifest);
  CHECK(manifest_json(back, "deadbeef00000000") == manifest);
  CHECK(back.policy == PolicyKind::TORA);
  CHECK(back.config.fairness_scope == FairnessScope::matched_only);
  CHECK(back.source.lev_pct == 15.0);

  CHECK_THROWS_AS(parse_manifest("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_manifest("{\"tool\":\"other\"}"), ConfigError);
}

TEST_CASE("execute_single writes the run artifact set") {
  TempDir dir("runner_single");
  const RunSpec spec = small_spec(dir.path());
  const Scenario scenario = make_scenario(spec.source);
  const SingleRun run{spec.source, PolicyKind::LEAD, spec.config};
  const MetricsReport rep = execute_single(run, scenario, spec.out_dir);
  CHECK(rep.served_count + rep.dropped_count == 60);

  const auto run_dir = only_run_dir(dir.path() / "lead");
  for (const char* name :
       {"trips.csv", "drivers.csv", "metrics.csv", "values.csv", "manifest.json"}) {
    CHECK(std::filesystem::exists(run_dir / name));
  }
}

TEST_CASE("cmd_run: policies share one scenario and report success") {
  TempDir dir("runner_shared");
  RunSpec spec = small_spec(dir.path());
  spec.policies = {PolicyKind::LEAD, PolicyKind::CD, PolicyKind::TORA,
                   PolicyKind::LAF};
  CHECK(cmd_run(spec) == 0);

  std::set<std::string> fingerprints;
  for (const char* policy : {"lead", "cd", "tora", "laf"}) {
    const auto manifest = read_file(only_run_dir(dir.path() / policy) / "manifest.json");
    const auto key = manifest.find("scenario_fingerprint");
    REQUIRE(key != std::string::npos);
    fingerprints.insert(manifest.substr(key, 60));
  }
  CHECK(fingerprints.size() == 1);  // identical scenario in all four runs
}

TEST_CASE("cmd_run: exit codes for invalid configuration and io failures") {
  TempDir dir("runner_exit");
  RunSpec no_policy = small_spec(dir.path());
  no_policy.policies.clear();
  CHECK(cmd_run(no_policy) == 2);

  RunSpec bad_dataset = small_spec(dir.path());
  bad_dataset.source.is_dataset = true;
  bad_dataset.source.dataset_path = dir.path() / "nope.csv";
  CHECK(cmd_run(bad_dataset) == 3);

  RunSpec bad_target = small_spec(dir.path());
  bad_target.source.lev_pct = 2.0;  // below the default profile's LEV share
  CHECK(cmd_run(bad_target) == 2);
}

TEST_CASE("replay: a stored manifest reproduces byte-identical exports") {
  TempDir dir("runner_replay");
  const RunSpec spec = small_spec(dir.path() / "first");
  REQUIRE(cmd_run(spec) == 0);
  const auto first = only_run_dir(dir.path() / "first" / "lead");

  REQUIRE(cmd_replay(first / "manifest.json", dir.path() / "second") == 0);
  const auto second = only_run_dir(dir.path() / "second" / "lead");

  CHECK(first.filename() == second.filename());  // same config hash
  for (const char* name :
       {"trips.csv", "drivers.csv", "metrics.csv", "values.csv", "manifest.json"}) {
    CHECK(read_file(first / name) == read_file(second / name));
  }
}

TEST_CASE("cmd_sweep: axis product, table output, and validation") {
  TempDir dir("runner_sweep");
  RunSpec spec = small_spec(dir.path());
  spec.batch_minutes_axis = {2.0, 5.0, 10.0};
  CHECK(cmd_sweep(spec) == 0);

  int run_dirs = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path() / "lead")) {
    (void)e;
    ++run_dirs;
  }
  CHECK(run_dirs == 3);
  CHECK(std::filesystem::exists(dir.path() / "sweep.csv"));
  CHECK(std::filesystem::exists(dir.path() / "summary.json"));

  const std::string sweep = read_file(dir.path() / "sweep.csv");
  CHECK(sweep.find("lead,120,") != std::string::npos);
  CHECK(sweep.find("lead,300,") != std::string::npos);
  CHECK(sweep.find("lead,600,") != std::string::npos);

  RunSpec empty_axis = small_spec(dir.path() / "bad");
  empty_axis.eta_axis.clear();
  CHECK(cmd_sweep(empty_axis) == 2);
}

TEST_CASE("cmd_run: scenario dump is written and parseable") {
  TempDir dir("runner_scenario_out");
  RunSpec spec = small_spec(dir.path());
  spec.scenario_out = dir.path() / "scenario.json";
  REQUIRE(cmd_run(spec) == 0);
  REQUIRE(std::filesystem::exists(spec.scenario_out));
  const Scenario back = load_scenario(spec.scenario_out);
  CHECK(back.requests.size() == 60);
  CHECK(back.fleet.size() == 5);
  // the dump matches what the run consumed
  const auto manifest = read_file(only_run_dir(dir.path() / "lead") / "manifest.json");
  CHECK(manifest.find(fingerprint(serialize_scenario(back))) != std::string::npos);
}

TEST_CASE("cmd_sweep: eta and lev axes expand to the full product") {
  TempDir dir("runner_product");
  RunSpec spec = small_spec(dir.path());
  spec.source.n_requests = 40;
  spec.eta_axis = {0.1, 1.0, 5.0, 10.0};
  spec.lev_pct_axis = {21.0, 41.0, 61.0};
  REQUIRE(cmd_sweep(spec) == 0);

  int run_dirs = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path() / "lead")) {
    (void)e;
    ++run_dirs;
  }
  CHECK(run_dirs == 12);
}

TEST_CASE("cmd_sweep: worker parallelism leaves results unchanged") {
  TempDir dir("runner_workers");
  RunSpec solo = small_spec(dir.path() / "w1");
  solo.policies = {PolicyKind::LEAD, PolicyKind::CD};
  solo.batch_minutes_axis = {2.0, 5.0};
  solo.workers = 1;
  RunSpec parallel = solo;
  parallel.out_dir = dir.path() / "w4";
  parallel.workers = 4;

  REQUIRE(cmd_sweep(solo) == 0);
  REQUIRE(cmd_sweep(parallel) == 0);
  CHECK(read_file(dir.path() / "w1" / "sweep.csv") ==
        read_file(dir.path() / "w4" / "sweep.csv"));
}

TEST_CASE("cli: smoke run writes reports and repeats byte-identically") {
  TempDir dir("cli_smoke");
  const std::string args =
      "run --synthetic --requests 50 --drivers 4 --policy lead --eta 5 "
      "--batch-minutes 5 --seed 7 --out " + (dir.path() / "a").string();
  REQUIRE(run_cli(args) == 0);

  const auto run_dir = only_run_dir(dir.path() / "a" / "lead");
  CHECK(std::filesystem::exists(run_dir / "metrics.csv"));

  const std::string again =
      "run --synthetic --requests 50 --drivers 4 --policy lead --eta 5 "
      "--batch-minutes 5 --seed 7 --out " + (dir.path() / "b").string();
  REQUIRE(run_cli(again) == 0);
  const auto run_dir_b = only_run_dir(dir.path() / "b" / "lead");
  CHECK(read_file(run_dir / "metrics.csv") == read_file(run_dir_b / "metrics.csv"));
  CHECK(read_file(run_dir / "trips.csv") == read_file(run_dir_b / "trips.csv"));
}

TEST_CASE("cli: exit codes follow the run contract") {
  TempDir dir("cli_exit");
  CHECK(run_cli("run --synthetic --policy bogus --out " + dir.path().string()) == 2);
  CHECK(run_cli("run --no-such-flag") == 2);
  CHECK(run_cli("run --dataset " + (dir.path() / "missing.csv").string() +
                " --policy lead --out " + dir.path().string()) == 3);
  CHECK(run_cli("sweep --synthetic --requests 20 --drivers 3 --policy lead "
                "--eta , --out " + dir.path().string()) == 2);
}

TEST_CASE("cli: DISPATCH_LAB_OUT provides the default output root") {
  TempDir dir("cli_env");
  const std::string out = (dir.path() / "from_env").string();
  const std::string cmd = "DISPATCH_LAB_OUT=" + out + " " + DISPATCH_LAB_CLI_PATH +
                          " run --synthetic --requests 20 --drivers 3 "
                          "--policy cd --seed 1 >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(std::filesystem::exists(std::filesystem::path(out) / "cd"));
}
