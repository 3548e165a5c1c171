#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "quqcd/density.hpp"
#include "quqcd/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" QUQCD_CLI_PATH
                          "' " + args + " > stdout.txt 2> stderr.txt";
  const int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = (rc == -1) ? -1 : WEXITSTATUS(rc);
  r.out = slurp(dir / "stdout.txt");
  r.err = slurp(dir / "stderr.txt");
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("quqcd_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

void write_qubit_pair(const fs::path& dir) {
  write_file(dir / "rho.json",
             R"({"dim": 2, "entries": [[0.7,0],[0,0],[0,0],[0.3,0]]})");
  write_file(dir / "sigma.json",
             R"({"dim": 2, "entries": [[0.5,0],[0.5,0],[0.5,0],[0.5,0]]})");
}

std::string qubit_scenario_json(int trials, int seed) {
  json sc;
  sc["rho"] = json::parse(R"({"dim":2,"entries":[[0.7,0],[0,0],[0,0],[0.3,0]]})");
  sc["sigma"] =
      json::parse(R"({"dim":2,"entries":[[0.5,0],[0.5,0],[0.5,0],[0.5,0]]})");
  sc["nu"] = 0;
  sc["ell"] = 3;
  sc["w"] = 16;
  sc["trials"] = trials;
  sc["max_steps"] = 20000;
  sc["seed"] = seed;
  return sc.dump();
}

}  // namespace

TEST_CASE("pvm-build emits a report on stdout") {
  const auto dir = fresh_dir("pvm");
  write_qubit_pair(dir);
  const auto r = run_cli(dir, "pvm-build --rho rho.json --ell 2");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report["outcome_count"] == 4);
  CHECK(report["bound"] == 9);
  CHECK(report["b"] == 2);
  CHECK(report["completeness_residual"].get<double>() <= 1e-10);

  const auto to_file =
      run_cli(dir, "pvm-build --rho rho.json --ell 2 --out pvm.json");
  REQUIRE(to_file.exit_code == 0);
  CHECK(to_file.out.find("pvm-build:") == 0);
  CHECK(json::parse(slurp(dir / "pvm.json"))["outcome_count"] == 4);
}

TEST_CASE("validation failures exit 1 with a structured error") {
  const auto dir = fresh_dir("badinput");
  write_file(dir / "bad.json",
             R"({"dim": 2, "entries": [[0.7,0],[0,0],[0,0],[0.4,0]]})");
  const auto r = run_cli(dir, "pvm-build --rho bad.json --ell 2");
  CHECK(r.exit_code == 1);
  const json err = json::parse(r.err);
  CHECK(err["error"]["kind"] == "TraceNotOne");

  const auto unknown = run_cli(dir, "frobnicate");
  CHECK(unknown.exit_code == 1);

  const auto missing = run_cli(dir, "pvm-build --ell 2");
  CHECK(missing.exit_code == 1);
}

TEST_CASE("runtime failures exit 2 with a structured error") {
  const auto dir = fresh_dir("runtime");
  write_qubit_pair(dir);
  REQUIRE(run_cli(dir, "induce --rho rho.json --sigma sigma.json --ell 2 "
                       "--out model.json")
              .exit_code == 0);
  write_file(dir / "stream.txt", "no-such-label\n");
  const auto r = run_cli(
      dir, "detect --model model.json --stream stream.txt --w 4 --h 1");
  CHECK(r.exit_code == 2);
  const json err = json::parse(r.err);
  CHECK(err["error"]["kind"] == "UnknownOutcome");
}

TEST_CASE("entropy-gap renders one CSV row per block length") {
  const auto dir = fresh_dir("gap");
  write_qubit_pair(dir);
  const auto r = run_cli(
      dir, "entropy-gap --rho rho.json --sigma sigma.json --ell-max 3");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("ell,normalized_divergence,quantum_relative_entropy,gap") !=
        std::string::npos);
  int rows = 0;
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] >= '1' && line[0] <= '9') ++rows;
  CHECK(rows == 3);
}

TEST_CASE("detect consumes a stream produced from an induced model") {
  const auto dir = fresh_dir("detect");
  write_qubit_pair(dir);
  REQUIRE(run_cli(dir, "induce --rho rho.json --sigma sigma.json --ell 3 "
                       "--out model.json")
              .exit_code == 0);

  const json model = json::parse(slurp(dir / "model.json"));
  const auto labels = model["labels"].get<std::vector<std::string>>();
  const auto q = model["q"].get<std::vector<double>>();
  quqcd::CounterRng rng(33);
  quqcd::CategoricalSampler sampler(q);
  std::string stream;
  for (int n = 0; n < 300; ++n) stream += labels[sampler.sample(rng)] + "\n";
  write_file(dir / "stream.txt", stream);

  const auto r = run_cli(dir,
                         "detect --model model.json --stream stream.txt "
                         "--detector cusum --h 6 --trace trace.csv "
                         "--out report.json");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report["stopped"] == true);
  CHECK(report["stopping_step"].get<int>() >= 1);
  const std::string trace = slurp(dir / "trace.csv");
  CHECK(trace.find("step,statistic") == 0);

  // NWLA on the same stream needs a window.
  const auto nw = run_cli(dir,
                          "detect --model model.json --stream stream.txt "
                          "--detector nwla --w 8 --h 6");
  CHECK(nw.exit_code == 0);
  const auto no_w = run_cli(dir,
                            "detect --model model.json --stream stream.txt "
                            "--detector nwla --h 6");
  CHECK(no_w.exit_code == 1);
}

TEST_CASE("stochastic subcommands demand a seed") {
  const auto dir = fresh_dir("seeds");
  const auto r = run_cli(
      dir, "conditions --family uniform --w-list 64,256 --trials 200");
  CHECK(r.exit_code == 1);
  CHECK(json::parse(r.err)["error"]["kind"] == "BadInput");
}

TEST_CASE("conditions writes rows and decay exponents") {
  const auto dir = fresh_dir("cond");
  const auto r = run_cli(dir,
                         "conditions --family uniform --w-list 64,144,256 "
                         "--trials 300 --seed 5 --threads 4");
  REQUIRE(r.exit_code == 0);
  const std::string csv = slurp(dir / "conditions.csv");
  CHECK(csv.find("w,d,kl_mean,kl_se,m2_mean,m2_se") == 0);
  const json summary = json::parse(slurp(dir / "conditions.json"));
  CHECK(summary["rows"].size() == 3);
  CHECK(summary["fit_performed"] == true);
  CHECK(summary.contains("beta1"));
  CHECK(summary["config"]["seed"] == 5);

  // Replaying the recorded configuration reproduces both files bitwise.
  const auto replay = run_cli(dir,
                              "conditions --from-config conditions.json "
                              "--out-csv replay.csv --out-json replay.json");
  REQUIRE(replay.exit_code == 0);
  CHECK(slurp(dir / "replay.csv") == csv);
}

TEST_CASE("calibrate resolves a trivial target exactly") {
  const auto dir = fresh_dir("cal");
  write_file(dir / "sc.json", qubit_scenario_json(60, 3));
  const auto r = run_cli(dir,
                         "calibrate --scenario sc.json --target 1 "
                         "--trials 60 --out cal.json");
  REQUIRE(r.exit_code == 0);
  const json cal = json::parse(slurp(dir / "cal.json"));
  CHECK(cal["threshold"].get<double>() == 0.0);
  CHECK(cal["achieved_tfa"].get<double>() == 1.0);
  CHECK(cal["converged"] == true);
}

TEST_CASE("sweep outputs are thread-invariant and replayable") {
  const auto dir = fresh_dir("sweep");
  write_file(dir / "sc.json", qubit_scenario_json(60, 12));

  const std::string grid = "--tfa 20,60,180 --trials 60";
  REQUIRE(run_cli(dir, "sweep --scenario sc.json " + grid +
                           " --threads 1 --curve c1.csv --summary s1.json")
              .exit_code == 0);
  REQUIRE(run_cli(dir, "sweep --scenario sc.json " + grid +
                           " --threads 8 --curve c8.csv --summary s8.json")
              .exit_code == 0);
  CHECK(slurp(dir / "c1.csv") == slurp(dir / "c8.csv"));
  CHECK(slurp(dir / "s1.json") == slurp(dir / "s8.json"));

  REQUIRE(run_cli(dir, "sweep --from-config s1.json --curve c2.csv "
                       "--summary s2.json")
              .exit_code == 0);
  CHECK(slurp(dir / "c2.csv") == slurp(dir / "c1.csv"));
  CHECK(slurp(dir / "s2.json") == slurp(dir / "s1.json"));

  // Exactly one of --tfa / --h.
  CHECK(run_cli(dir, "sweep --scenario sc.json --tfa 20,60 --h 1,2").exit_code ==
        1);

  const auto rep = run_cli(dir, "report --summary s1.json");
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.out.find("sweep report:") == 0);
  CHECK(rep.out.find("fitted slope") != std::string::npos);
}
