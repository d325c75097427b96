// Drives the fastpol executable end to end.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + FASTPOL_CLI + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::create_directories(dir);
  std::ofstream(dir / name) << text;
  return dir / name;
}

}  // namespace

TEST_CASE("vacuum with explicit flags") {
  const auto out = oracle::scratch_dir("cli-vac");
  CHECK(run("vacuum --pulses 200 --seed 5 --model gaussian --out " + out.string()) == 0);
  const auto m = nlohmann::json::parse(oracle::slurp(out / "manifest.json"));
  CHECK(m["config"]["run"]["pulses"] == 200);
  CHECK(m["config"]["run"]["seed"] == 5);
  CHECK(m["config"]["run"]["model"] == "gaussian");
  fs::remove_all(out);
}

TEST_CASE("environment root and --out precedence") {
  const auto root = oracle::scratch_dir("cli-root");
  const std::string env = "FASTPOL_OUTPUT_ROOT=" + root.string();
  CHECK(run("waveform --seed 9", env) == 0);
  CHECK(fs::exists(root / "waveform-seed9" / "manifest.json"));
  const auto explicit_dir = oracle::scratch_dir("cli-out");
  CHECK(run("waveform --seed 10 --out " + explicit_dir.string(), env) == 0);
  CHECK(fs::exists(explicit_dir / "manifest.json"));
  CHECK_FALSE(fs::exists(root / "waveform-seed10"));
  fs::remove_all(root);
  fs::remove_all(explicit_dir);
}

TEST_CASE("exit codes") {
  const auto dir = oracle::scratch_dir("cli-codes");
  // Config errors.
  CHECK(run("vacuum --model exact --out " + (dir / "a").string()) == 2);
  CHECK(run("vacuum --config /nonexistent.yaml") == 2);
  CHECK(run("nosuchcommand") == 2);
  const auto bad = write_file(dir, "bad.yaml", "pulse:\n  duration: 400\n");
  CHECK(run("vacuum --config " + bad.string() + " --out " + (dir / "b").string()) == 2);
  CHECK(run("qnd --out " + (dir / "c").string()) == 2);  // no spins section
  const auto nonlinear = write_file(dir, "nonlinear.yaml",
                                    "interaction:\n  coupling_product: 1e-3\nspins:\n  atom_count: 1000000\n");
  CHECK(run("qnd --config " + nonlinear.string() + " --out " + (dir / "d").string()) == 2);
  CHECK(run("two-pulse --separation \"10 ns\" --out " + (dir / "e").string()) == 2);

  // Simulation error: the shaper saturates the ADC.
  const auto hot = write_file(dir, "hot.yaml", "detector:\n  shaper_gain: 1e5\nrun:\n  pulses: 10\n");
  CHECK(run("vacuum --config " + hot.string() + " --out " + (dir / "f").string()) == 3);
  CHECK_FALSE(fs::exists(dir / "f"));

  // Analysis error: too few pulses for the fit; data are still written.
  CHECK(run("vacuum --pulses 5 --out " + (dir / "g").string()) == 4);
  CHECK(fs::exists(dir / "g" / "readouts.csv"));

  CHECK(run("--help") == 0);
  fs::remove_all(dir);
}

TEST_CASE("every subcommand runs and is reproducible") {
  const auto dir = oracle::scratch_dir("cli-all");
  const auto cfg = write_file(dir, "run.yaml",
                              "run:\n  pulses: 300\n  seed: 3\n"
                              "pulse:\n  photon_number: 4e6\n"
                              "interaction:\n  coupling_product: 1e-6\n"
                              "spins:\n  atom_count: 1000000\n");
  for (const std::string cmd : {"vacuum", "sweep", "qnd", "two-pulse", "waveform"}) {
    CAPTURE(cmd);
    const auto a = dir / (cmd + "-a"), b = dir / (cmd + "-b");
    REQUIRE(run(cmd + " --config " + cfg.string() + " --out " + a.string()) == 0);
    REQUIRE(run(cmd + " --config " + cfg.string() + " --threads 1 --out " + b.string()) == 0);
    const auto ma = nlohmann::json::parse(oracle::slurp(a / "manifest.json"));
    const auto mb = nlohmann::json::parse(oracle::slurp(b / "manifest.json"));
    CHECK(ma["outputs"] == mb["outputs"]);
    CHECK(ma["summary"] == mb["summary"]);
    // The manifest is itself a valid run file.
    const auto c = dir / (cmd + "-c");
    REQUIRE(run(cmd + " --config " + (a / "manifest.json").string() + " --out " + c.string()) == 0);
    CHECK(nlohmann::json::parse(oracle::slurp(c / "manifest.json"))["outputs"] == ma["outputs"]);
  }
  fs::remove_all(dir);
}
