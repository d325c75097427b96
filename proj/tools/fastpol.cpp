// fastpol: command-line front end for the pulse polarimetry simulator.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fastpol/config.hpp"
#include "fastpol/errors.hpp"
#include "fastpol/experiments.hpp"
#include "fastpol/units.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfig = 2, kSimulation = 3, kAnalysis = 4 };

constexpr const char* kOutputRootEnv = "FASTPOL_OUTPUT_ROOT";

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> pulses;
  std::string out;
  std::string model;
  std::optional<unsigned> threads;
  std::string separation;
  std::optional<double> charge;
  bool through_chain = false;
};

fastpol::RunConfig build_config(const Options& opt) {
  fastpol::RunConfig cfg = opt.config_path.empty() ? fastpol::RunConfig{}
                                                   : fastpol::load_run_config(opt.config_path);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.pulses) cfg.n_pulses = *opt.pulses;
  if (opt.threads) cfg.threads = *opt.threads;
  if (!opt.model.empty()) cfg.counting_model = fastpol::parse_counting_model(opt.model);
  if (!opt.separation.empty()) {
    cfg.pulse_separation = fastpol::units::parse_quantity(opt.separation, fastpol::units::Dimension::Time);
  }
  if (opt.charge) cfg.waveform_charge = *opt.charge;
  if (opt.through_chain) cfg.qnd_through_chain = true;
  cfg.validate();
  return cfg;
}

// --out wins; otherwise <root>/<command>-seed<seed> under the config's
// output_dir, the environment root or ./fastpol-runs.
std::filesystem::path output_dir(const Options& opt, const fastpol::RunConfig& cfg,
                                 const std::string& command) {
  if (!opt.out.empty()) return opt.out;
  std::filesystem::path root = "fastpol-runs";
  if (!cfg.output_dir.empty()) {
    root = cfg.output_dir;
  } else if (const char* env = std::getenv(kOutputRootEnv); env && *env) {
    root = env;
  }
  return root / fmt::format("{}-seed{}", command, cfg.seed);
}

int run(const std::string& command, const Options& opt) {
  try {
    const fastpol::RunConfig cfg = build_config(opt);
    const auto dir = output_dir(opt, cfg, command);
    fastpol::RunOutcome outcome;
    if (command == "vacuum") {
      outcome = fastpol::run_vacuum(cfg, dir);
    } else if (command == "sweep") {
      outcome = fastpol::run_sweep(cfg, dir);
    } else if (command == "qnd") {
      outcome = fastpol::run_qnd(cfg, dir);
    } else if (command == "two-pulse") {
      outcome = fastpol::run_two_pulse(cfg, dir);
    } else {
      outcome = fastpol::run_waveform(cfg, dir);
    }
    std::cout << fmt::format("wrote {} files + manifest.json to {}\n", outcome.files.size(),
                             outcome.dir.string());
    for (const auto& [key, value] : outcome.manifest["summary"].items()) {
      std::cout << fmt::format("  {}: {}\n", key, value.dump());
    }
    if (outcome.analysis_failure) {
      std::cerr << "fastpol: analysis error: " << *outcome.analysis_failure << "\n";
      return kAnalysis;
    }
    return kOk;
  } catch (const fastpol::ConfigError& e) {
    std::cerr << "fastpol: config error: " << e.what() << "\n";
    return kConfig;
  } catch (const fastpol::InvalidParameter& e) {
    std::cerr << "fastpol: config error: " << e.what() << "\n";
    return kConfig;
  } catch (const fastpol::LinearizationError& e) {
    std::cerr << "fastpol: config error: " << e.what() << "\n";
    return kConfig;
  } catch (const fastpol::SimulationError& e) {
    std::cerr << "fastpol: simulation error: " << e.what() << "\n";
    return kSimulation;
  } catch (const fastpol::AnalysisError& e) {
    std::cerr << "fastpol: analysis error: " << e.what() << "\n";
    return kAnalysis;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "fastpol: simulation error: " << e.what() << "\n";
    return kSimulation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic simulator for fast pulse polarimetry and spin QND measurements"};
  app.set_version_flag("--version", std::string(fastpol::version()));
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Run file (YAML) or a previous manifest.json")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Root RNG seed");
    sub->add_option("--pulses", opt.pulses, "Number of pulses (per sweep point)");
    sub->add_option("--out", opt.out, std::string("Output directory (overrides $") + kOutputRootEnv + ")");
    sub->add_option("--model", opt.model, "Photon-counting model")
        ->check(CLI::IsMember({"poisson", "binomial", "gaussian"}));
    sub->add_option("--threads", opt.threads, "Worker threads, 0 = all cores");
  };

  auto* vacuum = app.add_subcommand("vacuum", "Vacuum-noise histogram through the full chain");
  auto* sweep = app.add_subcommand("sweep", "Vacuum noise versus photon number, sqrt(eps J/2) fit");
  auto* qnd = app.add_subcommand("qnd", "Faraday-broadened outcome distribution");
  auto* two = app.add_subcommand("two-pulse", "Correlation of two pulses probing the same spins");
  auto* wave = app.add_subcommand("waveform", "Preamp and shaper traces for one pulse");
  for (auto* sub : {vacuum, sweep, qnd, two, wave}) add_common(sub);
  for (auto* sub : {qnd, two}) {
    sub->add_flag("--through-chain", opt.through_chain, "Read the pulses through the detector chain");
  }
  two->add_option("--separation", opt.separation, "Pulse separation with unit, e.g. \"5 us\"");
  wave->add_option("--charge", opt.charge, "Collected charge in electrons");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  for (auto* sub : app.get_subcommands()) return run(sub->get_name(), opt);
  return kConfig;
}
