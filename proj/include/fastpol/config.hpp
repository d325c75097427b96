#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fastpol/detector.hpp"
#include "fastpol/spin_qnd.hpp"
#include "fastpol/stokes.hpp"

namespace fastpol {

/// Everything a run needs; defaults reproduce the 400 ns, 2J = 3.7e6,
/// 1000-pulse vacuum-noise measurement.
struct RunConfig {
  PulseConfig pulse = default_pulse();
  DetectorChainConfig detector;
  TraceParams trace;
  PeakStrategy peak_strategy = PeakStrategy::GlobalMax;
  ChainTopology topology = ChainTopology::DifferenceCurrent;

  std::optional<InteractionParams> interaction;
  std::optional<SpinEnsembleState> spins;

  std::size_t n_pulses = 1000;
  std::uint64_t seed = 1;
  /// Unset: Gaussian limit at or above 1e4 photons, binomial split below.
  std::optional<CountingModel> counting_model;
  /// Basis of the reference photon number in fits.
  UnitsBasis units_basis = UnitsBasis::Photoelectrons;
  std::string output_dir;
  unsigned threads = 0;  ///< 0 = hardware concurrency

  std::vector<double> sweep_photon_numbers = default_sweep();
  double pulse_separation = 5e-6;
  /// Send QND and two-pulse readouts through the detector chain.
  bool qnd_through_chain = false;
  double waveform_charge = 1e6;  ///< electrons

  static PulseConfig default_pulse();
  static std::vector<double> default_sweep();
  /// Other pulse durations measured alongside the 400 ns default.
  static std::vector<double> duration_presets();
  /// Coherent state of 1e6 atoms, T2 = 1 s, Gamma = 2 pi x 29 MHz.
  static SpinEnsembleState default_spins();
  /// alpha t1 = 1e-6: kappa^2 = 1 for 2J = 4e6 and the default spins.
  static InteractionParams default_interaction();

  /// Explicit model, or the default for `photon_number`. Rejects the
  /// Gaussian limit below 1e4 photons.
  CountingModel model_for(double photon_number) const;

  /// Throws ConfigError.
  void validate() const;
};

/// Parses the nested key-value run file. A run manifest is accepted too;
/// its embedded "config" section is used.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Snapshot with unit-suffixed SI strings; parse_run_config(dump) restores
/// the same values bit for bit.
nlohmann::json to_json(const RunConfig& config);

}  // namespace fastpol
