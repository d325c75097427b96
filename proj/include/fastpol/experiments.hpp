#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fastpol/analysis.hpp"
#include "fastpol/config.hpp"
#include "fastpol/detector.hpp"
#include "fastpol/output.hpp"
#include "fastpol/random.hpp"
#include "fastpol/spin_qnd.hpp"

namespace fastpol {

std::string_view version();

// ---------------------------------------------------------------------------
// In-memory experiments. Pulse i always draws from RandomStream(seed)
// substream i, so results do not depend on the worker count.

struct VacuumResult {
  double photon_number_2j = 0.0;  ///< incident
  std::vector<PolarimeterSample> incident;
  std::vector<ChainReading> readings;
  /// J_y' readouts in photoelectrons; reference 2J in the configured basis.
  MeasurementRecord record;
  /// 2J from the blocked-port preamp amplitude.
  double calibrated_photon_number_2j = 0.0;
  double theory_sigma = 0.0;  ///< sqrt(eta J / 2)
  double ballistic_deficit = 1.0;
  std::optional<GaussianFitResult> fit;
  std::string fit_error;
  stats::KsResult ks_theory;  ///< against Normal(0, theory_sigma)
  Histogram histogram;
};

VacuumResult simulate_vacuum(const RunConfig& config);
VacuumResult simulate_vacuum(const RunConfig& config, double photon_number_2j,
                             const RandomStream& root);

struct SweepResult {
  std::vector<VacuumResult> points;
  ScalingFitResult fit;
  UnitsBasis basis = UnitsBasis::Photoelectrons;
  /// True when the chain carries a deliberate C_f calibration error, i.e.
  /// the fitted epsilon reflects that hypothesis rather than ideal physics.
  bool calibration_hypothesis = false;
};

SweepResult simulate_sweep(const RunConfig& config);

struct QndResult {
  std::vector<double> true_sz;
  std::vector<double> readouts;
  UnitsBasis readout_basis = UnitsBasis::IncidentPhotons;
  double kappa2 = 0.0;  ///< of the bare polarimeter
  double predicted_mean = 0.0;
  double predicted_variance = 0.0;
  double empirical_mean = 0.0;
  double empirical_variance = 0.0;
  double variance_se = 0.0;  ///< Var * sqrt(2 / (N - 1))

  double variance_z() const { return (empirical_variance - predicted_variance) / variance_se; }
};

QndResult simulate_qnd(const RunConfig& config);

struct TwoPulseResult {
  std::vector<QndOutcomePair> pairs;
  std::vector<std::pair<double, double>> readouts;
  UnitsBasis readout_basis = UnitsBasis::IncidentPhotons;
  CorrelationResult correlation;
  ConditionalVarianceReport conditional;
  double kappa2 = 0.0;  ///< effective, in the readout basis
  double predicted_correlation = 0.0;
  double vacuum_variance = 0.0;
  bool vacuum_mode = true;
  double null_bound = 0.0;  ///< 3 / sqrt(N)
  bool null_bound_holds = true;
  std::size_t spin_redraws = 0;
};

TwoPulseResult simulate_two_pulse(const RunConfig& config);

struct WaveformDemoResult {
  double charge = 0.0;
  WaveformTrace preamp;
  WaveformTrace shaped;
  double preamp_peak_volts = 0.0;
  double preamp_peak_time = 0.0;
  double shaper_peak_volts = 0.0;
  double shaper_peak_time = 0.0;
  /// Shaper peak time measured from the start of charge collection.
  double peak_delay = 0.0;
  /// ... and from the middle of the collection ramp.
  double peak_delay_from_centroid = 0.0;
  double ballistic_deficit = 1.0;
};

WaveformDemoResult simulate_waveform(const RunConfig& config);

// ---------------------------------------------------------------------------
// Persisted runs: data tables, a key: value report and manifest.json.

struct RunOutcome {
  std::filesystem::path dir;
  std::vector<OutputFile> files;
  nlohmann::json manifest;
  /// Set when the data were written but the reduction refused them.
  std::optional<std::string> analysis_failure;
};

RunOutcome run_vacuum(const RunConfig& config, const std::filesystem::path& out_dir);
RunOutcome run_sweep(const RunConfig& config, const std::filesystem::path& out_dir);
RunOutcome run_qnd(const RunConfig& config, const std::filesystem::path& out_dir);
RunOutcome run_two_pulse(const RunConfig& config, const std::filesystem::path& out_dir);
RunOutcome run_waveform(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace fastpol
