#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>

#include "fastpol/random.hpp"

namespace fastpol {

/// Coherent probe pulse, linearly polarized along x.
struct PulseConfig {
  double mean_photon_number = 0.0;  ///< 2J, photons per pulse
  double duration = 400e-9;         ///< T [s]
  double detuning = 0.0;            ///< Delta [rad/s]
  double probe_linewidth = 0.0;     ///< Gamma_p [rad/s]

  /// J = 2J / 2; also the mean of J_x for the x-polarized probe.
  double j() const { return mean_photon_number / 2.0; }

  void validate() const;
};

enum class UnitsBasis { IncidentPhotons, Photoelectrons };

/// How a no-atom pulse is partitioned between the two polarimeter ports.
enum class CountingModel {
  PoissonSplit,   ///< total ~ Poisson(2J), each photon to either port with p = 1/2
  BinomialSplit,  ///< fixed total 2J, each photon to either port with p = 1/2
  GaussianLimit,  ///< count difference from the large-J Gaussian
};

/// Below this photon number only the discrete models are allowed.
inline constexpr double kGaussianLimitThreshold = 1e4;

/// Counts at the two polarimeter ports; J_y' is derived, never stored.
struct PolarimeterSample {
  std::int64_t n_plus = 0;
  std::int64_t n_minus = 0;
  UnitsBasis units_basis = UnitsBasis::IncidentPhotons;

  /// (n_plus - n_minus) / 2, exact for any realistic count.
  double j_y_prime() const { return static_cast<double>(n_plus - n_minus) / 2.0; }
  std::int64_t difference() const { return n_plus - n_minus; }
  std::int64_t total() const { return n_plus + n_minus; }
};

std::string_view to_string(CountingModel model);
std::string_view to_string(UnitsBasis basis);
std::optional<CountingModel> parse_counting_model(std::string_view name);
std::optional<UnitsBasis> parse_units_basis(std::string_view name);

/// Gaussian for 2J >= kGaussianLimitThreshold, BinomialSplit below.
CountingModel default_counting_model(double mean_photon_number);

/// One polarimeter outcome for the pulse with no atoms present.
///
/// The semiclassical photon partition used here reproduces the coherent-state
/// statistics of J_y' exactly: mean 0 and variance J/2 (the Gaussian model
/// draws an integer count difference whose variance is 2J after rounding).
PolarimeterSample sample_vacuum_outcome(const PulseConfig& pulse, CountingModel model,
                                        RandomStream& rng);

/// Largest total photon number accepted by exact_outcome_pmf.
inline constexpr std::int64_t kMaxEnumeratedPhotons = 10000;

/// Exact distribution of J_y' = (n1 - n2)/2 for `total_photons` split
/// binomially between the ports. Keys are the (half-)integer J_y' values.
std::map<double, double> exact_outcome_pmf(std::int64_t total_photons, CountingModel model);

/// sqrt(J/2), the vacuum-noise standard deviation of J_y'.
double vacuum_sigma(const PulseConfig& pulse);

}  // namespace fastpol
