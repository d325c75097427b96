#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fastpol/random.hpp"
#include "fastpol/stokes.hpp"

namespace fastpol {

/// Collective spin described by its first two moments of S_z.
struct SpinEnsembleState {
  double mean_sz = 0.0;
  double var_sz = 0.0;
  std::int64_t atom_count = 0;
  double coherence_time = 1.0;      ///< T2 [s]
  double excited_lifetime = 30e-9;  ///< tau_e [s]

  /// Gamma = 1 / tau_e [rad/s].
  double natural_linewidth() const { return 1.0 / excited_lifetime; }
  void set_natural_linewidth(double gamma) { excited_lifetime = 1.0 / gamma; }

  /// Unpolarized-along-z coherent spin state of N spin-1/2 atoms: var = N/4.
  static SpinEnsembleState coherent(std::int64_t atoms);

  void validate() const;
};

/// Faraday coupling H = alpha J_z S_z applied for a time t1.
///
/// Only the product alpha * t1 enters the rotated Stokes component, so most
/// callers set `coupling_alpha` to the product and leave `interaction_time`
/// at 1 s.
struct InteractionParams {
  double coupling_alpha = 1e-6;
  double interaction_time = 1.0;

  double rotation_per_unit() const { return coupling_alpha * interaction_time; }

  /// |alpha t1 (|<S_z>| + 3 sqrt(var))| < 0.1.
  bool small_rotation(const SpinEnsembleState& spins) const;
  bool small_rotation(double sz_value) const;

  void validate() const;
};

inline constexpr double kSmallRotationLimit = 0.1;

/// Two readouts of the same latent S_z.
struct QndOutcomePair {
  PolarimeterSample first;
  PolarimeterSample second;
  double true_sz = 0.0;
  /// S_z seen by the second pulse. Equal to true_sz unless the pulses were
  /// separated by more than T2, in which case the spin was redrawn.
  double second_sz = 0.0;
  double pulse_separation = 0.0;
  bool spin_redrawn = false;
};

struct FeasibilityCondition {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;

  /// rhs / lhs; above 1 when the inequality holds.
  double margin() const;
};

struct FeasibilityReport {
  std::vector<FeasibilityCondition> conditions;
  bool feasible() const;
};

/// tau_e < T, T < T2/10, Gamma_p < Gamma, Gamma < |Delta|.
FeasibilityReport check_qnd_feasibility(const PulseConfig& pulse, const SpinEnsembleState& spins);

/// alpha t1 J_x S_z with J_x = J for the x-polarized probe.
double rotated_jy_mean_shift(const InteractionParams& params, const PulseConfig& pulse,
                             double sz_value);

/// Measurement strength (alpha t1 J)^2 var_sz / (J/2).
double kappa_squared(const InteractionParams& params, const PulseConfig& pulse,
                     const SpinEnsembleState& spins);

/// J/2 + (alpha t1 J)^2 var_sz.
double broadened_variance(const InteractionParams& params, const PulseConfig& pulse,
                          const SpinEnsembleState& spins);

/// kappa^2 / (1 + kappa^2).
double predicted_pair_correlation(const InteractionParams& params, const PulseConfig& pulse,
                                  const SpinEnsembleState& spins);

struct QndOutcome {
  PolarimeterSample sample;
  double true_sz = 0.0;
};

/// Shifts a vacuum sample by the Faraday rotation for a given S_z. The
/// rotation moves photons between the ports; the transferred count is the
/// shift stochastically rounded so that its mean is exact.
PolarimeterSample apply_rotation(const PolarimeterSample& vacuum, double jy_shift,
                                 RandomStream& rng);

/// Draws S_z ~ Normal(mean, var), then the shot noise of the probe.
/// The marginal over both draws is the outcome distribution with atoms.
QndOutcome sample_qnd_outcome(const InteractionParams& params, const PulseConfig& pulse,
                              const SpinEnsembleState& spins, CountingModel model,
                              RandomStream& rng);

/// Two pulses probing one S_z draw; each gets its own shot noise.
QndOutcomePair sample_qnd_pair(const InteractionParams& params, const PulseConfig& pulse,
                               const SpinEnsembleState& spins, double separation,
                               CountingModel model, RandomStream& rng);

inline constexpr std::size_t kMinPairs = 100;

struct ConditionalVarianceReport {
  std::size_t pairs = 0;
  double beta = 0.0;                    ///< least-squares slope of J_y2' on J_y1'
  double conditional_variance = 0.0;    ///< min over beta of Var(J_y2' - beta J_y1')
  double unconditioned_variance = 0.0;  ///< Var(J_y2')
  /// conditional / unconditioned; (1 + 2k^2) / (1 + k^2)^2 for the Gaussian model.
  double variance_ratio = 1.0;
  /// Conditional spin variance over prior spin variance, both with the
  /// known vacuum variance removed; 1 / (1 + k^2) for the Gaussian model.
  std::optional<double> spin_noise_reduction;
};

ConditionalVarianceReport conditional_variance(std::span<const QndOutcomePair> pairs,
                                               std::optional<double> vacuum_variance = std::nullopt);
/// Same on raw (first, second) readouts.
ConditionalVarianceReport conditional_variance(std::span<const std::pair<double, double>> readouts,
                                               std::optional<double> vacuum_variance = std::nullopt);

}  // namespace fastpol
