#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "fastpol/stats.hpp"
#include "fastpol/stokes.hpp"

namespace fastpol {

/// Readouts J_y' of a pulse train.
struct MeasurementRecord {
  std::vector<double> readouts;
  double photon_number_2j = 0.0;  ///< reference photon number, in `units_basis`
  double pulse_duration = 0.0;
  UnitsBasis units_basis = UnitsBasis::Photoelectrons;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr std::size_t kMinFitSamples = 100;

struct GaussianFitResult {
  std::size_t n = 0;
  double mu = 0.0;
  double sigma = 0.0;
  double mu_err = 0.0;
  double sigma_err = 0.0;
  stats::KsResult goodness;  ///< against Normal(mu, sigma)
};

/// Sample mean and (N-1) standard deviation with their standard errors.
GaussianFitResult fit_gaussian(std::span<const double> readouts);
GaussianFitResult fit_gaussian(const MeasurementRecord& record);

struct ScalingPoint {
  double photon_number_2j = 0.0;
  double sigma = 0.0;
  double sigma_err = 0.0;
};

struct ScalingFitResult {
  double epsilon = 0.0;
  double epsilon_err = 0.0;
  double chi2 = 0.0;
  std::size_t dof = 0;
  bool weighted = true;
  std::vector<ScalingPoint> points;
};

/// Weighted least squares of sigma^2 = epsilon J / 2 through the origin.
/// Weights are 1 / Var(sigma^2) = 1 / (2 sigma sigma_err)^2; if any point has
/// no error estimate the fit falls back to unit weights.
ScalingFitResult fit_sigma_scaling(std::span<const ScalingPoint> points);

struct BinWidth {
  double width;
};
struct BinCount {
  std::size_t count;
};
struct ScottRule {};
using BinSpec = std::variant<ScottRule, BinWidth, BinCount>;

struct Histogram {
  std::vector<double> edges;  ///< size bins + 1
  std::vector<std::size_t> counts;
  std::size_t total = 0;

  std::size_t bins() const { return counts.size(); }
  double bin_width() const { return edges.size() > 1 ? edges[1] - edges[0] : 0.0; }
  std::vector<double> centers() const;
  /// N * width * Normal(center; mu, sigma).
  std::vector<double> theory(double sigma, double mu = 0.0) const;
};

/// Equal-width bins starting at the data minimum; the last bin is closed.
Histogram histogram(std::span<const double> data, BinSpec spec = ScottRule{});

struct CorrelationResult {
  std::size_t n = 0;
  double r = 0.0;
  double ci_low = 0.0;  ///< Fisher-z 95% interval
  double ci_high = 0.0;
};

/// Pearson correlation of paired readouts.
CorrelationResult correlation(std::span<const std::pair<double, double>> pairs);

}  // namespace fastpol
