#include "fastpol/stokes.hpp"

#include <cmath>
#include <string>

#include "fastpol/errors.hpp"

namespace fastpol {

void PulseConfig::validate() const {
  if (!std::isfinite(mean_photon_number) || mean_photon_number < 0.0) {
    throw InvalidParameter("pulse photon number must be finite and >= 0, got " +
                           std::to_string(mean_photon_number));
  }
  if (!std::isfinite(duration) || duration <= 0.0) {
    throw InvalidParameter("pulse duration must be > 0");
  }
  if (!std::isfinite(detuning)) throw InvalidParameter("pulse detuning must be finite");
  if (!std::isfinite(probe_linewidth) || probe_linewidth < 0.0) {
    throw InvalidParameter("probe linewidth must be finite and >= 0");
  }
}

std::string_view to_string(CountingModel model) {
  switch (model) {
    case CountingModel::PoissonSplit: return "poisson";
    case CountingModel::BinomialSplit: return "binomial";
    case CountingModel::GaussianLimit: return "gaussian";
  }
  return "?";
}

std::string_view to_string(UnitsBasis basis) {
  return basis == UnitsBasis::IncidentPhotons ? "incident_photons" : "photoelectrons";
}

std::optional<CountingModel> parse_counting_model(std::string_view name) {
  if (name == "poisson") return CountingModel::PoissonSplit;
  if (name == "binomial") return CountingModel::BinomialSplit;
  if (name == "gaussian") return CountingModel::GaussianLimit;
  return std::nullopt;
}

std::optional<UnitsBasis> parse_units_basis(std::string_view name) {
  if (name == "incident_photons") return UnitsBasis::IncidentPhotons;
  if (name == "photoelectrons") return UnitsBasis::Photoelectrons;
  return std::nullopt;
}

CountingModel default_counting_model(double mean_photon_number) {
  return mean_photon_number >= kGaussianLimitThreshold ? CountingModel::GaussianLimit
                                                       : CountingModel::BinomialSplit;
}

namespace {

std::int64_t integral_total(double mean_photon_number) {
  const double rounded = std::round(mean_photon_number);
  if (std::abs(rounded - mean_photon_number) > 1e-9 * std::max(1.0, mean_photon_number)) {
    throw InvalidParameter("binomial split needs an integral photon number, got " +
                           std::to_string(mean_photon_number));
  }
  return static_cast<std::int64_t>(rounded);
}

}  // namespace

PolarimeterSample sample_vacuum_outcome(const PulseConfig& pulse, CountingModel model,
                                        RandomStream& rng) {
  if (!std::isfinite(pulse.mean_photon_number) || pulse.mean_photon_number < 0.0) {
    throw InvalidParameter("photon number must be finite and >= 0");
  }
  PolarimeterSample sample;
  sample.units_basis = UnitsBasis::IncidentPhotons;
  if (pulse.mean_photon_number == 0.0) return sample;

  switch (model) {
    case CountingModel::PoissonSplit: {
      // Poisson(2J) thinned with p = 1/2 gives two independent Poisson(J) ports.
      sample.n_plus = draw_poisson(pulse.j(), rng);
      sample.n_minus = draw_poisson(pulse.j(), rng);
      break;
    }
    case CountingModel::BinomialSplit: {
      const std::int64_t total = integral_total(pulse.mean_photon_number);
      sample.n_plus = draw_binomial(total, 0.5, rng);
      sample.n_minus = total - sample.n_plus;
      break;
    }
    case CountingModel::GaussianLimit: {
      // Rounding a continuous variate adds 1/12 to the variance (Sheppard);
      // subtract it up front so Var(n+ - n-) = 2J, i.e. Var(J_y') = J/2.
      const double variance = std::max(pulse.mean_photon_number - 1.0 / 12.0, 0.0);
      const auto diff =
          static_cast<std::int64_t>(std::llround(draw_normal(0.0, std::sqrt(variance), rng)));
      auto total = static_cast<std::int64_t>(std::llround(pulse.mean_photon_number));
      if (total < std::abs(diff)) total = std::abs(diff);
      if ((total - diff) % 2 != 0) ++total;
      sample.n_plus = (total + diff) / 2;
      sample.n_minus = (total - diff) / 2;
      break;
    }
  }
  return sample;
}

std::map<double, double> exact_outcome_pmf(std::int64_t total_photons, CountingModel model) {
  if (model != CountingModel::BinomialSplit) {
    throw InvalidParameter("exact pmf is defined for the binomial split only");
  }
  if (total_photons < 0) throw InvalidParameter("photon total must be >= 0");
  if (total_photons > kMaxEnumeratedPhotons) {
    throw InvalidParameter("photon total " + std::to_string(total_photons) +
                           " exceeds the enumeration bound");
  }
  std::map<double, double> pmf;
  const auto n = static_cast<long double>(total_photons);
  const long double log_norm = std::lgamma(n + 1.0L) - n * std::log(2.0L);
  for (std::int64_t k = 0; k <= total_photons; ++k) {
    const auto kk = static_cast<long double>(k);
    const long double log_p = log_norm - std::lgamma(kk + 1.0L) - std::lgamma(n - kk + 1.0L);
    const double jy = static_cast<double>(2 * k - total_photons) / 2.0;
    pmf.emplace(jy, static_cast<double>(std::exp(log_p)));
  }
  return pmf;
}

double vacuum_sigma(const PulseConfig& pulse) {
  if (!(pulse.mean_photon_number >= 0.0)) throw InvalidParameter("photon number must be >= 0");
  return std::sqrt(pulse.j() / 2.0);
}

}  // namespace fastpol
