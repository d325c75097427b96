#include "fastpol/spin_qnd.hpp"

#include <cmath>
#include <limits>

#include "fastpol/errors.hpp"

namespace fastpol {

SpinEnsembleState SpinEnsembleState::coherent(std::int64_t atoms) {
  SpinEnsembleState s;
  s.atom_count = atoms;
  s.var_sz = static_cast<double>(atoms) / 4.0;
  return s;
}

void SpinEnsembleState::validate() const {
  if (!std::isfinite(mean_sz)) throw InvalidParameter("mean S_z must be finite");
  if (!std::isfinite(var_sz) || var_sz < 0.0) throw InvalidParameter("S_z variance must be >= 0");
  if (atom_count < 0) throw InvalidParameter("atom count must be >= 0");
  if (!(coherence_time > 0.0)) throw InvalidParameter("coherence time T2 must be > 0");
  if (!(excited_lifetime > 0.0) || !std::isfinite(excited_lifetime)) {
    throw InvalidParameter("excited-state lifetime must be > 0");
  }
}

bool InteractionParams::small_rotation(const SpinEnsembleState& spins) const {
  const double extent = std::abs(spins.mean_sz) + 3.0 * std::sqrt(spins.var_sz);
  return std::abs(rotation_per_unit() * extent) < kSmallRotationLimit;
}

bool InteractionParams::small_rotation(double sz_value) const {
  return std::abs(rotation_per_unit() * sz_value) < kSmallRotationLimit;
}

void InteractionParams::validate() const {
  if (!std::isfinite(coupling_alpha)) throw InvalidParameter("coupling alpha must be finite");
  if (!std::isfinite(interaction_time) || interaction_time < 0.0) {
    throw InvalidParameter("interaction time must be >= 0");
  }
}

double FeasibilityCondition::margin() const {
  if (lhs == 0.0) return rhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return rhs / lhs;
}

bool FeasibilityReport::feasible() const {
  for (const auto& c : conditions) {
    if (!c.satisfied) return false;
  }
  return !conditions.empty();
}

FeasibilityReport check_qnd_feasibility(const PulseConfig& pulse, const SpinEnsembleState& spins) {
  if (!(spins.excited_lifetime > 0.0)) throw InvalidParameter("tau_e must be > 0");
  if (!(pulse.duration > 0.0)) throw InvalidParameter("pulse duration T must be > 0");
  if (!(spins.coherence_time > 0.0)) throw InvalidParameter("coherence time T2 must be > 0");
  if (!(pulse.probe_linewidth >= 0.0)) throw InvalidParameter("probe linewidth must be >= 0");

  const double gamma = spins.natural_linewidth();
  const double long_limit = spins.coherence_time / 10.0;
  FeasibilityReport report;
  report.conditions = {
      {"tau_e < T", spins.excited_lifetime, pulse.duration, spins.excited_lifetime < pulse.duration},
      {"T << T2 (T < T2/10)", pulse.duration, long_limit, pulse.duration < long_limit},
      {"Gamma_p < Gamma", pulse.probe_linewidth, gamma, pulse.probe_linewidth < gamma},
      {"Gamma < |Delta|", gamma, std::abs(pulse.detuning), gamma < std::abs(pulse.detuning)},
  };
  return report;
}

double rotated_jy_mean_shift(const InteractionParams& params, const PulseConfig& pulse,
                             double sz_value) {
  if (!params.small_rotation(sz_value)) {
    throw LinearizationError("alpha t1 S_z = " + std::to_string(params.rotation_per_unit() * sz_value) +
                             " is outside the small-rotation regime");
  }
  return params.rotation_per_unit() * pulse.j() * sz_value;
}

double kappa_squared(const InteractionParams& params, const PulseConfig& pulse,
                     const SpinEnsembleState& spins) {
  const double vacuum = pulse.j() / 2.0;
  if (vacuum == 0.0) return 0.0;
  const double coupling = params.rotation_per_unit() * pulse.j();
  return coupling * coupling * spins.var_sz / vacuum;
}

double broadened_variance(const InteractionParams& params, const PulseConfig& pulse,
                          const SpinEnsembleState& spins) {
  const double coupling = params.rotation_per_unit() * pulse.j();
  return pulse.j() / 2.0 + coupling * coupling * spins.var_sz;
}

double predicted_pair_correlation(const InteractionParams& params, const PulseConfig& pulse,
                                  const SpinEnsembleState& spins) {
  const double k2 = kappa_squared(params, pulse, spins);
  return k2 / (1.0 + k2);
}

PolarimeterSample apply_rotation(const PolarimeterSample& vacuum, double jy_shift,
                                 RandomStream& rng) {
  // Moving k photons from the minus to the plus port raises J_y' by k.
  const double lower = std::floor(jy_shift);
  auto k = static_cast<std::int64_t>(lower);
  if (rng.uniform() < jy_shift - lower) ++k;
  PolarimeterSample out = vacuum;
  if (k > 0) k = std::min(k, out.n_minus);
  if (k < 0) k = std::max(k, -out.n_plus);
  out.n_plus += k;
  out.n_minus -= k;
  return out;
}

namespace {

double draw_sz(const SpinEnsembleState& spins, RandomStream& rng) {
  return draw_normal(spins.mean_sz, std::sqrt(spins.var_sz), rng);
}

PolarimeterSample probe(const InteractionParams& params, const PulseConfig& pulse, double sz,
                        CountingModel model, RandomStream& rng) {
  auto noise_rng = substream(rng, StreamTag::Incident);
  auto rounding_rng = substream(rng, StreamTag::Spin);
  const PolarimeterSample vacuum = sample_vacuum_outcome(pulse, model, noise_rng);
  if (params.rotation_per_unit() == 0.0) return vacuum;
  return apply_rotation(vacuum, rotated_jy_mean_shift(params, pulse, sz), rounding_rng);
}

void require_small_rotation(const InteractionParams& params, const SpinEnsembleState& spins) {
  if (!params.small_rotation(spins)) {
    throw LinearizationError("spin distribution extends outside the small-rotation regime "
                             "(|alpha t1 (|<S_z>| + 3 sd)| must stay below 0.1)");
  }
}

}  // namespace

QndOutcome sample_qnd_outcome(const InteractionParams& params, const PulseConfig& pulse,
                              const SpinEnsembleState& spins, CountingModel model,
                              RandomStream& rng) {
  require_small_rotation(params, spins);
  auto spin_rng = substream(rng, StreamTag::Spin);
  auto pulse_rng = substream(rng, StreamTag::FirstPulse);
  QndOutcome out;
  out.true_sz = draw_sz(spins, spin_rng);
  out.sample = probe(params, pulse, out.true_sz, model, pulse_rng);
  return out;
}

QndOutcomePair sample_qnd_pair(const InteractionParams& params, const PulseConfig& pulse,
                               const SpinEnsembleState& spins, double separation,
                               CountingModel model, RandomStream& rng) {
  require_small_rotation(params, spins);
  auto spin_rng = substream(rng, StreamTag::Spin);
  auto first_rng = substream(rng, StreamTag::FirstPulse);
  auto second_rng = substream(rng, StreamTag::SecondPulse);

  QndOutcomePair pair;
  pair.pulse_separation = separation;
  pair.true_sz = draw_sz(spins, spin_rng);
  pair.second_sz = pair.true_sz;
  if (separation >= spins.coherence_time) {
    pair.spin_redrawn = true;
    pair.second_sz = draw_sz(spins, spin_rng);
  }
  pair.first = probe(params, pulse, pair.true_sz, model, first_rng);
  pair.second = probe(params, pulse, pair.second_sz, model, second_rng);
  return pair;
}

ConditionalVarianceReport conditional_variance(std::span<const QndOutcomePair> pairs,
                                               std::optional<double> vacuum_variance) {
  std::vector<std::pair<double, double>> readouts;
  readouts.reserve(pairs.size());
  for (const auto& p : pairs) readouts.emplace_back(p.first.j_y_prime(), p.second.j_y_prime());
  return conditional_variance(std::span<const std::pair<double, double>>(readouts), vacuum_variance);
}

ConditionalVarianceReport conditional_variance(std::span<const std::pair<double, double>> pairs,
                                               std::optional<double> vacuum_variance) {
  if (pairs.size() < kMinPairs) {
    throw TooFewSamples("conditional variance needs at least 100 pairs, got " +
                        std::to_string(pairs.size()));
  }
  const auto n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw DegenerateData("first readouts have zero variance");

  ConditionalVarianceReport report;
  report.pairs = pairs.size();
  report.beta = sxy / sxx;
  report.unconditioned_variance = syy / (n - 1.0);
  // Residual of the least-squares line; n - 2 degrees of freedom.
  report.conditional_variance = (syy - sxy * sxy / sxx) / (n - 2.0);
  report.variance_ratio = report.unconditioned_variance > 0.0
                              ? report.conditional_variance / report.unconditioned_variance
                              : 1.0;
  if (vacuum_variance) {
    const double prior = report.unconditioned_variance - *vacuum_variance;
    if (prior > 0.0) {
      report.spin_noise_reduction = (report.conditional_variance - *vacuum_variance) / prior;
    }
  }
  return report;
}

}  // namespace fastpol
