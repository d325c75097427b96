#include "fastpol/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "fastpol/errors.hpp"
#include "parallel.hpp"

#ifndef FASTPOL_VERSION
#define FASTPOL_VERSION "unknown"
#endif

namespace fastpol {

std::string_view version() { return FASTPOL_VERSION; }

namespace {

using nlohmann::json;

constexpr std::uint64_t kChainA = 101;
constexpr std::uint64_t kChainB = 102;

PolarimeterChain make_chain(const RunConfig& config, double pulse_duration) {
  try {
    return PolarimeterChain(config.detector, config.trace, pulse_duration, config.peak_strategy,
                            config.topology);
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("detector chain: ") + e.what());
  }
}

/// Reconstructed / true scale of the chain (C_f nominal over actual).
double calibration_scale(const DetectorChainConfig& d) { return 1.0 / d.capacitance_error; }

/// ADC quantization variance in J_y' units.
double quantization_variance(const PolarimeterChain& chain) {
  const auto& d = chain.config();
  const double lsb_jy = d.adc_lsb() / (2.0 * d.shaper_gain * d.sensitivity() * chain.ballistic_deficit());
  return lsb_jy * lsb_jy / 12.0;
}

/// Vacuum variance of chain readouts: r^2 (eta J/2 + excess^2) + quantization.
double chain_vacuum_variance(const PolarimeterChain& chain, const PulseConfig& pulse) {
  const auto& d = chain.config();
  const double r = calibration_scale(d);
  return r * r * (d.quantum_efficiency * pulse.j() / 2.0 +
                  d.excess_noise_electrons * d.excess_noise_electrons) +
         quantization_variance(chain);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Report {
 public:
  template <typename T>
  void add(std::string_view key, const T& value) {
    text_ += fmt::format("{}: {}\n", key, value);
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

json make_manifest(std::string_view command, const RunConfig& config, const std::string& started,
                   const OutputSet& out, json summary, json notes) {
  json files = json::array();
  for (const auto& f : out.files()) {
    files.push_back({{"file", f.name}, {"bytes", f.bytes}, {"fnv1a64", f.fnv1a64}});
  }
  return json{{"manifest_version", 1},
              {"tool", "fastpol"},
              {"version", version()},
              {"command", command},
              {"started_utc", started},
              {"finished_utc", utc_now()},
              {"config", to_json(config)},
              {"outputs", files},
              {"summary", std::move(summary)},
              {"notes", std::move(notes)}};
}

RunOutcome finish_run(OutputSet& out, json manifest, std::optional<std::string> failure) {
  out.write_unlisted("manifest.json", manifest.dump(2) + "\n");
  out.commit();
  RunOutcome o;
  o.dir = out.dir();
  o.files = out.files();
  o.manifest = std::move(manifest);
  o.analysis_failure = std::move(failure);
  return o;
}

std::string readouts_table(const VacuumResult& r) {
  std::string s =
      "pulse_index,n_plus_photons,n_minus_photons,n_plus_photoelectrons,n_minus_photoelectrons,"
      "peak_time_s,peak_voltage_V,j_y_prime_electrons\n";
  for (std::size_t i = 0; i < r.readings.size(); ++i) {
    const auto& inc = r.incident[i];
    const auto& rd = r.readings[i];
    s += fmt::format("{},{},{},{},{},{},{},{}\n", i, inc.n_plus, inc.n_minus, rd.photoelectrons.n_plus,
                     rd.photoelectrons.n_minus, rd.peak.time, rd.peak.volts, rd.peak.j_y_prime);
  }
  return s;
}

std::string histogram_table(const Histogram& h, double sigma) {
  std::string s = "bin_low_electrons,bin_high_electrons,bin_center_electrons,count,theory_count\n";
  const auto centers = h.centers();
  const auto theory = h.theory(sigma);
  for (std::size_t i = 0; i < h.bins(); ++i) {
    s += fmt::format("{},{},{},{},{}\n", h.edges[i], h.edges[i + 1], centers[i], h.counts[i], theory[i]);
  }
  return s;
}

json vacuum_summary(const VacuumResult& r) {
  json s{{"photon_number_2j", r.photon_number_2j},
         {"calibrated_photon_number_2j", r.calibrated_photon_number_2j},
         {"theory_sigma", r.theory_sigma},
         {"ballistic_deficit", r.ballistic_deficit},
         {"pulses", r.record.readouts.size()}};
  if (r.fit) {
    s["sigma_hat"] = r.fit->sigma;
    s["sigma_err"] = r.fit->sigma_err;
    s["mu_hat"] = r.fit->mu;
    s["mu_err"] = r.fit->mu_err;
    s["ks_statistic_fit"] = r.fit->goodness.statistic;
    s["ks_p_fit"] = r.fit->goodness.p_value;
    s["ks_statistic_theory"] = r.ks_theory.statistic;
    s["ks_p_theory"] = r.ks_theory.p_value;
  } else {
    s["fit_error"] = r.fit_error;
  }
  return s;
}

void reject_linearization(const InteractionParams& params, const SpinEnsembleState& spins) {
  if (!params.small_rotation(spins)) {
    throw LinearizationError(fmt::format(
        "alpha t1 = {} with <S_z> = {}, var = {} leaves the small-rotation regime",
        params.rotation_per_unit(), spins.mean_sz, spins.var_sz));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Vacuum noise

VacuumResult simulate_vacuum(const RunConfig& config) {
  return simulate_vacuum(config, config.pulse.mean_photon_number, RandomStream(config.seed));
}

VacuumResult simulate_vacuum(const RunConfig& config, double photon_number_2j,
                             const RandomStream& root) {
  PulseConfig pulse = config.pulse;
  pulse.mean_photon_number = photon_number_2j;
  try {
    pulse.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  const CountingModel model = config.model_for(photon_number_2j);
  const PolarimeterChain chain = make_chain(config, pulse.duration);

  const std::size_t n = config.n_pulses;
  VacuumResult r;
  r.photon_number_2j = photon_number_2j;
  r.ballistic_deficit = chain.ballistic_deficit();
  r.incident.resize(n);
  r.readings.resize(n);
  detail::parallel_for(n, config.threads, [&](std::size_t i) {
    RandomStream rng = root.substream(i);
    RandomStream incident_rng = substream(rng, StreamTag::Incident);
    r.incident[i] = sample_vacuum_outcome(pulse, model, incident_rng);
    r.readings[i] = chain.measure(r.incident[i], rng);
  });

  double blocked = 0.0;
  r.record.readouts.reserve(n);
  for (const auto& rd : r.readings) {
    r.record.readouts.push_back(rd.peak.j_y_prime);
    blocked += chain.blocked_port_j(rd.photoelectrons);
  }
  r.calibrated_photon_number_2j = 2.0 * blocked / static_cast<double>(n);
  r.record.units_basis = config.units_basis;
  r.record.photon_number_2j = config.units_basis == UnitsBasis::Photoelectrons
                                  ? r.calibrated_photon_number_2j
                                  : photon_number_2j;
  r.record.pulse_duration = pulse.duration;
  r.record.seed = config.seed;
  r.theory_sigma = std::sqrt(config.detector.quantum_efficiency * pulse.j() / 2.0);

  try {
    r.fit = fit_gaussian(r.record);
    r.ks_theory = r.theory_sigma > 0.0
                      ? stats::ks_test_normal(r.record.readouts, 0.0, r.theory_sigma)
                      : stats::ks_test_normal(r.record.readouts, 0.0, 0.0);
  } catch (const AnalysisError& e) {
    r.fit.reset();
    r.fit_error = e.what();
  }
  r.histogram = histogram(r.record.readouts);
  return r;
}

RunOutcome run_vacuum(const RunConfig& config, const std::filesystem::path& out_dir) {
  const std::string started = utc_now();
  const VacuumResult r = simulate_vacuum(config);

  OutputSet out(out_dir);
  out.write("readouts.csv", readouts_table(r));
  out.write("histogram.csv", histogram_table(r.histogram, r.theory_sigma));

  Report rep;
  rep.add("command", "vacuum");
  rep.add("pulses", r.record.readouts.size());
  rep.add("photon_number_2j", r.photon_number_2j);
  rep.add("calibrated_photon_number_2j", r.calibrated_photon_number_2j);
  rep.add("pulse_duration_s", r.record.pulse_duration);
  rep.add("counting_model", to_string(config.model_for(r.photon_number_2j)));
  rep.add("ballistic_deficit", r.ballistic_deficit);
  rep.add("theory_sigma_electrons", r.theory_sigma);
  if (r.fit) {
    rep.add("mu_hat_electrons", r.fit->mu);
    rep.add("mu_err_electrons", r.fit->mu_err);
    rep.add("sigma_hat_electrons", r.fit->sigma);
    rep.add("sigma_err_electrons", r.fit->sigma_err);
    rep.add("sigma_ratio_to_theory", r.theory_sigma > 0.0 ? r.fit->sigma / r.theory_sigma : 0.0);
    rep.add("ks_statistic_vs_fit", r.fit->goodness.statistic);
    rep.add("ks_p_vs_fit", r.fit->goodness.p_value);
    rep.add("ks_statistic_vs_theory", r.ks_theory.statistic);
    rep.add("ks_p_vs_theory", r.ks_theory.p_value);
  } else {
    rep.add("fit", "refused");
    rep.add("fit_error", r.fit_error);
  }
  out.write("fit.txt", rep.str());

  std::optional<std::string> failure;
  if (!r.fit) failure = r.fit_error;
  json manifest = make_manifest("vacuum", config, started, out, vacuum_summary(r), json::array());
  return finish_run(out, std::move(manifest), failure);
}

// ---------------------------------------------------------------------------
// Photon-number sweep

SweepResult simulate_sweep(const RunConfig& config) {
  if (config.sweep_photon_numbers.size() < 3) {
    throw ConfigError("sweep needs at least three photon numbers");
  }
  const auto [lo, hi] = std::minmax_element(config.sweep_photon_numbers.begin(), config.sweep_photon_numbers.end());
  if (*hi < 10.0 * *lo) throw ConfigError("sweep photon numbers must span at least one decade");
  const RandomStream root = substream(RandomStream(config.seed), StreamTag::SweepPoint);
  SweepResult s;
  s.basis = config.units_basis;
  s.calibration_hypothesis = config.detector.capacitance_error != 1.0;
  std::vector<ScalingPoint> points;
  for (std::size_t k = 0; k < config.sweep_photon_numbers.size(); ++k) {
    VacuumResult r = simulate_vacuum(config, config.sweep_photon_numbers[k], root.substream(k));
    if (!r.fit) throw TooFewSamples("sweep point " + std::to_string(k) + ": " + r.fit_error);
    points.push_back({r.record.photon_number_2j, r.fit->sigma, r.fit->sigma_err});
    s.points.push_back(std::move(r));
  }
  s.fit = fit_sigma_scaling(points);
  return s;
}

RunOutcome run_sweep(const RunConfig& config, const std::filesystem::path& out_dir) {
  const std::string started = utc_now();
  const SweepResult s = simulate_sweep(config);

  OutputSet out(out_dir);
  std::string table =
      "point,photon_number_2j,calibrated_photon_number_2j,reference_photon_number_2j,"
      "sigma_electrons,sigma_err_electrons,pulses\n";
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    const auto& p = s.points[k];
    table += fmt::format("{},{},{},{},{},{},{}\n", k, p.photon_number_2j, p.calibrated_photon_number_2j,
                         p.record.photon_number_2j, p.fit->sigma, p.fit->sigma_err,
                         p.record.readouts.size());
    out.write(fmt::format("point_{:02}_readouts.csv", k), readouts_table(p));
  }
  out.write("sweep.csv", table);

  Report rep;
  rep.add("command", "sweep");
  rep.add("points", s.points.size());
  rep.add("pulses_per_point", config.n_pulses);
  rep.add("reference_basis", to_string(s.basis));
  rep.add("epsilon_hat", s.fit.epsilon);
  rep.add("epsilon_err", s.fit.epsilon_err);
  rep.add("chi2", s.fit.chi2);
  rep.add("dof", s.fit.dof);
  rep.add("weighted", s.fit.weighted);
  rep.add("capacitance_error", config.detector.capacitance_error);
  json notes = json::array();
  if (s.calibration_hypothesis) {
    const std::string note = fmt::format(
        "epsilon reflects an injected feedback-capacitance calibration error (actual/nominal = {}); "
        "this is a simulator hypothesis, not a measured property of the chain",
        config.detector.capacitance_error);
    rep.add("hypothesis", note);
    notes.push_back(note);
  }
  out.write("scaling_fit.txt", rep.str());

  json summary{{"epsilon_hat", s.fit.epsilon},
               {"epsilon_err", s.fit.epsilon_err},
               {"chi2", s.fit.chi2},
               {"reference_basis", to_string(s.basis)},
               {"calibration_hypothesis", s.calibration_hypothesis}};
  json sigmas = json::array();
  for (const auto& p : s.points) sigmas.push_back(p.fit->sigma);
  summary["sigma_hat"] = sigmas;
  return finish_run(out, make_manifest("sweep", config, started, out, summary, notes), std::nullopt);
}

// ---------------------------------------------------------------------------
// QND broadening

QndResult simulate_qnd(const RunConfig& config) {
  if (!config.interaction || !config.spins) {
    throw ConfigError("qnd run needs both 'interaction' and 'spins' sections");
  }
  const InteractionParams& params = *config.interaction;
  const SpinEnsembleState& spins = *config.spins;
  const PulseConfig& pulse = config.pulse;
  reject_linearization(params, spins);
  const CountingModel model = config.model_for(pulse.mean_photon_number);

  std::optional<PolarimeterChain> chain;
  if (config.qnd_through_chain) chain.emplace(make_chain(config, pulse.duration));

  const std::size_t n = config.n_pulses;
  if (n < 2) throw TooFewSamples("qnd run needs at least two pulses");
  QndResult r;
  r.true_sz.resize(n);
  r.readouts.resize(n);
  const RandomStream root(config.seed);
  detail::parallel_for(n, config.threads, [&](std::size_t i) {
    RandomStream rng = root.substream(i);
    const QndOutcome o = sample_qnd_outcome(params, pulse, spins, model, rng);
    r.true_sz[i] = o.true_sz;
    r.readouts[i] = chain ? chain->measure(o.sample, rng).peak.j_y_prime : o.sample.j_y_prime();
  });

  r.kappa2 = kappa_squared(params, pulse, spins);
  const double coupling = params.rotation_per_unit() * pulse.j();
  if (chain) {
    const auto& d = chain->config();
    const double eta = d.quantum_efficiency;
    const double scale = calibration_scale(d);
    r.readout_basis = UnitsBasis::Photoelectrons;
    r.predicted_mean = scale * eta * coupling * spins.mean_sz;
    r.predicted_variance =
        chain_vacuum_variance(*chain, pulse) + scale * scale * eta * eta * coupling * coupling * spins.var_sz;
  } else {
    r.readout_basis = UnitsBasis::IncidentPhotons;
    r.predicted_mean = coupling * spins.mean_sz;
    r.predicted_variance = broadened_variance(params, pulse, spins);
  }
  r.empirical_mean = stats::mean(r.readouts);
  r.empirical_variance = stats::variance(r.readouts);
  r.variance_se = r.empirical_variance * std::sqrt(2.0 / static_cast<double>(n - 1));
  return r;
}

RunOutcome run_qnd(const RunConfig& config, const std::filesystem::path& out_dir) {
  const std::string started = utc_now();
  const QndResult r = simulate_qnd(config);

  OutputSet out(out_dir);
  const std::string unit = r.readout_basis == UnitsBasis::Photoelectrons ? "electrons" : "photons";
  std::string table = fmt::format("pulse_index,true_sz_spin,j_y_prime_{}\n", unit);
  for (std::size_t i = 0; i < r.readouts.size(); ++i) {
    table += fmt::format("{},{},{}\n", i, r.true_sz[i], r.readouts[i]);
  }
  out.write("qnd_readouts.csv", table);

  const PulseConfig& pulse = config.pulse;
  Report rep;
  rep.add("command", "qnd");
  rep.add("pulses", r.readouts.size());
  rep.add("readout_basis", to_string(r.readout_basis));
  rep.add("kappa_squared", r.kappa2);
  rep.add("vacuum_variance_J_over_2", pulse.j() / 2.0);
  rep.add("predicted_mean", r.predicted_mean);
  rep.add("empirical_mean", r.empirical_mean);
  rep.add("predicted_variance", r.predicted_variance);
  rep.add("empirical_variance", r.empirical_variance);
  rep.add("variance_standard_error", r.variance_se);
  rep.add("variance_z_score", r.variance_z());
  rep.add("within_3_standard_errors", std::abs(r.variance_z()) < 3.0);
  out.write("qnd_report.txt", rep.str());

  json summary{{"kappa_squared", r.kappa2},
               {"predicted_variance", r.predicted_variance},
               {"empirical_variance", r.empirical_variance},
               {"variance_se", r.variance_se},
               {"empirical_mean", r.empirical_mean}};
  return finish_run(out, make_manifest("qnd", config, started, out, summary, json::array()), std::nullopt);
}

// ---------------------------------------------------------------------------
// Two-pulse correlation

TwoPulseResult simulate_two_pulse(const RunConfig& config) {
  const PulseConfig& pulse = config.pulse;
  if (config.pulse_separation < pulse.duration) {
    throw ConfigError("pulse separation must be at least the pulse duration");
  }
  const InteractionParams params = config.interaction.value_or(InteractionParams{0.0, 1.0});
  const SpinEnsembleState spins = config.spins.value_or(RunConfig::default_spins());
  reject_linearization(params, spins);
  const CountingModel model = config.model_for(pulse.mean_photon_number);

  std::optional<PolarimeterChain> first_chain, second_chain;
  if (config.qnd_through_chain) {
    first_chain.emplace(make_chain(config, pulse.duration));
    second_chain.emplace(make_chain(config, pulse.duration));
  }

  const std::size_t n = config.n_pulses;
  TwoPulseResult r;
  r.pairs.resize(n);
  r.readouts.resize(n);
  const RandomStream root(config.seed);
  detail::parallel_for(n, config.threads, [&](std::size_t i) {
    const RandomStream rng = root.substream(i);
    RandomStream pair_rng = rng;
    r.pairs[i] = sample_qnd_pair(params, pulse, spins, config.pulse_separation, model, pair_rng);
    if (first_chain) {
      RandomStream a = rng.substream(kChainA);
      RandomStream b = rng.substream(kChainB);
      r.readouts[i] = {first_chain->measure(r.pairs[i].first, a).peak.j_y_prime,
                       second_chain->measure(r.pairs[i].second, b).peak.j_y_prime};
    } else {
      r.readouts[i] = {r.pairs[i].first.j_y_prime(), r.pairs[i].second.j_y_prime()};
    }
  });
  for (const auto& p : r.pairs) r.spin_redraws += p.spin_redrawn ? 1 : 0;

  const double coupling = params.rotation_per_unit() * pulse.j();
  double signal_variance = coupling * coupling * spins.var_sz;
  if (first_chain) {
    const auto& d = first_chain->config();
    const double scale = calibration_scale(d) * d.quantum_efficiency;
    r.readout_basis = UnitsBasis::Photoelectrons;
    r.vacuum_variance = chain_vacuum_variance(*first_chain, pulse);
    signal_variance *= scale * scale;
  } else {
    r.readout_basis = UnitsBasis::IncidentPhotons;
    r.vacuum_variance = pulse.j() / 2.0;
  }
  r.vacuum_mode = signal_variance == 0.0;
  r.kappa2 = r.vacuum_variance > 0.0 ? signal_variance / r.vacuum_variance : 0.0;
  r.predicted_correlation = r.spin_redraws == n ? 0.0 : r.kappa2 / (1.0 + r.kappa2);

  r.correlation = correlation(r.readouts);
  r.conditional = conditional_variance(std::span<const std::pair<double, double>>(r.readouts),
                                       r.vacuum_variance);
  r.null_bound = 3.0 / std::sqrt(static_cast<double>(n));
  r.null_bound_holds = !r.vacuum_mode || std::abs(r.correlation.r) < r.null_bound;
  return r;
}

RunOutcome run_two_pulse(const RunConfig& config, const std::filesystem::path& out_dir) {
  const std::string started = utc_now();
  const TwoPulseResult r = simulate_two_pulse(config);

  OutputSet out(out_dir);
  const std::string unit = r.readout_basis == UnitsBasis::Photoelectrons ? "electrons" : "photons";
  std::string table = fmt::format("pair_index,true_sz_spin,second_sz_spin,j_y_prime_1_{0},j_y_prime_2_{0}\n", unit);
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    table += fmt::format("{},{},{},{},{}\n", i, r.pairs[i].true_sz, r.pairs[i].second_sz,
                         r.readouts[i].first, r.readouts[i].second);
  }
  out.write("pairs.csv", table);

  Report rep;
  rep.add("command", "two-pulse");
  rep.add("pairs", r.pairs.size());
  rep.add("pulse_separation_s", config.pulse_separation);
  rep.add("readout_basis", to_string(r.readout_basis));
  rep.add("vacuum_mode", r.vacuum_mode);
  rep.add("kappa_squared", r.kappa2);
  rep.add("pearson_r", r.correlation.r);
  rep.add("pearson_r_ci95_low", r.correlation.ci_low);
  rep.add("pearson_r_ci95_high", r.correlation.ci_high);
  rep.add("predicted_r", r.predicted_correlation);
  rep.add("null_bound_3_over_sqrt_n", r.null_bound);
  if (r.vacuum_mode) rep.add("null_bound_holds", r.null_bound_holds);
  rep.add("regression_beta", r.conditional.beta);
  rep.add("unconditioned_variance", r.conditional.unconditioned_variance);
  rep.add("conditional_variance", r.conditional.conditional_variance);
  rep.add("variance_ratio", r.conditional.variance_ratio);
  rep.add("vacuum_variance", r.vacuum_variance);
  if (r.conditional.spin_noise_reduction) {
    rep.add("spin_noise_reduction", *r.conditional.spin_noise_reduction);
    rep.add("predicted_spin_noise_reduction", 1.0 / (1.0 + r.kappa2));
  }
  json notes = json::array();
  if (r.spin_redraws > 0) {
    const std::string note = fmt::format(
        "pulse separation {} s is not below T2; S_z was redrawn for the second pulse of {} pairs",
        config.pulse_separation, r.spin_redraws);
    rep.add("warning", note);
    notes.push_back(note);
  }
  out.write("correlation.txt", rep.str());

  json summary{{"pearson_r", r.correlation.r},
               {"ci_low", r.correlation.ci_low},
               {"ci_high", r.correlation.ci_high},
               {"variance_ratio", r.conditional.variance_ratio},
               {"vacuum_mode", r.vacuum_mode}};
  if (r.conditional.spin_noise_reduction) summary["spin_noise_reduction"] = *r.conditional.spin_noise_reduction;

  std::optional<std::string> failure;
  if (!r.null_bound_holds) {
    failure = fmt::format("vacuum pairs correlate: |r| = {} exceeds 3/sqrt(N) = {}",
                          std::abs(r.correlation.r), r.null_bound);
  }
  return finish_run(out, make_manifest("two-pulse", config, started, out, summary, notes), failure);
}

// ---------------------------------------------------------------------------
// Waveform demo

WaveformDemoResult simulate_waveform(const RunConfig& config) {
  const PolarimeterChain chain = make_chain(config, config.pulse.duration);
  WaveformDemoResult r;
  r.charge = config.waveform_charge;
  r.preamp = chain.preamp(r.charge);
  r.shaped = synth_shaper_waveform(r.preamp, chain.config());
  r.ballistic_deficit = chain.ballistic_deficit();
  if (r.charge != 0.0) {
    const std::size_t pi = r.preamp.argmax_abs();
    const std::size_t si = r.shaped.argmax_abs();
    r.preamp_peak_volts = r.preamp.samples[pi];
    r.preamp_peak_time = r.preamp.time_at(pi);
    r.shaper_peak_volts = r.shaped.samples[si];
    r.shaper_peak_time = r.shaped.time_at(si);
    r.peak_delay = r.shaper_peak_time - config.trace.arrival_time;
    r.peak_delay_from_centroid = r.peak_delay - config.pulse.duration / 2.0;
  }
  return r;
}

RunOutcome run_waveform(const RunConfig& config, const std::filesystem::path& out_dir) {
  const std::string started = utc_now();
  const WaveformDemoResult r = simulate_waveform(config);

  OutputSet out(out_dir);
  std::ostringstream pre, shp;
  write_waveform(pre, r.preamp);
  write_waveform(shp, r.shaped);
  out.write("preamp_waveform.csv", pre.str());
  out.write("shaper_waveform.csv", shp.str());

  Report rep;
  rep.add("command", "waveform");
  rep.add("charge_electrons", r.charge);
  rep.add("pulse_duration_s", config.pulse.duration);
  rep.add("sensitivity_V_per_electron", config.detector.sensitivity());
  rep.add("preamp_peak_V", r.preamp_peak_volts);
  rep.add("preamp_peak_time_s", r.preamp_peak_time);
  rep.add("shaper_peak_V", r.shaper_peak_volts);
  rep.add("shaper_peak_time_s", r.shaper_peak_time);
  rep.add("shaper_peak_delay_from_arrival_s", r.peak_delay);
  rep.add("shaper_peak_delay_from_ramp_centre_s", r.peak_delay_from_centroid);
  rep.add("ballistic_deficit", r.ballistic_deficit);
  out.write("waveform.txt", rep.str());

  json summary{{"preamp_peak_V", r.preamp_peak_volts},
               {"shaper_peak_V", r.shaper_peak_volts},
               {"shaper_peak_delay_s", r.peak_delay},
               {"shaper_peak_delay_from_centroid_s", r.peak_delay_from_centroid}};
  return finish_run(out, make_manifest("waveform", config, started, out, summary, json::array()), std::nullopt);
}

}  // namespace fastpol
