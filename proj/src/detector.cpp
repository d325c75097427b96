#include "fastpol/detector.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "fastpol/errors.hpp"

namespace fastpol {

std::string_view to_string(PeakStrategy strategy) {
  return strategy == PeakStrategy::GlobalMax ? "global_max" : "fixed_time";
}

std::string_view to_string(ChainTopology topology) {
  return topology == ChainTopology::DifferenceCurrent ? "difference_current" : "dual_chain";
}

std::optional<PeakStrategy> parse_peak_strategy(std::string_view name) {
  if (name == "global_max") return PeakStrategy::GlobalMax;
  if (name == "fixed_time") return PeakStrategy::FixedTime;
  return std::nullopt;
}

std::optional<ChainTopology> parse_chain_topology(std::string_view name) {
  if (name == "difference_current") return ChainTopology::DifferenceCurrent;
  if (name == "dual_chain") return ChainTopology::DualChain;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Configuration

double DetectorChainConfig::adc_lsb() const {
  return 2.0 * adc_full_scale / std::ldexp(1.0, adc_bits);
}

DetectorChainConfig DetectorChainConfig::ideal() {
  DetectorChainConfig c;
  c.quantum_efficiency = 1.0;
  c.extinction_ratio = 0.0;
  c.excess_noise_electrons = 0.0;
  return c;
}

void DetectorChainConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter(std::string(what) + " must be > 0");
  };
  if (!(quantum_efficiency >= 0.0 && quantum_efficiency <= 1.0)) {
    throw InvalidParameter("quantum efficiency must lie in [0, 1], got " +
                           std::to_string(quantum_efficiency));
  }
  positive(feedback_capacitance, "feedback capacitance");
  positive(feedback_resistance, "feedback resistance");
  positive(shaper_peak_time, "shaper peak time");
  positive(shaper_gain, "shaper gain");
  positive(adc_full_scale, "ADC full scale");
  positive(capacitance_error, "capacitance error factor");
  if (shaper_order < 1 || shaper_order > 8) throw InvalidParameter("shaper order must be 1..8");
  if (!(extinction_ratio >= 0.0 && extinction_ratio <= 1.0)) {
    throw InvalidParameter("extinction ratio must lie in [0, 1]");
  }
  if (!(excess_noise_electrons >= 0.0) || !std::isfinite(excess_noise_electrons)) {
    throw InvalidParameter("excess noise must be >= 0");
  }
  if (adc_bits < 2 || adc_bits > 32) throw InvalidParameter("ADC bits must be 2..32");
}

std::size_t TraceParams::sample_count() const {
  return static_cast<std::size_t>(std::llround(window / sample_period)) + 1;
}

// ---------------------------------------------------------------------------
// Waveforms

std::size_t WaveformTrace::argmax_abs() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (std::abs(samples[i]) > std::abs(samples[best])) best = i;
  }
  return best;
}

double WaveformTrace::peak_abs() const {
  return samples.empty() ? 0.0 : std::abs(samples[argmax_abs()]);
}

void WaveformTrace::validate() const {
  if (!(sample_period > 0.0)) throw InvalidParameter("trace sample period must be > 0");
  if (samples.size() < 2) throw InvalidParameter("trace needs at least two samples");
  for (double v : samples) {
    if (!std::isfinite(v)) throw InvalidParameter("trace contains a non-finite sample");
  }
}

WaveformTrace& WaveformTrace::operator+=(const WaveformTrace& other) {
  if (other.size() != size() || other.sample_period != sample_period || other.t0 != t0) {
    throw InvalidParameter("cannot add traces on different time grids");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] += other.samples[i];
  return *this;
}

WaveformTrace operator+(WaveformTrace a, const WaveformTrace& b) {
  a += b;
  return a;
}

void write_waveform(std::ostream& os, const WaveformTrace& trace) {
  os << "time_s,voltage_V\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    os << fmt::format("{},{}\n", trace.time_at(i), trace.samples[i]);
  }
}

// ---------------------------------------------------------------------------
// Photodetection

PolarimeterSample detect_photons(const PolarimeterSample& incident,
                                 const DetectorChainConfig& config, RandomStream& rng) {
  if (incident.units_basis != UnitsBasis::IncidentPhotons) {
    throw InvalidParameter("detect_photons expects incident-photon counts");
  }
  if (!(config.quantum_efficiency >= 0.0 && config.quantum_efficiency <= 1.0)) {
    throw InvalidParameter("quantum efficiency must lie in [0, 1]");
  }
  if (!(config.extinction_ratio >= 0.0 && config.extinction_ratio <= 1.0)) {
    throw InvalidParameter("extinction ratio must lie in [0, 1]");
  }
  const std::int64_t to_minus = draw_binomial(incident.n_plus, config.extinction_ratio, rng);
  const std::int64_t to_plus = draw_binomial(incident.n_minus, config.extinction_ratio, rng);
  const std::int64_t plus = incident.n_plus - to_minus + to_plus;
  const std::int64_t minus = incident.n_minus - to_plus + to_minus;

  PolarimeterSample out;
  out.units_basis = UnitsBasis::Photoelectrons;
  out.n_plus = draw_binomial(plus, config.quantum_efficiency, rng);
  out.n_minus = draw_binomial(minus, config.quantum_efficiency, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Preamp

namespace {

/// Leaky-integrator response at time u after the start of collection.
double preamp_response(double amplitude, double duration, double tail, double u) {
  if (u < 0.0) return 0.0;
  if (duration <= 0.0) return amplitude * std::exp(-u / tail);
  const double ramp_gain = tail / duration;
  if (u < duration) return -amplitude * ramp_gain * std::expm1(-u / tail);
  const double at_end = -amplitude * ramp_gain * std::expm1(-duration / tail);
  return at_end * std::exp(-(u - duration) / tail);
}

double preamp_peak(double amplitude, double duration, double tail) {
  return preamp_response(amplitude, duration, tail, duration);
}

}  // namespace

WaveformTrace synth_preamp_waveform(double charge_electrons, double pulse_duration,
                                    const DetectorChainConfig& config, const TraceParams& trace) {
  if (!std::isfinite(charge_electrons)) throw InvalidParameter("charge must be finite");
  if (!(pulse_duration >= 0.0)) throw InvalidParameter("pulse duration must be >= 0");
  if (!(trace.sample_period > 0.0)) throw InvalidParameter("sample period must be > 0");
  const double tail = config.actual_tail_time();
  if (pulse_duration >= tail / 100.0) {
    throw InvalidParameter("pulse duration must be below 1% of the preamp tail time");
  }
  if (trace.window < trace.arrival_time + pulse_duration || trace.arrival_time < 0.0) {
    throw InvalidParameter("trace window is shorter than the pulse");
  }

  WaveformTrace out;
  out.t0 = 0.0;
  out.sample_period = trace.sample_period;
  out.samples.resize(std::max<std::size_t>(trace.sample_count(), 2));
  if (charge_electrons == 0.0) return out;

  const double amplitude = charge_electrons * config.actual_sensitivity();
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = preamp_response(amplitude, pulse_duration, tail, out.time_at(i) - trace.arrival_time);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shaper

namespace {

/// One-pole low pass y' = (x - y)/tau, exact for piecewise-linear input.
class LowPass {
 public:
  LowPass(double tau, double dt)
      : decay_(std::exp(-dt / tau)), slope_(1.0 - (tau / dt) * -std::expm1(-dt / tau)) {}

  void run(std::vector<double>& x) const {
    if (x.empty()) return;
    double y = x[0];
    double prev = x[0];
    for (double& v : x) {
      const double in = v;
      y = decay_ * y + (1.0 - decay_) * prev + slope_ * (in - prev);
      prev = in;
      v = y;
    }
  }

 private:
  double decay_;
  double slope_;
};

double step_response_peak(int order) {
  // (t/tau)^n e^{-t/tau} / n! evaluated at t = n tau.
  const double n = order;
  return std::exp(n * std::log(n) - n - std::lgamma(n + 1.0));
}

}  // namespace

WaveformTrace synth_shaper_waveform(const WaveformTrace& preamp, const DetectorChainConfig& config) {
  preamp.validate();
  const double peak_time = config.shaper_peak_time;
  if (preamp.sample_period > peak_time / 50.0) {
    throw SimulationError(fmt::format("sample period {} s under-resolves the {} s shaper",
                                      preamp.sample_period, peak_time));
  }
  const double span = static_cast<double>(preamp.size() - 1) * preamp.sample_period;
  if (span < 5.0 * peak_time * (1.0 - 1e-9)) {
    throw SimulationError("preamp trace must cover at least five shaper peak times");
  }

  const double tau = peak_time / config.shaper_order;
  const LowPass lowpass(tau, preamp.sample_period);

  // CR stage as x - b LP(x); b = 1 - tau/tau_f moves the zero onto the
  // preamp pole so the tail no longer undershoots.
  const double b = config.pole_zero_cancellation ? 1.0 - tau / config.actual_tail_time() : 1.0;
  std::vector<double> filtered = preamp.samples;
  lowpass.run(filtered);
  for (std::size_t i = 0; i < filtered.size(); ++i) {
    filtered[i] = preamp.samples[i] - b * filtered[i];
  }
  for (int stage = 0; stage < config.shaper_order; ++stage) lowpass.run(filtered);

  const double gain = config.shaper_gain / step_response_peak(config.shaper_order);
  for (double& v : filtered) v *= gain;

  WaveformTrace out;
  out.t0 = preamp.t0;
  out.sample_period = preamp.sample_period;
  out.samples = std::move(filtered);
  return out;
}

double calibrate_ballistic_deficit(const DetectorChainConfig& config, double pulse_duration) {
  const double peak_time = config.shaper_peak_time;
  if (!(pulse_duration >= 0.0) || !(pulse_duration < peak_time)) {
    throw InvalidParameter("ballistic deficit needs 0 <= pulse duration < shaper peak time");
  }
  TraceParams fine;
  fine.sample_period = std::min(1e-9, peak_time / 1000.0);
  fine.arrival_time = 20.0 * fine.sample_period;
  fine.window = fine.arrival_time + pulse_duration + 5.0 * peak_time;

  constexpr double kCharge = 1e6;
  const WaveformTrace shaped =
      synth_shaper_waveform(synth_preamp_waveform(kCharge, pulse_duration, config, fine), config);
  const double ideal = config.shaper_gain * kCharge * config.actual_sensitivity();
  return shaped.peak_abs() / ideal;
}

// ---------------------------------------------------------------------------
// Readout

double quantize(double volts, const DetectorChainConfig& config) {
  if (std::abs(volts) > config.adc_full_scale) {
    throw ClippingError(fmt::format("ADC clipping: |{} V| exceeds the {} V full scale", volts,
                                    config.adc_full_scale));
  }
  const double lsb = config.adc_lsb();
  const double top = std::ldexp(1.0, config.adc_bits - 1);
  const double code = std::clamp(std::round(volts / lsb), -top, top - 1.0);
  return code * lsb;
}

namespace {

std::size_t locate_peak(const WaveformTrace& trace, const PeakReadout& readout) {
  if (readout.strategy == PeakStrategy::FixedTime) {
    const double pos = std::round((readout.sample_time - trace.t0) / trace.sample_period);
    if (pos <= 0.0 || pos >= static_cast<double>(trace.size() - 1)) {
      throw PeakAtEdgeError("fixed read time lies outside the trace interior");
    }
    return static_cast<std::size_t>(pos);
  }
  const std::size_t idx = trace.argmax_abs();
  if (trace.samples[idx] == 0.0) {
    // No charge: a flat trace has no maximum, read where the peak would be.
    return locate_peak(trace, PeakReadout{PeakStrategy::FixedTime, readout.sample_time, 1.0});
  }
  if (idx == 0 || idx + 1 == trace.size()) {
    throw PeakAtEdgeError("shaped peak sits at the trace edge");
  }
  return idx;
}

double volts_per_jy(const DetectorChainConfig& config, double deficit, bool actual) {
  const double sens = actual ? config.actual_sensitivity() : config.sensitivity();
  // J_y' = (n+ - n-) / 2, so one unit of J_y' is two electrons of difference.
  return 2.0 * config.shaper_gain * sens * deficit;
}

PeakReading finish(std::size_t idx, const WaveformTrace& trace, double volts,
                   const DetectorChainConfig& config, double deficit) {
  PeakReading r;
  r.index = idx;
  r.time = trace.time_at(idx);
  r.volts = volts;
  r.j_y_prime = volts / volts_per_jy(config, deficit, false);
  r.difference_electrons = 2.0 * r.j_y_prime;
  return r;
}

}  // namespace

PeakReading read_peak(const WaveformTrace& shaped, const DetectorChainConfig& config,
                      const PeakReadout& readout, RandomStream& rng) {
  shaped.validate();
  const std::size_t idx = locate_peak(shaped, readout);
  const double noise_sd =
      config.excess_noise_electrons * volts_per_jy(config, readout.ballistic_deficit, true);
  const double volts = quantize(shaped.samples[idx] + draw_normal(0.0, noise_sd, rng), config);
  return finish(idx, shaped, volts, config, readout.ballistic_deficit);
}

PeakReading read_peak_dual(const WaveformTrace& shaped_plus, const WaveformTrace& shaped_minus,
                           const DetectorChainConfig& config, const PeakReadout& readout,
                           RandomStream& rng) {
  shaped_plus.validate();
  WaveformTrace difference = shaped_plus;
  for (std::size_t i = 0; i < difference.size(); ++i) difference.samples[i] -= shaped_minus.samples.at(i);
  const std::size_t idx = locate_peak(difference, readout);
  const double noise_sd =
      config.excess_noise_electrons * volts_per_jy(config, readout.ballistic_deficit, true);
  const double plus = quantize(shaped_plus.samples[idx] + draw_normal(0.0, noise_sd, rng), config);
  const double minus = quantize(shaped_minus.samples[idx], config);
  return finish(idx, shaped_plus, plus - minus, config, readout.ballistic_deficit);
}

// ---------------------------------------------------------------------------
// Chain

PolarimeterChain::PolarimeterChain(DetectorChainConfig config, TraceParams trace,
                                   double pulse_duration, PeakStrategy strategy,
                                   ChainTopology topology)
    : config_(config), trace_(trace), pulse_duration_(pulse_duration), topology_(topology) {
  config_.validate();
  readout_.strategy = strategy;
  readout_.ballistic_deficit = calibrate_ballistic_deficit(config_, pulse_duration_);
  const WaveformTrace reference = shaped(1e6);
  nominal_peak_time_ = reference.time_at(reference.argmax_abs());
  readout_.sample_time = nominal_peak_time_;
}

WaveformTrace PolarimeterChain::preamp(double charge_electrons) const {
  return synth_preamp_waveform(charge_electrons, pulse_duration_, config_, trace_);
}

WaveformTrace PolarimeterChain::shaped(double charge_electrons) const {
  return synth_shaper_waveform(preamp(charge_electrons), config_);
}

PeakReading PolarimeterChain::read(const PolarimeterSample& photoelectrons, RandomStream& rng) const {
  if (topology_ == ChainTopology::DualChain) {
    return read_peak_dual(shaped(static_cast<double>(photoelectrons.n_plus)),
                          shaped(static_cast<double>(photoelectrons.n_minus)), config_, readout_, rng);
  }
  return read_peak(shaped(static_cast<double>(photoelectrons.difference())), config_, readout_, rng);
}

ChainReading PolarimeterChain::measure(const PolarimeterSample& incident, RandomStream& rng) const {
  auto detect_rng = substream(rng, StreamTag::Detection);
  auto readout_rng = substream(rng, StreamTag::Readout);
  ChainReading out;
  out.photoelectrons = detect_photons(incident, config_, detect_rng);
  out.peak = read(out.photoelectrons, readout_rng);
  return out;
}

double PolarimeterChain::blocked_port_j(const PolarimeterSample& photoelectrons) const {
  const double volts = preamp_peak(static_cast<double>(photoelectrons.n_plus) * config_.actual_sensitivity(),
                                   pulse_duration_, config_.actual_tail_time());
  return volts / config_.sensitivity();
}

}  // namespace fastpol
