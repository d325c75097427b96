#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "fastpol/random.hpp"
#include "fastpol/stokes.hpp"

namespace fastpol {

inline constexpr double kElementaryCharge = 1.602176634e-19;  // C

enum class PeakStrategy {
  GlobalMax,  ///< largest |V| sample of the shaped trace
  FixedTime,  ///< sample at the nominal peak time of the chain
};

enum class ChainTopology {
  DifferenceCurrent,  ///< photocurrents subtracted before one preamp
  DualChain,          ///< one preamp/shaper per photodiode, subtracted after the ADC
};

std::string_view to_string(PeakStrategy strategy);
std::string_view to_string(ChainTopology topology);
std::optional<PeakStrategy> parse_peak_strategy(std::string_view name);
std::optional<ChainTopology> parse_chain_topology(std::string_view name);

/// Photodiodes, charge-sensitive preamp, CR-RC^n shaper and ADC.
///
/// `feedback_capacitance` is the value the experimenter believes and uses to
/// convert volts back into electrons. The preamp itself integrates onto
/// `feedback_capacitance * capacitance_error`, which lets a calibration error
/// be injected without touching the reconstruction.
struct DetectorChainConfig {
  double quantum_efficiency = 0.9;
  double feedback_capacitance = 1e-12;  // F
  double feedback_resistance = 300e6;   // ohm
  double shaper_peak_time = 2.3e-6;     // s
  double shaper_gain = 200.0;
  int shaper_order = 1;
  bool pole_zero_cancellation = true;
  double extinction_ratio = 1e-5;
  /// rms input-referred electronic noise, in electrons of J_y' (half the
  /// port difference).
  double excess_noise_electrons = 80.0;
  double adc_full_scale = 5.0;  // V, symmetric
  int adc_bits = 14;
  double capacitance_error = 1.0;  ///< actual C_f / nominal C_f

  /// e / C_f [V per electron] at the nominal capacitance.
  double sensitivity() const { return kElementaryCharge / feedback_capacitance; }
  /// R_f C_f [s] at the nominal capacitance.
  double tail_time() const { return feedback_resistance * feedback_capacitance; }

  double actual_capacitance() const { return feedback_capacitance * capacitance_error; }
  double actual_sensitivity() const { return kElementaryCharge / actual_capacitance(); }
  double actual_tail_time() const { return feedback_resistance * actual_capacitance(); }

  double adc_lsb() const;

  /// Unit quantum efficiency, no leakage, no electronic noise.
  static DetectorChainConfig ideal();

  void validate() const;
};

/// Sampling grid for synthesized waveforms.
struct TraceParams {
  double sample_period = 10e-9;  // s
  double window = 20e-6;         // s
  double arrival_time = 1e-6;    // s, start of charge collection

  std::size_t sample_count() const;
};

/// Uniformly sampled voltage record.
struct WaveformTrace {
  double t0 = 0.0;
  double sample_period = 1e-8;
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) * sample_period; }
  std::size_t argmax_abs() const;
  double peak_abs() const;

  void validate() const;

  /// Sample-wise sum; grids must match.
  WaveformTrace& operator+=(const WaveformTrace& other);
};

WaveformTrace operator+(WaveformTrace a, const WaveformTrace& b);

/// Two columns, "time_s,voltage_V" header, shortest round-trip decimal text.
void write_waveform(std::ostream& os, const WaveformTrace& trace);

/// Port leakage through the finite extinction, then binomial thinning by the
/// quantum efficiency. The result is in the photoelectron basis.
PolarimeterSample detect_photons(const PolarimeterSample& incident,
                                 const DetectorChainConfig& config, RandomStream& rng);

/// Charge-sensitive preamp output for `charge_electrons` collected uniformly
/// over `pulse_duration` (0 means an instantaneous charge). The preamp is a
/// leaky integrator: it ramps to charge * e / C_f and decays with R_f C_f.
WaveformTrace synth_preamp_waveform(double charge_electrons, double pulse_duration,
                                    const DetectorChainConfig& config, const TraceParams& trace);

/// CR-RC^n shaper with equal time constants tau = peak_time / n, optional
/// pole-zero cancellation of the preamp tail, and gain normalized so that a
/// charge step of amplitude V peaks at G * V at t = peak_time.
///
/// Each stage is integrated exactly for input that is linear between
/// samples. The filter starts in steady state with the first input sample.
WaveformTrace synth_shaper_waveform(const WaveformTrace& preamp, const DetectorChainConfig& config);

/// Peak of the shaped response to a charge collected over `pulse_duration`,
/// relative to G times the ideal step amplitude. Covers the finite collection
/// time and, without pole-zero cancellation, the preamp droop.
double calibrate_ballistic_deficit(const DetectorChainConfig& config, double pulse_duration);

struct PeakReadout {
  PeakStrategy strategy = PeakStrategy::GlobalMax;
  /// Absolute trace time read by PeakStrategy::FixedTime.
  double sample_time = 0.0;
  double ballistic_deficit = 1.0;
};

struct PeakReading {
  std::size_t index = 0;
  double time = 0.0;
  double volts = 0.0;                 ///< quantized ADC value
  double difference_electrons = 0.0;  ///< reconstructed n+ - n-
  double j_y_prime = 0.0;             ///< difference / 2
};

/// ADC code spacing in volts -> quantized volts; throws ClippingError past
/// full scale.
double quantize(double volts, const DetectorChainConfig& config);

/// Locates the peak, adds the input-referred electronic noise, digitizes and
/// converts volts to J_y' through C_f / (G e) and the ballistic deficit.
/// A flat (zero-charge) trace is read at `readout.sample_time`.
PeakReading read_peak(const WaveformTrace& shaped, const DetectorChainConfig& config,
                      const PeakReadout& readout, RandomStream& rng);

/// Same as read_peak for two independently digitized chains whose codes are
/// subtracted.
PeakReading read_peak_dual(const WaveformTrace& shaped_plus, const WaveformTrace& shaped_minus,
                           const DetectorChainConfig& config, const PeakReadout& readout,
                           RandomStream& rng);

struct ChainReading {
  PolarimeterSample photoelectrons;
  PeakReading peak;
};

/// One balanced polarimeter: all of the above bound to a pulse duration.
class PolarimeterChain {
 public:
  PolarimeterChain(DetectorChainConfig config, TraceParams trace, double pulse_duration,
                   PeakStrategy strategy = PeakStrategy::GlobalMax,
                   ChainTopology topology = ChainTopology::DifferenceCurrent);

  const DetectorChainConfig& config() const { return config_; }
  const TraceParams& trace() const { return trace_; }
  double pulse_duration() const { return pulse_duration_; }
  double ballistic_deficit() const { return readout_.ballistic_deficit; }
  /// Time of the noiseless response maximum on this chain's grid.
  double nominal_peak_time() const { return nominal_peak_time_; }

  WaveformTrace preamp(double charge_electrons) const;
  WaveformTrace shaped(double charge_electrons) const;

  /// Readout of an already-detected photoelectron sample.
  PeakReading read(const PolarimeterSample& photoelectrons, RandomStream& rng) const;

  /// detect_photons followed by read.
  ChainReading measure(const PolarimeterSample& incident, RandomStream& rng) const;

  /// J from the preamp plateau with the minus photodiode blocked, converted
  /// with the nominal sensitivity.
  double blocked_port_j(const PolarimeterSample& photoelectrons) const;

 private:
  DetectorChainConfig config_;
  TraceParams trace_;
  double pulse_duration_;
  ChainTopology topology_;
  PeakReadout readout_;
  double nominal_peak_time_ = 0.0;
};

}  // namespace fastpol
