#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "fastpol/detector.hpp"
#include "fastpol/errors.hpp"
#include "oracles.hpp"

using namespace fastpol;

namespace {

TraceParams trace_at(double dt, double window = 20e-6, double arrival = 1e-6) {
  TraceParams t;
  t.sample_period = dt;
  t.window = window;
  t.arrival_time = arrival;
  return t;
}

// Quiet chain: no leakage, no electronic noise.
DetectorChainConfig quiet() {
  auto c = DetectorChainConfig::ideal();
  c.quantum_efficiency = 0.9;
  return c;
}

}  // namespace

TEST_CASE("sensitivity and tail time of the default preamp") {
  const DetectorChainConfig c;
  CHECK(c.sensitivity() == doctest::Approx(0.1602176634e-6));
  CHECK(c.tail_time() == doctest::Approx(300e-6));
  CHECK(c.adc_lsb() == doctest::Approx(10.0 / 16384.0));
  c.validate();
}

TEST_CASE("chain config validation") {
  DetectorChainConfig c;
  c.quantum_efficiency = 1.1;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = {};
  c.feedback_capacitance = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = {};
  c.shaper_order = 0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = {};
  c.adc_bits = 1;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = {};
  c.excess_noise_electrons = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
}

TEST_CASE("preamp plateau is e / C_f per electron") {
  const DetectorChainConfig c;
  const auto w = synth_preamp_waveform(1e6, 400e-9, c, trace_at(10e-9));
  const double peak = w.peak_abs();
  // Droop during a 400 ns ramp against a 300 us tail is ~0.07%.
  CHECK(peak == doctest::Approx(0.1602176634).epsilon(0.005));
  CHECK(peak < 0.1602176634);
  CHECK(w.samples.front() == 0.0);
  // Exponential tail with R_f C_f.
  const std::size_t i = w.argmax_abs();
  const std::size_t j = i + 1000;  // 10 us later
  CHECK(w.samples[j] / w.samples[i] == doctest::Approx(std::exp(-10e-6 / 300e-6)).epsilon(1e-6));
}

TEST_CASE("instantaneous charge gives a step") {
  const DetectorChainConfig c;
  const auto w = synth_preamp_waveform(-5e5, 0.0, c, trace_at(10e-9));
  CHECK(w.samples[w.argmax_abs()] == doctest::Approx(-5e5 * c.sensitivity()));
  CHECK(w.time_at(w.argmax_abs()) == doctest::Approx(1e-6));
}

TEST_CASE("preamp rejects unsupported inputs") {
  const DetectorChainConfig c;
  CHECK_THROWS_AS(synth_preamp_waveform(1e6, -1e-9, c, trace_at(10e-9)), InvalidParameter);
  CHECK_THROWS_AS(synth_preamp_waveform(1e6, 3e-6, c, trace_at(10e-9)), InvalidParameter);  // >= tail/100
  CHECK_THROWS_AS(synth_preamp_waveform(1e6, 400e-9, c, trace_at(10e-9, 1e-6)), InvalidParameter);
  CHECK_THROWS_AS(synth_preamp_waveform(NAN, 400e-9, c, trace_at(10e-9)), InvalidParameter);
}

TEST_CASE("zero charge gives flat traces") {
  const DetectorChainConfig c;
  const auto p = synth_preamp_waveform(0.0, 400e-9, c, trace_at(10e-9));
  const auto s = synth_shaper_waveform(p, c);
  CHECK(p.peak_abs() == 0.0);
  CHECK(s.peak_abs() == 0.0);
}

TEST_CASE("shaper matches the superposed CR-RC^n oracle") {
  for (int order : {1, 2, 4}) {
    for (double duration : {0.0, 400e-9}) {
      CAPTURE(order);
      CAPTURE(duration);
      DetectorChainConfig c;
      c.shaper_order = order;
      const double dt = 10e-9;
      const auto preamp = synth_preamp_waveform(1e6, duration, c, trace_at(dt));
      const auto shaped = synth_shaper_waveform(preamp, c);
      const double tau = c.shaper_peak_time / order;
      const double scale = c.shaper_gain * 1e6 * c.sensitivity();
      double worst = 0.0;
      for (std::size_t i = 0; i < shaped.size(); i += 7) {
        // Oracle at 1 ns slices of the collection ramp. A sampled step is read as
        // linear across the sample interval before arrival.
        const double ref = duration > 0.0
                               ? scale * oracle::ramp_response(shaped.time_at(i), 1e-6, duration, tau, order, 400)
                               : scale * oracle::ramp_response(shaped.time_at(i), 1e-6 - dt, dt, tau, order, 100);
        worst = std::max(worst, std::abs(shaped.samples[i] - ref) / scale);
      }
      CHECK(worst < 2e-3);
    }
  }
}

TEST_CASE("shaper peaks at the configured peak time") {
  const DetectorChainConfig c;
  const auto s = synth_shaper_waveform(synth_preamp_waveform(1e6, 0.0, c, trace_at(10e-9)), c);
  CHECK(std::abs(s.time_at(s.argmax_abs()) - 1e-6 - 2.3e-6) <= 10e-9 + 1e-15);
  CHECK(s.peak_abs() == doctest::Approx(200.0 * 1e6 * c.sensitivity()).epsilon(1e-3));
}

TEST_CASE("pole-zero cancellation removes the undershoot") {
  DetectorChainConfig c;
  const auto preamp = synth_preamp_waveform(1e6, 0.0, c, trace_at(10e-9, 60e-6));
  const auto with = synth_shaper_waveform(preamp, c);
  c.pole_zero_cancellation = false;
  const auto without = synth_shaper_waveform(preamp, c);
  double min_with = 0.0, min_without = 0.0;
  for (double v : with.samples) min_with = std::min(min_with, v);
  for (double v : without.samples) min_without = std::min(min_without, v);
  CHECK(min_without < -1e-3 * without.peak_abs());
  CHECK(min_with > -1e-6 * with.peak_abs());
}

TEST_CASE("shaper grid checks") {
  const DetectorChainConfig c;
  const auto coarse = synth_preamp_waveform(1e6, 0.0, c, trace_at(100e-9));
  CHECK_THROWS_AS(synth_shaper_waveform(coarse, c), SimulationError);
  const auto short_window = synth_preamp_waveform(1e6, 0.0, c, trace_at(10e-9, 8e-6));
  CHECK_THROWS_AS(synth_shaper_waveform(short_window, c), SimulationError);
}

TEST_CASE("ballistic deficit against the slice oracle") {
  const DetectorChainConfig c;
  CHECK(calibrate_ballistic_deficit(c, 0.0) == doctest::Approx(1.0).epsilon(1e-4));
  for (double duration : {100e-9, 400e-9, 600e-9}) {
    CAPTURE(duration);
    double best = 0.0;
    for (int k = 0; k < 6000; ++k) {
      best = std::max(best, oracle::ramp_response(k * 1e-9, 0.0, duration, c.shaper_peak_time, 1, 1000));
    }
    const double lib = calibrate_ballistic_deficit(c, duration);
    CHECK(lib == doctest::Approx(best).epsilon(2e-5));
    CHECK(lib < 1.0);
  }
  CHECK_THROWS_AS(calibrate_ballistic_deficit(c, 2.3e-6), InvalidParameter);
  CHECK_THROWS_AS(calibrate_ballistic_deficit(c, -1e-9), InvalidParameter);
}

TEST_CASE("ADC quantization and clipping") {
  const DetectorChainConfig c;
  const double lsb = c.adc_lsb();
  CHECK(quantize(0.0, c) == 0.0);
  CHECK(quantize(0.4 * lsb, c) == 0.0);
  CHECK(quantize(0.6 * lsb, c) == lsb);
  CHECK(quantize(-3.2 * lsb, c) == -3.0 * lsb);
  CHECK(std::abs(quantize(1.2345, c) - 1.2345) <= lsb / 2.0);
  CHECK_THROWS_AS(quantize(5.01, c), ClippingError);
  CHECK_THROWS_AS(quantize(-5.01, c), ClippingError);
  CHECK(quantize(5.0, c) == doctest::Approx(5.0 - lsb));  // top code
}

TEST_CASE("detection thins each port by the quantum efficiency") {
  const auto c = quiet();
  RandomStream rng(4);
  std::vector<double> plus(20000);
  for (auto& v : plus) {
    const auto pe = detect_photons(PolarimeterSample{100000, 100000}, c, rng);
    REQUIRE(pe.units_basis == UnitsBasis::Photoelectrons);
    v = static_cast<double>(pe.n_plus);
  }
  CHECK(std::abs(oracle::mean(plus) - 90000.0) < 5.0 * std::sqrt(9000.0 / 20000.0));
  CHECK(oracle::variance(plus) == doctest::Approx(100000.0 * 0.9 * 0.1).epsilon(0.05));

  PolarimeterSample already_pe{10, 10, UnitsBasis::Photoelectrons};
  CHECK_THROWS_AS(detect_photons(already_pe, c, rng), InvalidParameter);

  auto perfect = DetectorChainConfig::ideal();
  const auto same = detect_photons(PolarimeterSample{123, 456}, perfect, rng);
  CHECK(same.n_plus == 123);
  CHECK(same.n_minus == 456);
}

TEST_CASE("finite extinction leaks photons between the ports") {
  auto c = DetectorChainConfig::ideal();
  c.extinction_ratio = 0.01;
  RandomStream rng(5);
  double sum = 0.0;
  for (int i = 0; i < 2000; ++i) sum += static_cast<double>(detect_photons(PolarimeterSample{100000, 0}, c, rng).n_minus);
  CHECK(sum / 2000.0 == doctest::Approx(1000.0).epsilon(0.01));
}

TEST_CASE("noiseless readout reconstructs the count difference") {
  const auto c = quiet();
  const PolarimeterChain chain(c, trace_at(10e-9), 400e-9);
  RandomStream rng(6);
  for (std::int64_t diff : {0, 1000, -2500, 40000}) {
    const PolarimeterSample pe{1000000 + diff, 1000000, UnitsBasis::Photoelectrons};
    const auto r = chain.read(pe, rng);
    // Error bounded by half an LSB in J_y' units.
    const double lsb_jy = c.adc_lsb() / (2.0 * c.shaper_gain * c.sensitivity() * chain.ballistic_deficit());
    CHECK(std::abs(r.j_y_prime - diff / 2.0) <= 0.5 * lsb_jy + 1e-9);
    CHECK(r.difference_electrons == doctest::Approx(2.0 * r.j_y_prime));
  }
}

TEST_CASE("peak strategies agree on a clean pulse") {
  const auto c = quiet();
  const PolarimeterChain global(c, trace_at(10e-9), 400e-9, PeakStrategy::GlobalMax);
  const PolarimeterChain fixed(c, trace_at(10e-9), 400e-9, PeakStrategy::FixedTime);
  CHECK(global.nominal_peak_time() == doctest::Approx(fixed.nominal_peak_time()));
  RandomStream a(7), b(7);
  const PolarimeterSample pe{1010000, 1000000, UnitsBasis::Photoelectrons};
  const auto ga = global.read(pe, a);
  const auto fb = fixed.read(pe, b);
  CHECK(ga.index == fb.index);
  CHECK(ga.volts == fb.volts);
}

TEST_CASE("fixed-time read fails outside the trace") {
  const auto c = quiet();
  const auto shaped = synth_shaper_waveform(synth_preamp_waveform(1e4, 400e-9, c, trace_at(10e-9)), c);
  RandomStream rng(1);
  PeakReadout far{PeakStrategy::FixedTime, 1.0, 1.0};
  CHECK_THROWS_AS(read_peak(shaped, c, far, rng), PeakAtEdgeError);
}

TEST_CASE("flat traces are read at the nominal time") {
  const DetectorChainConfig c;
  const PolarimeterChain chain(c, trace_at(10e-9), 400e-9);
  RandomStream rng(8);
  const auto r = chain.read(PolarimeterSample{0, 0, UnitsBasis::Photoelectrons}, rng);
  CHECK(r.time == doctest::Approx(chain.nominal_peak_time()));
}

TEST_CASE("clipping surfaces as a simulation error") {
  const DetectorChainConfig c;
  const PolarimeterChain chain(c, trace_at(10e-9), 400e-9);
  RandomStream rng(9);
  // 2e5 e of difference * 0.16 uV * 200 = 6.4 V
  CHECK_THROWS_AS(chain.read(PolarimeterSample{200000, 0, UnitsBasis::Photoelectrons}, rng), ClippingError);
}

TEST_CASE("dual-chain topology with a low-gain shaper") {
  auto c = quiet();
  c.shaper_gain = 2.0;
  const PolarimeterChain dual(c, trace_at(10e-9), 400e-9, PeakStrategy::GlobalMax, ChainTopology::DualChain);
  RandomStream rng(10);
  const auto r = dual.read(PolarimeterSample{1100000, 1000000, UnitsBasis::Photoelectrons}, rng);
  // Two quantizations, each within half an LSB.
  const double lsb_jy = c.adc_lsb() / (2.0 * c.shaper_gain * c.sensitivity() * dual.ballistic_deficit());
  CHECK(std::abs(r.j_y_prime - 50000.0) <= lsb_jy + 1e-9);

  // At the default gain a single port exceeds the ADC range.
  const PolarimeterChain hot(quiet(), trace_at(10e-9), 400e-9, PeakStrategy::GlobalMax, ChainTopology::DualChain);
  CHECK_THROWS_AS(hot.read(PolarimeterSample{1000000, 1000000, UnitsBasis::Photoelectrons}, rng), ClippingError);
}

TEST_CASE("capacitance error scales the reconstruction") {
  auto c = quiet();
  c.capacitance_error = 1.054;
  const PolarimeterChain chain(c, trace_at(10e-9), 400e-9);
  RandomStream rng(11);
  const auto r = chain.read(PolarimeterSample{1020000, 1000000, UnitsBasis::Photoelectrons}, rng);
  CHECK(r.j_y_prime == doctest::Approx(10000.0 / 1.054).epsilon(2e-3));
  // Blocked-port calibration carries the same factor.
  CHECK(chain.blocked_port_j(PolarimeterSample{1000000, 0, UnitsBasis::Photoelectrons}) ==
        doctest::Approx(1e6 / 1.054).epsilon(1e-3));
}

TEST_CASE("readout noise has the configured input-referred size") {
  auto c = quiet();
  c.excess_noise_electrons = 80.0;
  const PolarimeterChain chain(c, trace_at(10e-9), 400e-9);
  const RandomStream root(12);
  std::vector<double> jy(20000);
  for (std::size_t i = 0; i < jy.size(); ++i) {
    RandomStream rng = root.substream(i);
    jy[i] = chain.read(PolarimeterSample{0, 0, UnitsBasis::Photoelectrons}, rng).j_y_prime;
  }
  const double lsb_jy = c.adc_lsb() / (2.0 * c.shaper_gain * c.sensitivity() * chain.ballistic_deficit());
  const double expected = 6400.0 + lsb_jy * lsb_jy / 12.0;
  CHECK(std::abs(oracle::variance(jy) - expected) < 4.0 * expected * std::sqrt(2.0 / 20000.0));
}

TEST_CASE("superposition of two pulses 5 us apart") {
  const DetectorChainConfig c;
  const TraceParams first = trace_at(10e-9, 30e-6, 1e-6);
  const TraceParams second = trace_at(10e-9, 30e-6, 6e-6);
  const auto a = synth_preamp_waveform(1e5, 400e-9, c, first);
  const auto b = synth_preamp_waveform(-3e4, 400e-9, c, second);
  const auto together = synth_shaper_waveform(a + b, c);
  const auto apart = synth_shaper_waveform(a, c) + synth_shaper_waveform(b, c);
  const double scale = together.peak_abs();
  for (std::size_t i = 0; i < together.size(); ++i) {
    REQUIRE(std::abs(together.samples[i] - apart.samples[i]) < 1e-9 * scale);
  }
  WaveformTrace other = a;
  other.sample_period = 5e-9;
  CHECK_THROWS_AS(other += b, InvalidParameter);
}

TEST_CASE("waveform writer") {
  WaveformTrace t{0.0, 1e-8, {0.0, 0.5, -0.25}};
  std::ostringstream os;
  write_waveform(os, t);
  CHECK(os.str() == "time_s,voltage_V\n0,0\n1e-08,0.5\n2e-08,-0.25\n");
  CHECK(t.argmax_abs() == 1);
  WaveformTrace bad{0.0, 0.0, {1.0, 2.0}};
  CHECK_THROWS_AS(bad.validate(), InvalidParameter);
}

TEST_CASE("topology and strategy names") {
  CHECK(parse_peak_strategy("global_max") == PeakStrategy::GlobalMax);
  CHECK(parse_peak_strategy("fixed_time") == PeakStrategy::FixedTime);
  CHECK_FALSE(parse_peak_strategy("peak_hold").has_value());
  CHECK(parse_chain_topology(to_string(ChainTopology::DualChain)) == ChainTopology::DualChain);
}
