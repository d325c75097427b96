#include "fastpol/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "fastpol/errors.hpp"
#include "fastpol/units.hpp"

namespace fastpol {

using units::Dimension;

PulseConfig RunConfig::default_pulse() {
  PulseConfig p;
  p.mean_photon_number = 3.7e6;
  p.duration = 400e-9;
  p.detuning = 2.0 * std::numbers::pi * 1e9;
  p.probe_linewidth = 2.0 * std::numbers::pi * 5e6;
  return p;
}

std::vector<double> RunConfig::default_sweep() { return {1e6, 2e6, 3.7e6, 5e6, 7e6, 1e7}; }

std::vector<double> RunConfig::duration_presets() { return {100e-9, 200e-9, 400e-9, 600e-9}; }

SpinEnsembleState RunConfig::default_spins() {
  SpinEnsembleState s = SpinEnsembleState::coherent(1'000'000);
  s.coherence_time = 1.0;
  s.set_natural_linewidth(2.0 * std::numbers::pi * 29e6);
  return s;
}

InteractionParams RunConfig::default_interaction() {
  InteractionParams p;
  p.coupling_alpha = 1e-6;
  p.interaction_time = 1.0;
  return p;
}

CountingModel RunConfig::model_for(double photon_number) const {
  if (!counting_model) return default_counting_model(photon_number);
  if (*counting_model == CountingModel::GaussianLimit && photon_number > 0.0 &&
      photon_number < kGaussianLimitThreshold) {
    throw ConfigError(fmt::format(
        "the Gaussian counting model needs 2J >= {}, got {}; use binomial or poisson",
        kGaussianLimitThreshold, photon_number));
  }
  return *counting_model;
}

void RunConfig::validate() const {
  try {
    pulse.validate();
    detector.validate();
    if (interaction) interaction->validate();
    if (spins) spins->validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  if (n_pulses < 1) throw ConfigError("run needs at least one pulse");
  if (!(trace.sample_period > 0.0) || !(trace.window > 0.0) || trace.arrival_time < 0.0) {
    throw ConfigError("trace sample period and window must be > 0, arrival time >= 0");
  }
  if (trace.arrival_time + pulse.duration > trace.window) {
    throw ConfigError("trace window ends before the pulse does");
  }
  for (double n : sweep_photon_numbers) {
    if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("sweep photon numbers must be > 0");
  }
  if (!(pulse_separation > 0.0)) throw ConfigError("pulse separation must be > 0");
  if (!std::isfinite(waveform_charge)) throw ConfigError("waveform charge must be finite");
  model_for(pulse.mean_photon_number);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

/// Map node with strict key accounting.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigError(fmt::format("section '{}' must be a mapping", path_));
    }
  }

  bool present() const { return node_ && node_.IsMap(); }

  YAML::Node take(const std::string& key) {
    seen_.insert(key);
    if (!present()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& map = node_;
    return map[key];
  }

  std::string scalar(const std::string& key, const YAML::Node& v) const {
    if (!v.IsScalar()) throw ConfigError(fmt::format("{}.{} must be a scalar", path_, key));
    return v.Scalar();
  }

  void quantity(const std::string& key, Dimension dim, double& out) {
    if (auto v = take(key)) out = wrap(key, [&] { return units::parse_quantity(scalar(key, v), dim); });
  }

  void number(const std::string& key, double& out) { quantity(key, Dimension::Dimensionless, out); }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    auto v = take(key);
    if (!v) return;
    const std::string text = scalar(key, v);
    Int value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ConfigError(fmt::format("{}.{} must be an integer, got '{}'", path_, key, text));
    }
    out = value;
  }

  /// Integer-valued count that may be written in exponent form (1e6).
  template <typename Int>
  void count(const std::string& key, Int& out) {
    auto v = take(key);
    if (!v) return;
    const double value = wrap(key, [&] { return units::parse_number(scalar(key, v)); });
    if (value < 0.0 || value != std::floor(value)) {
      throw ConfigError(fmt::format("{}.{} must be a non-negative integer", path_, key));
    }
    out = static_cast<Int>(value);
  }

  void boolean(const std::string& key, bool& out) {
    auto v = take(key);
    if (!v) return;
    const std::string text = scalar(key, v);
    if (text == "true") {
      out = true;
    } else if (text == "false") {
      out = false;
    } else {
      throw ConfigError(fmt::format("{}.{} must be true or false", path_, key));
    }
  }

  std::optional<std::string> string(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    return scalar(key, v);
  }

  template <typename Enum, typename Parser>
  void enumeration(const std::string& key, Parser parse, Enum& out) {
    if (auto text = string(key)) {
      auto parsed = parse(*text);
      if (!parsed) throw ConfigError(fmt::format("{}.{}: unknown value '{}'", path_, key, *text));
      out = *parsed;
    }
  }

  void number_list(const std::string& key, std::vector<double>& out) {
    auto v = take(key);
    if (!v) return;
    if (!v.IsSequence()) throw ConfigError(fmt::format("{}.{} must be a list", path_, key));
    out.clear();
    for (const auto& item : v) {
      out.push_back(wrap(key, [&] { return units::parse_number(scalar(key, item)); }));
    }
  }

  void finish() const {
    if (!present()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(fmt::format("unknown key '{}.{}'", path_, key));
    }
  }

 private:
  template <typename F>
  double wrap(const std::string& key, F&& f) const {
    try {
      return f();
    } catch (const ConfigError& e) {
      const std::string where = path_ + "." + key;
      if (std::string_view(e.what()).starts_with(where)) throw;
      throw ConfigError(fmt::format("{}: {}", where, e.what()));
    }
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

RunConfig from_node(const YAML::Node& root) {
  if (!root || !root.IsMap()) throw ConfigError("run configuration must be a mapping");
  RunConfig cfg;
  std::set<std::string> known{"run", "pulse", "detector", "trace", "interaction", "spins",
                              "sweep", "two_pulse", "qnd", "waveform"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) throw ConfigError(fmt::format("unknown section '{}'", key));
  }

  Section run(root["run"], "run");
  run.count("pulses", cfg.n_pulses);
  run.integer("seed", cfg.seed);
  if (auto model = run.string("model")) {
    cfg.counting_model = parse_counting_model(*model);
    if (!cfg.counting_model) throw ConfigError("run.model: unknown value '" + *model + "'");
  }
  run.enumeration("units_basis", parse_units_basis, cfg.units_basis);
  if (auto dir = run.string("output_dir")) cfg.output_dir = *dir;
  run.count("threads", cfg.threads);
  run.finish();

  Section pulse(root["pulse"], "pulse");
  pulse.number("photon_number", cfg.pulse.mean_photon_number);
  pulse.quantity("duration", Dimension::Time, cfg.pulse.duration);
  pulse.quantity("detuning", Dimension::AngularFrequency, cfg.pulse.detuning);
  pulse.quantity("linewidth", Dimension::AngularFrequency, cfg.pulse.probe_linewidth);
  pulse.finish();

  auto& d = cfg.detector;
  Section det(root["detector"], "detector");
  det.number("quantum_efficiency", d.quantum_efficiency);
  det.quantity("feedback_capacitance", Dimension::Capacitance, d.feedback_capacitance);
  det.quantity("feedback_resistance", Dimension::Resistance, d.feedback_resistance);
  det.quantity("shaper_peak_time", Dimension::Time, d.shaper_peak_time);
  det.number("shaper_gain", d.shaper_gain);
  det.integer("shaper_order", d.shaper_order);
  det.boolean("pole_zero_cancellation", d.pole_zero_cancellation);
  det.number("extinction_ratio", d.extinction_ratio);
  det.number("excess_noise", d.excess_noise_electrons);
  det.quantity("adc_full_scale", Dimension::Voltage, d.adc_full_scale);
  det.integer("adc_bits", d.adc_bits);
  det.number("capacitance_error", d.capacitance_error);
  det.enumeration("peak_strategy", parse_peak_strategy, cfg.peak_strategy);
  det.enumeration("topology", parse_chain_topology, cfg.topology);
  det.finish();

  Section trace(root["trace"], "trace");
  trace.quantity("sample_period", Dimension::Time, cfg.trace.sample_period);
  trace.quantity("window", Dimension::Time, cfg.trace.window);
  trace.quantity("arrival_time", Dimension::Time, cfg.trace.arrival_time);
  trace.finish();

  Section inter(root["interaction"], "interaction");
  if (inter.present()) {
    InteractionParams p = RunConfig::default_interaction();
    if (auto product = inter.take("coupling_product")) {
      p.coupling_alpha = units::parse_number(inter.scalar("coupling_product", product));
      p.interaction_time = 1.0;
      if (inter.take("coupling_alpha") || inter.take("interaction_time")) {
        throw ConfigError("interaction: give either coupling_product or coupling_alpha/interaction_time");
      }
    } else {
      inter.quantity("coupling_alpha", Dimension::AngularFrequency, p.coupling_alpha);
      inter.quantity("interaction_time", Dimension::Time, p.interaction_time);
    }
    cfg.interaction = p;
  }
  inter.finish();

  Section spins(root["spins"], "spins");
  if (spins.present()) {
    SpinEnsembleState s = RunConfig::default_spins();
    spins.count("atom_count", s.atom_count);
    s.var_sz = static_cast<double>(s.atom_count) / 4.0;
    spins.number("mean_sz", s.mean_sz);
    spins.number("var_sz", s.var_sz);
    spins.quantity("coherence_time", Dimension::Time, s.coherence_time);
    double lifetime = 0.0, linewidth = 0.0;
    spins.quantity("excited_lifetime", Dimension::Time, lifetime);
    spins.quantity("natural_linewidth", Dimension::AngularFrequency, linewidth);
    if (lifetime > 0.0 && linewidth > 0.0 && std::abs(lifetime * linewidth - 1.0) > 1e-9) {
      throw ConfigError("spins: natural_linewidth must equal 1 / excited_lifetime");
    }
    if (lifetime > 0.0) {
      s.excited_lifetime = lifetime;
    } else if (linewidth > 0.0) {
      s.set_natural_linewidth(linewidth);
    }
    cfg.spins = s;
  }
  spins.finish();

  Section sweep(root["sweep"], "sweep");
  sweep.number_list("photon_numbers", cfg.sweep_photon_numbers);
  sweep.finish();

  Section two(root["two_pulse"], "two_pulse");
  two.quantity("separation", Dimension::Time, cfg.pulse_separation);
  two.finish();

  Section qnd(root["qnd"], "qnd");
  qnd.boolean("through_chain", cfg.qnd_through_chain);
  qnd.finish();

  Section wave(root["waveform"], "waveform");
  wave.number("charge", cfg.waveform_charge);
  wave.finish();

  cfg.validate();
  return cfg;
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed run file: ") + e.what());
  }
  if (root.IsNull()) return RunConfig{};
  if (root.IsMap() && root["manifest_version"] && root["config"]) return from_node(root["config"]);
  return from_node(root);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

nlohmann::json to_json(const RunConfig& c) {
  using units::format_quantity;
  using nlohmann::json;
  auto num = [](double v) { return format_quantity(v, Dimension::Dimensionless); };

  json j;
  j["run"] = {{"pulses", c.n_pulses},
              {"seed", c.seed},
              {"units_basis", to_string(c.units_basis)},
              {"threads", c.threads}};
  if (c.counting_model) j["run"]["model"] = to_string(*c.counting_model);
  if (!c.output_dir.empty()) j["run"]["output_dir"] = c.output_dir;

  j["pulse"] = {{"photon_number", num(c.pulse.mean_photon_number)},
                {"duration", format_quantity(c.pulse.duration, Dimension::Time)},
                {"detuning", format_quantity(c.pulse.detuning, Dimension::AngularFrequency)},
                {"linewidth", format_quantity(c.pulse.probe_linewidth, Dimension::AngularFrequency)}};

  const auto& d = c.detector;
  j["detector"] = {
      {"quantum_efficiency", num(d.quantum_efficiency)},
      {"feedback_capacitance", format_quantity(d.feedback_capacitance, Dimension::Capacitance)},
      {"feedback_resistance", format_quantity(d.feedback_resistance, Dimension::Resistance)},
      {"shaper_peak_time", format_quantity(d.shaper_peak_time, Dimension::Time)},
      {"shaper_gain", num(d.shaper_gain)},
      {"shaper_order", d.shaper_order},
      {"pole_zero_cancellation", d.pole_zero_cancellation},
      {"extinction_ratio", num(d.extinction_ratio)},
      {"excess_noise", num(d.excess_noise_electrons)},
      {"adc_full_scale", format_quantity(d.adc_full_scale, Dimension::Voltage)},
      {"adc_bits", d.adc_bits},
      {"capacitance_error", num(d.capacitance_error)},
      {"peak_strategy", to_string(c.peak_strategy)},
      {"topology", to_string(c.topology)},
  };
  j["trace"] = {{"sample_period", format_quantity(c.trace.sample_period, Dimension::Time)},
                {"window", format_quantity(c.trace.window, Dimension::Time)},
                {"arrival_time", format_quantity(c.trace.arrival_time, Dimension::Time)}};
  if (c.interaction) {
    j["interaction"] = {
        {"coupling_alpha", format_quantity(c.interaction->coupling_alpha, Dimension::AngularFrequency)},
        {"interaction_time", format_quantity(c.interaction->interaction_time, Dimension::Time)}};
  }
  if (c.spins) {
    j["spins"] = {{"mean_sz", num(c.spins->mean_sz)},
                  {"var_sz", num(c.spins->var_sz)},
                  {"atom_count", c.spins->atom_count},
                  {"coherence_time", format_quantity(c.spins->coherence_time, Dimension::Time)},
                  {"excited_lifetime", format_quantity(c.spins->excited_lifetime, Dimension::Time)}};
  }
  json sweep = json::array();
  for (double n : c.sweep_photon_numbers) sweep.push_back(num(n));
  j["sweep"] = {{"photon_numbers", sweep}};
  j["two_pulse"] = {{"separation", format_quantity(c.pulse_separation, Dimension::Time)}};
  j["qnd"] = {{"through_chain", c.qnd_through_chain}};
  j["waveform"] = {{"charge", num(c.waveform_charge)}};
  return j;
}

}  // namespace fastpol
