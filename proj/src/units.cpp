#include "fastpol/units.hpp"

#include <array>
#include <charconv>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "fastpol/errors.hpp"

namespace fastpol::units {
namespace {

struct UnitEntry {
  std::string_view symbol;
  Dimension dim;
  double scale;
};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr std::array kUnits{
    UnitEntry{"s", Dimension::Time, 1.0},
    UnitEntry{"ms", Dimension::Time, 1e-3},
    UnitEntry{"us", Dimension::Time, 1e-6},
    UnitEntry{"µs", Dimension::Time, 1e-6},
    UnitEntry{"ns", Dimension::Time, 1e-9},
    UnitEntry{"ps", Dimension::Time, 1e-12},
    UnitEntry{"F", Dimension::Capacitance, 1.0},
    UnitEntry{"mF", Dimension::Capacitance, 1e-3},
    UnitEntry{"uF", Dimension::Capacitance, 1e-6},
    UnitEntry{"µF", Dimension::Capacitance, 1e-6},
    UnitEntry{"nF", Dimension::Capacitance, 1e-9},
    UnitEntry{"pF", Dimension::Capacitance, 1e-12},
    UnitEntry{"fF", Dimension::Capacitance, 1e-15},
    UnitEntry{"ohm", Dimension::Resistance, 1.0},
    UnitEntry{"Ohm", Dimension::Resistance, 1.0},
    UnitEntry{"kohm", Dimension::Resistance, 1e3},
    UnitEntry{"kOhm", Dimension::Resistance, 1e3},
    UnitEntry{"Mohm", Dimension::Resistance, 1e6},
    UnitEntry{"MOhm", Dimension::Resistance, 1e6},
    UnitEntry{"Gohm", Dimension::Resistance, 1e9},
    UnitEntry{"GOhm", Dimension::Resistance, 1e9},
    UnitEntry{"Ω", Dimension::Resistance, 1.0},
    UnitEntry{"kΩ", Dimension::Resistance, 1e3},
    UnitEntry{"MΩ", Dimension::Resistance, 1e6},
    UnitEntry{"GΩ", Dimension::Resistance, 1e9},
    UnitEntry{"V", Dimension::Voltage, 1.0},
    UnitEntry{"kV", Dimension::Voltage, 1e3},
    UnitEntry{"mV", Dimension::Voltage, 1e-3},
    UnitEntry{"uV", Dimension::Voltage, 1e-6},
    UnitEntry{"µV", Dimension::Voltage, 1e-6},
    UnitEntry{"rad/s", Dimension::AngularFrequency, 1.0},
    UnitEntry{"krad/s", Dimension::AngularFrequency, 1e3},
    UnitEntry{"Mrad/s", Dimension::AngularFrequency, 1e6},
    UnitEntry{"Grad/s", Dimension::AngularFrequency, 1e9},
    UnitEntry{"Hz", Dimension::AngularFrequency, kTwoPi},
    UnitEntry{"kHz", Dimension::AngularFrequency, kTwoPi * 1e3},
    UnitEntry{"MHz", Dimension::AngularFrequency, kTwoPi * 1e6},
    UnitEntry{"GHz", Dimension::AngularFrequency, kTwoPi * 1e9},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string_view dimension_name(Dimension dim) {
  switch (dim) {
    case Dimension::Dimensionless: return "dimensionless";
    case Dimension::Time: return "time";
    case Dimension::Capacitance: return "capacitance";
    case Dimension::Resistance: return "resistance";
    case Dimension::Voltage: return "voltage";
    case Dimension::AngularFrequency: return "angular frequency";
  }
  return "?";
}

/// Leading number and the remaining (trimmed) text.
std::pair<double, std::string_view> split_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr == text.data()) {
    throw ConfigError(fmt::format("'{}' does not start with a number", text));
  }
  return {value, trim(text.substr(static_cast<std::size_t>(ptr - text.data())))};
}

}  // namespace

std::string_view si_unit(Dimension dim) {
  switch (dim) {
    case Dimension::Dimensionless: return "";
    case Dimension::Time: return "s";
    case Dimension::Capacitance: return "F";
    case Dimension::Resistance: return "ohm";
    case Dimension::Voltage: return "V";
    case Dimension::AngularFrequency: return "rad/s";
  }
  return "";
}

double parse_number(std::string_view text) {
  const auto [value, rest] = split_number(text);
  if (!rest.empty()) throw ConfigError(fmt::format("'{}' must be a plain number", trim(text)));
  return value;
}

double parse_quantity(std::string_view text, Dimension dim) {
  if (dim == Dimension::Dimensionless) return parse_number(text);
  const auto [value, unit] = split_number(text);
  if (unit.empty()) {
    throw ConfigError(fmt::format("'{}' needs a {} unit", trim(text), dimension_name(dim)));
  }
  for (const auto& entry : kUnits) {
    if (entry.symbol != unit) continue;
    if (entry.dim != dim) {
      throw ConfigError(fmt::format("'{}' is a {} unit, expected {}", unit, dimension_name(entry.dim),
                                    dimension_name(dim)));
    }
    return value * entry.scale;
  }
  throw ConfigError(fmt::format("unknown unit '{}'", unit));
}

std::string format_quantity(double si_value, Dimension dim) {
  if (dim == Dimension::Dimensionless) return fmt::format("{}", si_value);
  return fmt::format("{} {}", si_value, si_unit(dim));
}

}  // namespace fastpol::units
