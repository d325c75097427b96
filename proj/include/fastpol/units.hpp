#pragma once

#include <string>
#include <string_view>

namespace fastpol::units {

enum class Dimension { Dimensionless, Time, Capacitance, Resistance, Voltage, AngularFrequency };

/// Parses "<number> <unit>" into SI. The unit must belong to `dim`:
///   time: s ms us µs ns ps
///   capacitance: F mF uF nF pF fF
///   resistance: ohm kohm Mohm Gohm (also Ω forms)
///   voltage: V mV uV µV kV
///   angular frequency: rad/s krad/s Mrad/s Grad/s, or Hz kHz MHz GHz
///     (cycles per second, multiplied by 2 pi)
/// Dimensionless values must carry no unit. Throws ConfigError.
double parse_quantity(std::string_view text, Dimension dim);

/// Plain number, no unit; throws ConfigError.
double parse_number(std::string_view text);

/// Shortest round-trip decimal followed by the SI unit of `dim`.
std::string format_quantity(double si_value, Dimension dim);

std::string_view si_unit(Dimension dim);

}  // namespace fastpol::units
