#pragma once

#include <stdexcept>
#include <string>

namespace fastpol {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates the invariants of its domain type.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Run-configuration file could not be parsed or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// First-order expansion of the Faraday rotation is not valid for the inputs.
class LinearizationError : public Error {
 public:
  using Error::Error;
};

/// Failure inside the signal chain (clipping, under-resolved traces, ...).
class SimulationError : public Error {
 public:
  using Error::Error;
};

class ClippingError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class PeakAtEdgeError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Statistical reduction refused its input.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

class TooFewSamples : public AnalysisError {
 public:
  using AnalysisError::AnalysisError;
};

class DegenerateData : public AnalysisError {
 public:
  using AnalysisError::AnalysisError;
};

}  // namespace fastpol
