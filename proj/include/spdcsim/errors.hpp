#pragma once

#include <stdexcept>
#include <string>

namespace spdcsim {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Wavelength requested outside a dispersion model's declared band.
struct BandError : Error {
  using Error::Error;
};

/// Invalid physical argument (non-positive power, zero bandwidth, ...).
struct DomainError : Error {
  using Error::Error;
};

/// Configuration violates a type invariant.
struct ValidationError : Error {
  using Error::Error;
};

/// No QPM period exists (non-positive wavevector mismatch).
struct NoQpmError : Error {
  using Error::Error;
};

/// Residual evaluated to NaN/Inf during a fit.
struct FitNumericError : Error {
  using Error::Error;
};

/// Data cannot constrain the requested parameters.
struct IllPosedError : Error {
  using Error::Error;
};

/// Degenerate input data (flat fringe, repeated abscissa, ...).
struct DegenerateDataError : Error {
  using Error::Error;
};

/// Time-tag stream not sorted.
struct OrderingError : Error {
  using Error::Error;
};

/// Scenario/schema violation (unknown key, wrong type, bad version).
struct SchemaError : Error {
  using Error::Error;
};

/// File could not be read/written/parsed.
struct IoError : Error {
  using Error::Error;
};

}  // namespace spdcsim
