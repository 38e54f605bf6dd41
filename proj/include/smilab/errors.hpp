#pragma once

#include <stdexcept>
#include <string>

namespace smilab {

// Base for everything thrown by the library; catching smilab::Error at the
// CLI boundary is enough to map any failure onto an exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or mismatched matrix/state dimensions.
struct DimensionError : Error {
    using Error::Error;
};

// Input violates a documented precondition (non-Hermitian matrix, bad norm, ...).
struct PreconditionError : Error {
    using Error::Error;
};

// Bad experiment configuration: unknown keys, out-of-range parameters.
struct ConfigError : Error {
    using Error::Error;
};

// An eigensolver or other numeric kernel failed.
struct NumericalError : Error {
    using Error::Error;
};

// Conditioning on an event of numerically zero probability.
struct ConditioningError : Error {
    using Error::Error;
};

// Rational approximation cannot satisfy its constraints under the given cap.
struct ResolutionError : Error {
    using Error::Error;
};

// Filesystem failure while reading configs or persisting results.
struct IoError : Error {
    using Error::Error;
};

} // namespace smilab
