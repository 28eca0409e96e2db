#pragma once

#include <stdexcept>
#include <string>

namespace gestrec {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inconsistent shapes: alphabet mismatches, wrong matrix sizes, bad counts.
struct DimensionError : Error {
    using Error::Error;
};

// Invalid or insufficient input data: empty sequences, duplicate labels,
// missing classes, out-of-range symbols.
struct DataError : Error {
    using Error::Error;
};

// File-format problems; message carries "path:line" where available.
struct ParseError : Error {
    using Error::Error;
};

// Numerical breakdown, e.g. a sequence with zero posterior mass.
struct NumericalError : Error {
    using Error::Error;
};

}  // namespace gestrec
