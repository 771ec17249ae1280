#pragma once

#include <stdexcept>
#include <string>

namespace geope {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A rotation argument whose norm is not 1 within the construction tolerance.
struct NonUnitRotor : Error {
    using Error::Error;
};

/// axis_angle called with a zero-length axis and a nonzero angle.
struct ZeroAxis : Error {
    using Error::Error;
};

struct EmptyList : Error {
    using Error::Error;
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

/// Feature dimension incompatible with the block layout of the requested mode.
struct DimensionMismatch : Error {
    using Error::Error;
};

struct NonUnitAxis : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace geope
