#pragma once

#include <stdexcept>
#include <string>

namespace shiftwave {

/// Base class for all shiftwave errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid model data: nonpositive parameters, bad kernels, non-monotone habitats.
struct ModelError : Error {
    using Error::Error;
};

/// Scenario/config file problems: syntax, unknown keys, missing files.
struct ConfigError : Error {
    using Error::Error;
};

/// A requested computation is outside its parameter regime
/// (e.g. a mixed-type wave below the minimal speed).
struct RegimeError : Error {
    using Error::Error;
};

/// Numerical failure: overflow, NaN/Inf, blow-up, iteration breakdown.
struct NumericalError : Error {
    using Error::Error;
};

/// A spreading speed is undefined because its effective growth rate is
/// nonpositive. Carries the offending rate so callers can report why.
struct UndefinedSpeedError : Error {
    double rate;
    explicit UndefinedSpeedError(double rate_, const std::string& msg)
        : Error(msg), rate(rate_) {}
};

}  // namespace shiftwave
