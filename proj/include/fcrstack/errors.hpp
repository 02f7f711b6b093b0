#pragma once

#include <stdexcept>
#include <string>

namespace fcrstack {

// User-facing input problems: bad config values, malformed files, infeasible
// requests. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A row of an input file could not be parsed.
class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// A time-series gap larger than the fill threshold.
class DataGapError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// The reserve band for a bid is empty: bid * t_res exceeds half the capacity.
class InfeasibleBandError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Internal contract breaches (controller or caller bugs). CLI exit code 2.
class ConverterLimitError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fcrstack
